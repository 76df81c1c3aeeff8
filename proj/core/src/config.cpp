#include "cemms/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cemms {

namespace {

const std::set<std::string> kKnownKeys = {"example", "kappa", "beta",  "source", "H",      "N_ov",
                                          "N_b",     "fine_cells", "n_f", "output", "threads"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

bool parse_integer(const std::string& s, long long& out) {
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

bool parse_real(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

Index positive_integer(const std::string& s, const std::string& key, int line) {
  long long v = 0;
  if (!parse_integer(s, v) || v < 1) throw ConfigError(key + " must be a positive integer, got '" + s + "'", line);
  return static_cast<Index>(v);
}

// H given as "1/n" or a decimal; returns n.
Index coarse_count(const std::string& s, int line) {
  double h = 0.0;
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    double num = 0.0;
    double den = 0.0;
    if (!parse_real(trim(s.substr(0, slash)), num) || !parse_real(trim(s.substr(slash + 1)), den) || den == 0.0) {
      throw ConfigError("H must be a fraction 1/n or a decimal, got '" + s + "'", line);
    }
    h = num / den;
  } else if (!parse_real(s, h)) {
    throw ConfigError("H must be a fraction 1/n or a decimal, got '" + s + "'", line);
  }
  if (!(h > 0.0 && h <= 1.0)) throw ConfigError("H must lie in (0, 1], got '" + s + "'", line);
  const double n = 1.0 / h;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * rounded) throw ConfigError("1/H must be an integer, got H = '" + s + "'", line);
  return static_cast<Index>(rounded);
}

ScalarField scalar_spec(const std::string& spec, const ExperimentConfig& cfg, const std::string& key) {
  if (spec.rfind("raster:", 0) == 0) {
    std::filesystem::path p = spec.substr(7);
    if (p.is_relative()) p = std::filesystem::path(cfg.base_dir) / p;
    return ScalarField::raster(read_raster(p.string(), 1));
  }
  if (key == "source" && spec == "corner") return library::corner_source();
  double v = 0.0;
  if (parse_real(spec, v)) return ScalarField::constant(v);
  throw ConfigError("unrecognized " + key + " specification '" + spec + "'", 0);
}

VectorField vector_spec(const std::string& spec, const ExperimentConfig& cfg) {
  if (spec.rfind("raster:", 0) == 0) {
    std::filesystem::path p = spec.substr(7);
    if (p.is_relative()) p = std::filesystem::path(cfg.base_dir) / p;
    return VectorField::raster(read_raster(p.string(), 2));
  }
  if (spec == "cellular") return library::cellular_velocity();
  if (spec == "sheared") return library::sheared_velocity();
  std::stringstream ss(spec);
  std::string a;
  std::string b;
  std::string extra;
  double bx = 0.0;
  double by = 0.0;
  if (ss >> a >> b && !(ss >> extra) && parse_real(a, bx) && parse_real(b, by)) return VectorField::constant({bx, by});
  throw ConfigError("unrecognized beta specification '" + spec + "'", 0);
}

}  // namespace

std::vector<RunPlan> ExperimentConfig::runs() const {
  const std::size_t n = std::max({nx.size(), layers.size(), counts.size()});
  std::vector<RunPlan> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    RunPlan r;
    r.nx = nx[nx.size() == 1 ? 0 : k];
    r.layers = layers[layers.size() == 1 ? 0 : k];
    r.count = counts[counts.size() == 1 ? 0 : k];
    r.nf = nf ? *nf : fine_cells / r.nx;
    out.push_back(r);
  }
  return out;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  return parse_config_text(ss.str(), parent.empty() ? "." : parent.string());
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  std::map<std::string, std::pair<std::string, int>> kv;
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + body + "'", line);
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!kKnownKeys.count(key)) throw ConfigError("unknown key '" + key + "'", line);
    if (kv.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line);
    kv[key] = {value, line};
    cfg.entries.emplace_back(key, value);
  }

  auto line_of = [&](const std::string& key) { return kv.count(key) ? kv.at(key).second : 0; };

  if (!kv.count("example")) throw ConfigError("missing required keys: example", 0);
  cfg.example = kv["example"].first;
  const bool custom = cfg.example == "custom";
  if (!custom && cfg.example != "example1" && cfg.example != "example2") {
    throw ConfigError("example must be example1, example2 or custom, got '" + cfg.example + "'", line_of("example"));
  }
  if (custom) {
    std::vector<std::string> missing;
    for (const char* k : {"kappa", "beta", "source", "H", "N_ov", "N_b"}) {
      if (!kv.count(k)) missing.emplace_back(k);
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw ConfigError("missing required keys for a custom example: " + list, 0);
    }
  }
  if (kv.count("kappa")) cfg.kappa = kv["kappa"].first;
  if (kv.count("beta")) cfg.beta = kv["beta"].first;
  if (kv.count("source")) cfg.source = kv["source"].first;

  const std::string h_text = kv.count("H") ? kv["H"].first : "1/20";
  for (const auto& item : split_list(h_text)) cfg.nx.push_back(coarse_count(item, line_of("H")));
  const std::string ov_text = kv.count("N_ov") ? kv["N_ov"].first : "3";
  for (const auto& item : split_list(ov_text)) cfg.layers.push_back(positive_integer(item, "N_ov", line_of("N_ov")));
  const std::string nb_text = kv.count("N_b") ? kv["N_b"].first : "5";
  for (const auto& item : split_list(nb_text)) cfg.counts.push_back(positive_integer(item, "N_b", line_of("N_b")));

  const std::size_t n = std::max({cfg.nx.size(), cfg.layers.size(), cfg.counts.size()});
  auto check_len = [&](std::size_t size, const std::string& key) {
    if (size != 1 && size != n) {
      throw ConfigError(key + " lists " + std::to_string(size) + " values but the sweep has " + std::to_string(n) +
                            " runs",
                        line_of(key));
    }
  };
  check_len(cfg.nx.size(), "H");
  check_len(cfg.layers.size(), "N_ov");
  check_len(cfg.counts.size(), "N_b");

  if (kv.count("fine_cells")) cfg.fine_cells = positive_integer(kv["fine_cells"].first, "fine_cells", line_of("fine_cells"));
  if (kv.count("n_f")) {
    if (kv.count("fine_cells")) throw ConfigError("give either n_f or fine_cells, not both", line_of("n_f"));
    if (cfg.nx.size() != 1) {
      throw ConfigError("n_f with several H values would change the fine mesh; use fine_cells", line_of("n_f"));
    }
    cfg.nf = positive_integer(kv["n_f"].first, "n_f", line_of("n_f"));
  } else {
    for (Index nx : cfg.nx) {
      if (cfg.fine_cells % nx != 0) {
        throw ConfigError("fine_cells = " + std::to_string(cfg.fine_cells) + " is not divisible by 1/H = " +
                              std::to_string(nx),
                          line_of(kv.count("fine_cells") ? "fine_cells" : "H"));
      }
    }
  }
  if (kv.count("output")) cfg.output = kv["output"].first;
  if (kv.count("threads")) {
    long long t = 0;
    if (!parse_integer(kv["threads"].first, t) || t < 0) {
      throw ConfigError("threads must be a nonnegative integer", line_of("threads"));
    }
    cfg.threads = static_cast<int>(t);
  }

  // Validate field specifications early so errors carry their line.
  auto validate = [&](const char* key, auto&& build) {
    if (!kv.count(key)) return;
    try {
      (void)build(kv[key].first);
    } catch (const Error& e) {
      throw ConfigError(e.what(), line_of(key));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), line_of(key));
    }
  };
  validate("kappa", [&](const std::string& v) { return scalar_spec(v, cfg, "kappa"); });
  validate("beta", [&](const std::string& v) { return vector_spec(v, cfg); });
  validate("source", [&](const std::string& v) { return scalar_spec(v, cfg, "source"); });
  return cfg;
}

Coefficients make_coefficients(const ExperimentConfig& cfg) {
  Coefficients c = cfg.example == "example2" ? library::example2() : library::example1();
  if (cfg.kappa) c.kappa = scalar_spec(*cfg.kappa, cfg, "kappa");
  if (cfg.beta) c.beta = vector_spec(*cfg.beta, cfg);
  if (cfg.source) c.source = scalar_spec(*cfg.source, cfg, "source");
  return c;
}

}  // namespace cemms
