#include "glnem/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "glnem/errors.hpp"

namespace glnem {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& source) {
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    cfg.entries_[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const long long v = to_integer(key, it->second);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key + ": integer out of range");
  return static_cast<int>(v);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::uint64_t out = 0;
  const std::string& v = it->second;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : to_double(key, it->second);
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return to_double(key, it->second);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + it->second + "'");
}

std::vector<int> Config::get_int_list(const std::string& key, const std::vector<int>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<int> out;
  for (const std::string& item : split_list(it->second)) {
    // Ranges such as 1:6 expand inclusively.
    const std::size_t colon = item.find(':');
    if (colon != std::string::npos) {
      const long long lo = to_integer(key, trim(item.substr(0, colon)));
      const long long hi = to_integer(key, trim(item.substr(colon + 1)));
      if (hi < lo) throw ConfigError(key + ": empty range '" + item + "'");
      for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<int>(v));
    } else {
      out.push_back(static_cast<int>(to_integer(key, item)));
    }
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  for (const std::string& item : split_list(it->second)) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

void Config::check_known(const std::set<std::string>& known) const {
  std::string unknown;
  for (const auto& [k, v] : entries_) {
    if (!known.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  }
  if (!unknown.empty()) throw ConfigError("unknown configuration keys: " + unknown);
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "model.family", "model.link", "model.phi", "model.power", "model.dispersion_known", "model.lambda_prior",
      "prior.d", "prior.a", "prior.kappa", "prior.b", "prior.v0", "prior.sigma_beta", "prior.lambda_variance",
      "sampler.warmup", "sampler.draws", "sampler.chains", "sampler.seed", "sampler.thin",
      "sampler.init_iterations", "sampler.init_radius", "sampler.max_init_divergent_fraction",
      "sampler.trajectory", "sampler.max_depth", "sampler.static_steps", "sampler.target_accept",
      "sampler.store_pointwise", "sampler.threads",
      "data.path", "data.format", "data.nodes", "data.unlisted", "data.diagonal_observed",
      "output.dir", "output.draws",
      "select.grid", "select.folds", "select.cv_seed",
      "gof.draws", "gof.subsample", "gof.degree", "gof.seed",
      "postprocess.draws",
      "simulate.n", "simulate.d0", "simulate.family", "simulate.link", "simulate.c", "simulate.phi",
      "simulate.power", "simulate.beta0", "simulate.zero_inflation", "simulate.replicates", "simulate.seed",
      "simulate.diagonal_observed", "simulate.format", "simulate.fit",
  };
  return keys;
}

ModelSpec model_spec_from(const Config& cfg) {
  ModelSpec spec;
  spec.family.kind = parse_family(cfg.get_string("model.family", "bernoulli"));
  spec.link = cfg.has("model.link") ? parse_link(cfg.get_string("model.link", "")) : canonical_link(spec.family.kind);
  spec.family.dispersion_known = cfg.get_bool("model.dispersion_known", false);
  spec.aux.phi = cfg.get_double("model.phi", 1.0);
  spec.aux.power = cfg.get_double("model.power", 1.5);
  const std::string prior = cfg.get_string("model.lambda_prior", "ssibp");
  if (prior == "ssibp") spec.lambda_prior = LambdaPrior::SpikeSlabIbp;
  else if (prior == "gaussian") spec.lambda_prior = LambdaPrior::FixedGaussian;
  else throw ConfigError("model.lambda_prior must be 'ssibp' or 'gaussian', got '" + prior + "'");
  spec.validate();
  return spec;
}

HyperParams hyper_from(const Config& cfg, int n) {
  const int d = cfg.get_int("prior.d", 8);
  if (d < 0) throw ConfigError("prior.d must be non-negative");
  HyperParams h = HyperParams::defaults(n, std::max(d, 1));
  h.d = d;
  h.a = cfg.get_double("prior.a", h.a);
  h.kappa = cfg.get_double("prior.kappa", h.kappa);
  h.b_slab = cfg.get_double("prior.b", h.b_slab);
  h.v0 = cfg.get_double("prior.v0", h.v0);
  h.sigma_beta = cfg.get_double("prior.sigma_beta", h.sigma_beta);
  h.lambda_variance = cfg.get_double("prior.lambda_variance", h.lambda_variance);
  h.validate();
  return h;
}

SamplerConfig sampler_from(const Config& cfg) {
  SamplerConfig s;
  s.warmup = cfg.get_int("sampler.warmup", s.warmup);
  s.draws = cfg.get_int("sampler.draws", s.draws);
  s.chains = cfg.get_int("sampler.chains", s.chains);
  s.seed = cfg.get_u64("sampler.seed", s.seed);
  s.thin = cfg.get_int("sampler.thin", s.thin);
  s.init_iterations = cfg.get_int("sampler.init_iterations", s.init_iterations);
  s.init_radius = cfg.get_double("sampler.init_radius", s.init_radius);
  s.max_init_divergent_fraction = cfg.get_double("sampler.max_init_divergent_fraction", s.max_init_divergent_fraction);
  const std::string traj = cfg.get_string("sampler.trajectory", "nuts");
  if (traj == "nuts") s.hmc.kind = TrajectoryKind::Nuts;
  else if (traj == "static") s.hmc.kind = TrajectoryKind::Static;
  else throw ConfigError("sampler.trajectory must be 'nuts' or 'static', got '" + traj + "'");
  s.hmc.max_depth = cfg.get_int("sampler.max_depth", s.hmc.max_depth);
  s.hmc.static_steps = cfg.get_int("sampler.static_steps", s.hmc.static_steps);
  s.hmc.target_accept = cfg.get_double("sampler.target_accept", s.hmc.target_accept);
  s.store_pointwise = cfg.get_bool("sampler.store_pointwise", s.store_pointwise);
  s.threads = cfg.get_int("sampler.threads", s.threads);
  s.validate();
  return s;
}

SelectionOptions selection_from(const Config& cfg) {
  SelectionOptions o;
  o.d_grid = cfg.get_int_list("select.grid", o.d_grid);
  o.folds = cfg.get_int("select.folds", o.folds);
  o.cv_seed = cfg.get_u64("select.cv_seed", o.cv_seed);
  o.threads = cfg.get_int("sampler.threads", 0);
  if (o.folds < 0 || o.folds == 1) throw ConfigError("select.folds must be 0 (off) or at least 2");
  return o;
}

SimConfig sim_config_from(const Config& cfg) {
  const FamilyKind family = parse_family(cfg.get_string("simulate.family", "bernoulli"));
  SimConfig s = SimConfig::defaults(family, cfg.get_int("simulate.n", 100), cfg.get_int("simulate.d0", 3));
  if (cfg.has("simulate.link")) s.link = parse_link(cfg.get_string("simulate.link", ""));
  s.c = cfg.get_double("simulate.c", s.c);
  s.aux.phi = cfg.get_double("simulate.phi", s.aux.phi);
  s.aux.power = cfg.get_double("simulate.power", s.aux.power);
  if (cfg.has("simulate.beta0")) {
    const std::vector<double> b = cfg.get_double_list("simulate.beta0", {});
    s.beta0 = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  s.zero_inflation_pi = cfg.get_optional_double("simulate.zero_inflation");
  s.diagonal_observed = cfg.get_bool("simulate.diagonal_observed", false);
  s.validate();
  return s;
}

}  // namespace glnem
