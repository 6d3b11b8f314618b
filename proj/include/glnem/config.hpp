#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "glnem/model.hpp"
#include "glnem/sampler.hpp"
#include "glnem/selection.hpp"
#include "glnem/simulate.hpp"
#include "glnem/ssibp_prior.hpp"

namespace glnem {

// Flat key=value text with dotted keys. Blank lines and lines starting with
// '#' are ignored; later assignments override earlier ones.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;
  std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const;

  // Throws ConfigError naming every key not in `known`.
  void check_known(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> entries_;
};

// Every key the CLI understands.
const std::set<std::string>& known_config_keys();

ModelSpec model_spec_from(const Config& cfg);
// Hyperparameters with n-dependent defaults resolved.
HyperParams hyper_from(const Config& cfg, int n);
SamplerConfig sampler_from(const Config& cfg);
SelectionOptions selection_from(const Config& cfg);
SimConfig sim_config_from(const Config& cfg);

}  // namespace glnem
