#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "glnem/config.hpp"
#include "glnem/errors.hpp"
#include "glnem/fit.hpp"
#include "glnem/gof.hpp"
#include "glnem/io.hpp"
#include "glnem/parallel.hpp"
#include "glnem/postprocess.hpp"
#include "glnem/selection.hpp"
#include "glnem/simulate.hpp"

namespace fs = std::filesystem;
using namespace glnem;

namespace {

enum ExitCode { Ok = 0, ConfigFailure = 2, DataFailure = 3, NumericFailure = 4 };

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::optional<std::string> out;
};

Config load_config(const Options& opt) {
  Config cfg = opt.config_path.empty() ? Config() : Config::load(opt.config_path);
  for (const std::string& kv : opt.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opt.seed) {
    cfg.set("sampler.seed", std::to_string(*opt.seed));
    cfg.set("simulate.seed", std::to_string(*opt.seed));
  }
  if (opt.chains) cfg.set("sampler.chains", std::to_string(*opt.chains));
  if (opt.out) cfg.set("output.dir", *opt.out);
  cfg.check_known(known_config_keys());
  return cfg;
}

std::string out_dir(const Config& cfg) {
  const std::string dir = cfg.get_string("output.dir", "glnem_out");
  fs::create_directories(dir);
  return dir;
}

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

NetworkData load_data(const Config& cfg) {
  if (!cfg.has("data.path")) throw ConfigError("data.path is required");
  LoadOptions lo;
  lo.nodes = cfg.get_int("data.nodes", 0);
  const std::string unlisted = cfg.get_string("data.unlisted", "missing");
  if (unlisted == "zero") lo.unlisted_zero = true;
  else if (unlisted != "missing") throw ConfigError("data.unlisted must be 'missing' or 'zero'");
  NetworkData data = load_network(cfg.get_string("data.path", ""),
                                  parse_network_format(cfg.get_string("data.format", "edge-csv")), lo);
  if (cfg.has("data.diagonal_observed")) data.diagonal_observed = cfg.get_bool("data.diagonal_observed", false);
  return data;
}

// Draws read back from CSV carry only shapes; the model comes from the config.
DrawStore load_draws(const Config& cfg, const std::string& key, const NetworkData* data) {
  DrawStore draws = read_draws_csv(cfg.get_string(key, ""));
  draws.spec = model_spec_from(cfg);
  const int d = draws.hyper.d;
  draws.hyper = hyper_from(cfg, draws.nodes > 0 ? draws.nodes : 1);
  draws.hyper.d = d;
  if (data) {
    if (d > 0 && draws.nodes != data->nodes()) throw DataError("draws and data disagree on the node count");
    draws.nodes = data->nodes();
    draws.dyads = observed_dyads(*data);
  }
  return draws;
}

void write_fit_outputs(const Config& cfg, const DrawStore& draws, const AlignedDraws& aligned, const Summary& summary,
                       const std::string& dir) {
  std::map<std::string, std::string> provenance = cfg.entries();
  provenance["sampler.seed"] = std::to_string(draws.config.seed);
  write_draws_csv(draws, join(dir, "draws.csv"));
  write_draws_csv(aligned.draws, join(dir, "aligned_draws.csv"));
  write_trace_csv(draws, join(dir, "trace.csv"));
  write_summary_json(summary, aligned.draws, provenance, join(dir, "summary.json"));
  write_dimension_csv(summary, join(dir, "dimension.csv"));
  write_inclusion_csv(summary, join(dir, "inclusion.csv"));
}

int cmd_simulate(const Config& cfg) {
  const SimConfig sim = sim_config_from(cfg);
  const int replicates = cfg.get_int("simulate.replicates", 1);
  if (replicates < 1) throw ConfigError("simulate.replicates must be positive");
  const std::uint64_t seed = cfg.get_u64("simulate.seed", 1);
  const NetworkFormat format = parse_network_format(cfg.get_string("simulate.format", "dense-csv"));
  const bool fit = cfg.get_bool("simulate.fit", false);
  const std::string dir = out_dir(cfg);
  std::vector<RecoveryMetrics> metrics(replicates);
  std::vector<int> modes(replicates, 0);

  ModelSpec spec;
  SamplerConfig sampler;
  if (fit) {
    spec = model_spec_from(cfg);
    sampler = sampler_from(cfg);
  }
  const int threads = fit ? 1 : default_thread_count();
  // Replicates own their RNG streams; chains inside a fit are parallel instead.
  parallel_for(replicates, fit ? 1 : threads, [&](int r) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
    const Simulated s = sim.zero_inflation_pi ? generate_zip(sim, *sim.zero_inflation_pi, rng) : generate_glnem(sim, rng);
    const std::string rep = join(dir, "replicate_" + std::to_string(r));
    save_network(s.data, join(rep, format == NetworkFormat::EdgeCsv ? "network.csv" : "network.manifest"), format);
    write_truth_json(s.truth, join(rep, "truth.json"));
    if (!fit) return;
    const FitResult res = fit_model(s.data, spec, hyper_from(cfg, s.data.nodes()), sampler);
    write_fit_outputs(cfg, res.draws, res.aligned, res.summary, rep);
    metrics[r] = recovery_metrics(res.aligned, s.truth);
    modes[r] = res.summary.dimension.mode;
  });
  if (fit) {
    write_metrics_csv(metrics, join(dir, "metrics.csv"));
    for (int r = 0; r < replicates; ++r) {
      std::cout << "replicate " << r << ": mode " << modes[r] << ", trace correlation "
                << metrics[r].trace_correlation << '\n';
    }
  }
  std::cout << "wrote " << replicates << " replicate(s) to " << dir << '\n';
  return Ok;
}

int cmd_fit(const Config& cfg) {
  const NetworkData data = load_data(cfg);
  const FitResult res = fit_model(data, model_spec_from(cfg), hyper_from(cfg, data.nodes()), sampler_from(cfg));
  const std::string dir = out_dir(cfg);
  write_fit_outputs(cfg, res.draws, res.aligned, res.summary, dir);
  std::cout << "posterior dimension mode " << res.summary.dimension.mode << "; outputs in " << dir << '\n';
  return Ok;
}

int cmd_select(const Config& cfg) {
  const NetworkData data = load_data(cfg);
  const CriterionReport report = select_dimension(data, model_spec_from(cfg), hyper_from(cfg, data.nodes()),
                                                  sampler_from(cfg), selection_from(cfg));
  const std::string dir = out_dir(cfg);
  write_criteria_csv(report, join(dir, "criteria.csv"));
  std::cout << "aic " << report.aic_choice << ", bic " << report.bic_choice << ", dic " << report.dic_choice
            << ", waic " << report.waic_choice;
  if (report.has_cv) std::cout << ", cv " << report.cv_best << " (1se " << report.cv_one_se << ")";
  std::cout << '\n';
  return Ok;
}

int cmd_gof(const Config& cfg) {
  const NetworkData data = load_data(cfg);
  DrawStore draws;
  if (cfg.has("gof.draws")) {
    draws = load_draws(cfg, "gof.draws", &data);
  } else {
    draws = fit_model(data, model_spec_from(cfg), hyper_from(cfg, data.nodes()), sampler_from(cfg)).draws;
  }
  const int subsample = cfg.get_int("gof.subsample", 500);
  const std::string degree = cfg.get_string("gof.degree", draws.spec.family.kind == FamilyKind::Bernoulli ? "binary" : "weighted");
  DegreeMode mode;
  if (degree == "binary") mode = DegreeMode::Binary;
  else if (degree == "weighted") mode = DegreeMode::Weighted;
  else throw ConfigError("gof.degree must be 'binary' or 'weighted'");
  Rng rng = make_rng(cfg.get_u64("gof.seed", 1));
  const GofReport trans = posterior_predictive(draws, data, transitivity, subsample, rng);
  const DegreePredictive deg = posterior_predictive_degrees(draws, data, mode, subsample, rng);
  const std::string dir = out_dir(cfg);
  write_gof_csv(trans, "transitivity", join(dir, "gof_transitivity.csv"));
  write_degree_csv(deg, join(dir, "gof_degrees.csv"));
  std::cout << "transitivity observed " << trans.observed << ", predictive 95% [" << trans.lower << ", "
            << trans.upper << "]\n";
  return Ok;
}

int cmd_postprocess(const Config& cfg) {
  if (!cfg.has("postprocess.draws")) throw ConfigError("postprocess.draws is required");
  const DrawStore draws = load_draws(cfg, "postprocess.draws", nullptr);
  const AlignedDraws aligned = align_draws(draws);
  const Summary summary = summarize(aligned);
  const std::string dir = out_dir(cfg);
  std::map<std::string, std::string> provenance = cfg.entries();
  write_draws_csv(aligned.draws, join(dir, "aligned_draws.csv"));
  write_summary_json(summary, aligned.draws, provenance, join(dir, "summary.json"));
  write_dimension_csv(summary, join(dir, "dimension.csv"));
  write_inclusion_csv(summary, join(dir, "inclusion.csv"));
  std::cout << "posterior dimension mode " << summary.dimension.mode << '\n';
  return Ok;
}

}  // namespace

int main(int argc, char** argv) {
  glnem::retain_freed_heap();
  CLI::App app{"Generalized linear network eigenmodels with automatic dimension selection"};
  app.require_subcommand(1, 1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "key=value configuration file");
    sub->add_option("--set", opt.overrides, "override a configuration key (key=value)");
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--chains", opt.chains, "number of chains");
    sub->add_option("--out", opt.out, "output directory");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "generate networks (and optionally fit them)");
  CLI::App* fit = app.add_subcommand("fit", "fit the SS-IBP model");
  CLI::App* select = app.add_subcommand("select", "fixed-dimension grid with information criteria and CV");
  CLI::App* gof = app.add_subcommand("gof", "posterior predictive checks");
  CLI::App* post = app.add_subcommand("postprocess", "align and summarize a draws file");
  for (CLI::App* sub : {simulate, fit, select, gof, post}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Ok : ConfigFailure;
  }

  try {
    const Config cfg = load_config(opt);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (fit->parsed()) return cmd_fit(cfg);
    if (select->parsed()) return cmd_select(cfg);
    if (gof->parsed()) return cmd_gof(cfg);
    return cmd_postprocess(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return DataFailure;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return NumericFailure;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return DataFailure;
  }
}
