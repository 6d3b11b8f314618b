#include "glnem/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "glnem/errors.hpp"

namespace glnem {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    out.push_back(cell.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

std::string data_error(const std::string& path, int line, const std::string& what) {
  return path + ":" + std::to_string(line) + ": " + what;
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    for (const std::string& cell : split_csv(line)) {
      double v = 0.0;
      if (!parse_number(cell, v)) throw DataError(data_error(path, lineno, "not a number: '" + cell + "'"));
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(data_error(path, lineno, "ragged row"));
    }
    rows.push_back(std::move(row));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw DataError(path + ": empty matrix");
  if (static_cast<Eigen::Index>(rows.front().size()) != n) throw DataError(path + ": matrix is not square");
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_matrix(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt(m(i, j));
    out << '\n';
  }
}

NetworkData load_edge_csv(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  struct Row {
    int i, j;
    std::vector<double> values;  // y, x1..xp
    int line;
  };
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  int width = -1;
  int max_id = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const std::vector<std::string> cells = split_csv(line);
    std::vector<double> v(cells.size());
    bool numeric = true;
    for (std::size_t c = 0; c < cells.size(); ++c) numeric = numeric && parse_number(cells[c], v[c]);
    if (!numeric) {
      if (rows.empty() && width < 0) {
        width = static_cast<int>(cells.size());  // header
        continue;
      }
      throw DataError(data_error(path, lineno, "non-numeric field"));
    }
    if (width < 0) width = static_cast<int>(cells.size());
    if (static_cast<int>(cells.size()) != width) throw DataError(data_error(path, lineno, "wrong number of fields"));
    if (width < 3) throw DataError(data_error(path, lineno, "need at least i,j,y"));
    if (v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]) || v[0] < 0 || v[1] < 0) {
      throw DataError(data_error(path, lineno, "node ids must be non-negative integers"));
    }
    Row r{static_cast<int>(v[0]), static_cast<int>(v[1]), std::vector<double>(v.begin() + 2, v.end()), lineno};
    if (r.i > r.j) std::swap(r.i, r.j);
    max_id = std::max(max_id, r.j);
    rows.push_back(std::move(r));
  }
  const int n = options.nodes > 0 ? options.nodes : max_id + 1;
  if (n <= 0) throw DataError(path + ": no dyads");
  const int p = width - 3;
  NetworkData data;
  data.y = Eigen::MatrixXd::Zero(n, n);
  data.x.assign(p, Eigen::MatrixXd::Zero(n, n));
  MaskMatrix mask = MaskMatrix::Constant(n, n, options.unlisted_zero);
  std::set<std::pair<int, int>> seen;
  bool any_diagonal = false;
  for (const Row& r : rows) {
    if (r.j >= n) throw DataError(data_error(path, r.line, "node id out of range"));
    if (!seen.insert({r.i, r.j}).second) {
      throw DataError(data_error(path, r.line, "duplicate dyad (" + std::to_string(r.i) + ", " + std::to_string(r.j) + ")"));
    }
    any_diagonal = any_diagonal || r.i == r.j;
    data.y(r.i, r.j) = data.y(r.j, r.i) = r.values[0];
    for (int k = 0; k < p; ++k) data.x[k](r.i, r.j) = data.x[k](r.j, r.i) = r.values[k + 1];
    mask(r.i, r.j) = mask(r.j, r.i) = true;
  }
  data.diagonal_observed = any_diagonal;
  if (!any_diagonal) {
    for (int i = 0; i < n; ++i) mask(i, i) = true;  // irrelevant when the diagonal is unobserved
  }
  if (!mask.all()) data.mask = std::move(mask);
  data.validate(0.0);
  return data;
}

NetworkData load_dense_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  const fs::path base = fs::path(path).parent_path();
  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw DataError(data_error(path, lineno, "expected key=value"));
    const std::string key = line.substr(0, eq);
    if (!entries.emplace(key, line.substr(eq + 1)).second) {
      throw DataError(data_error(path, lineno, "duplicate key '" + key + "'"));
    }
  }
  auto resolve = [&](const std::string& rel) { return (base / rel).string(); };
  if (!entries.count("y")) throw DataError(path + ": manifest has no 'y' entry");
  NetworkData data;
  data.y = read_matrix(resolve(entries.at("y")));
  for (int k = 1;; ++k) {
    const auto it = entries.find("x" + std::to_string(k));
    if (it == entries.end()) break;
    data.x.push_back(read_matrix(resolve(it->second)));
  }
  for (const auto& [k, v] : entries) {
    const bool known = k == "y" || k == "mask" || k == "diagonal_observed" ||
                       (k.size() > 1 && k[0] == 'x' && std::stoul(k.substr(1)) <= data.x.size());
    if (!known) throw DataError(path + ": unknown or out-of-sequence manifest key '" + k + "'");
  }
  if (entries.count("diagonal_observed")) {
    const std::string& v = entries.at("diagonal_observed");
    if (v == "true" || v == "1") data.diagonal_observed = true;
    else if (v == "false" || v == "0") data.diagonal_observed = false;
    else throw DataError(path + ": diagonal_observed must be true or false");
  }
  if (entries.count("mask")) {
    const Eigen::MatrixXd m = read_matrix(resolve(entries.at("mask")));
    data.mask = (m.array() != 0.0).matrix();
  }
  data.validate(1e-12);
  return data;
}

}  // namespace

NetworkFormat parse_network_format(const std::string& name) {
  if (name == "edge-csv") return NetworkFormat::EdgeCsv;
  if (name == "dense-csv") return NetworkFormat::DenseCsv;
  throw ConfigError("unknown network format '" + name + "' (expected edge-csv or dense-csv)");
}

NetworkData load_network(const std::string& path, NetworkFormat format, const LoadOptions& options) {
  return format == NetworkFormat::EdgeCsv ? load_edge_csv(path, options) : load_dense_csv(path);
}

void save_network(const NetworkData& data, const std::string& path, NetworkFormat format) {
  data.validate();
  if (format == NetworkFormat::EdgeCsv) {
    std::ofstream out = open_out(path);
    out << "i,j,y";
    for (int k = 0; k < data.covariates(); ++k) out << ",x" << (k + 1);
    out << '\n';
    for (const Dyad& dy : observed_dyads(data)) {
      out << dy.i << ',' << dy.j << ',' << fmt(data.y(dy.i, dy.j));
      for (int k = 0; k < data.covariates(); ++k) out << ',' << fmt(data.x[k](dy.i, dy.j));
      out << '\n';
    }
    return;
  }
  const fs::path manifest(path);
  const fs::path dir = manifest.parent_path();
  const std::string stem = manifest.stem().string();
  std::ofstream out = open_out(path);
  auto emit = [&](const std::string& key, const Eigen::MatrixXd& m) {
    const std::string file = stem + "_" + key + ".csv";
    write_matrix(m, (dir / file).string());
    out << key << '=' << file << '\n';
  };
  emit("y", data.y);
  for (int k = 0; k < data.covariates(); ++k) emit("x" + std::to_string(k + 1), data.x[k]);
  if (data.mask) emit("mask", data.mask->cast<double>());
  out << "diagonal_observed=" << (data.diagonal_observed ? "true" : "false") << '\n';
}

void write_draws_csv(const DrawStore& draws, const std::string& path) {
  std::ofstream out = open_out(path);
  const int p = draws.covariates;
  const int d = draws.dims();
  const int n = draws.nodes;
  out << "chain";
  for (int k = 0; k < p; ++k) out << ",beta." << k;
  for (int h = 0; h < d; ++h) out << ",lambda." << h;
  for (int h = 0; h < d; ++h) out << ",Z." << h;
  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < d; ++h) out << ",U." << i << '.' << h;
  }
  out << ",phi,power,loglik,logpost,accept_stat,step_size,tree_depth,divergent\n";
  for (const Draw& dr : draws.draws) {
    out << dr.chain;
    for (int k = 0; k < p; ++k) out << ',' << fmt(dr.beta[k]);
    for (int h = 0; h < d; ++h) out << ',' << fmt(dr.lambda[h]);
    for (int h = 0; h < d; ++h) out << ',' << dr.z[h];
    for (int i = 0; i < n; ++i) {
      for (int h = 0; h < d; ++h) out << ',' << fmt(dr.u(i, h));
    }
    out << ',' << fmt(dr.phi) << ',' << fmt(dr.power) << ',' << fmt(dr.loglik) << ',' << fmt(dr.logpost) << ','
        << fmt(dr.accept_stat) << ',' << fmt(dr.step_size) << ',' << dr.tree_depth << ',' << (dr.divergent ? 1 : 0)
        << '\n';
  }
}

DrawStore read_draws_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty draws file");
  const std::vector<std::string> header = split_csv(line);
  int p = 0, d = 0, zc = 0, max_i = -1, uc = 0;
  for (const std::string& h : header) {
    if (h.rfind("beta.", 0) == 0) ++p;
    else if (h.rfind("lambda.", 0) == 0) ++d;
    else if (h.rfind("Z.", 0) == 0) ++zc;
    else if (h.rfind("U.", 0) == 0) {
      ++uc;
      max_i = std::max(max_i, std::stoi(h.substr(2, h.find('.', 2) - 2)));
    }
  }
  if (zc != d) throw DataError(path + ": lambda and Z column counts differ");
  const int n = d > 0 ? max_i + 1 : 0;
  if (uc != n * d) throw DataError(path + ": U columns do not form an n x d matrix");
  const std::size_t expected = 1 + p + 2 * d + static_cast<std::size_t>(n) * d + 8;
  if (header.size() != expected) throw DataError(path + ": unexpected header layout");

  DrawStore store;
  store.covariates = p;
  store.nodes = n;
  store.hyper.d = d;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != expected) throw DataError(data_error(path, lineno, "wrong number of fields"));
    std::vector<double> v(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_number(cells[c], v[c])) throw DataError(data_error(path, lineno, "not a number: '" + cells[c] + "'"));
    }
    Draw dr;
    std::size_t c = 0;
    dr.chain = static_cast<int>(v[c++]);
    dr.beta.resize(p);
    for (int k = 0; k < p; ++k) dr.beta[k] = v[c++];
    dr.lambda.resize(d);
    for (int h = 0; h < d; ++h) dr.lambda[h] = v[c++];
    dr.z.resize(d);
    for (int h = 0; h < d; ++h) dr.z[h] = static_cast<int>(v[c++]);
    dr.u.resize(n, d);
    for (int i = 0; i < n; ++i) {
      for (int h = 0; h < d; ++h) dr.u(i, h) = v[c++];
    }
    dr.phi = v[c++];
    dr.power = v[c++];
    dr.loglik = v[c++];
    dr.logpost = v[c++];
    dr.accept_stat = v[c++];
    dr.step_size = v[c++];
    dr.tree_depth = static_cast<int>(v[c++]);
    dr.divergent = v[c++] != 0.0;
    store.draws.push_back(std::move(dr));
  }
  if (store.draws.empty()) throw DataError(path + ": no draws");
  return store;
}

void write_trace_csv(const DrawStore& draws, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "iteration,chain,loglik,logpost,accept_stat,step_size,tree_depth,divergent,active\n";
  std::map<int, int> per_chain;
  for (const Draw& dr : draws.draws) {
    int active = 0;
    for (int v : dr.z) active += v;
    out << per_chain[dr.chain]++ << ',' << dr.chain << ',' << fmt(dr.loglik) << ',' << fmt(dr.logpost) << ','
        << fmt(dr.accept_stat) << ',' << fmt(dr.step_size) << ',' << dr.tree_depth << ',' << (dr.divergent ? 1 : 0)
        << ',' << active << '\n';
  }
}

namespace {

nlohmann::json interval_json(const Interval& iv) {
  return {{"mean", iv.mean}, {"sd", iv.sd}, {"q2.5", iv.lower}, {"q50", iv.median}, {"q97.5", iv.upper}};
}

}  // namespace

void write_summary_json(const Summary& summary, const DrawStore& draws,
                        const std::map<std::string, std::string>& provenance, const std::string& path) {
  using nlohmann::json;
  json j;
  j["version"] = version_string();
  j["family"] = std::string(to_string(draws.spec.family.kind));
  j["link"] = std::string(to_string(draws.spec.link));
  j["lambda_prior"] = draws.spec.lambda_prior == LambdaPrior::SpikeSlabIbp ? "ssibp" : "gaussian";
  j["hyper"] = {{"d", draws.hyper.d},
                {"a", draws.hyper.a},
                {"kappa", draws.hyper.kappa},
                {"b", draws.hyper.b_slab},
                {"v0", draws.hyper.v0},
                {"sigma_beta", draws.hyper.sigma_beta},
                {"lambda_variance", draws.hyper.lambda_variance}};
  const SamplerConfig& sc = draws.config;
  j["sampler"] = {{"warmup", sc.warmup},
                  {"draws", sc.draws},
                  {"chains", sc.chains},
                  {"seed", sc.seed},
                  {"thin", sc.thin},
                  {"init_iterations", sc.init_iterations},
                  {"trajectory", sc.hmc.kind == TrajectoryKind::Nuts ? "nuts" : "static"},
                  {"max_depth", sc.hmc.max_depth},
                  {"target_accept", sc.hmc.target_accept}};
  j["config"] = provenance;
  j["nodes"] = draws.nodes;
  j["dyads"] = draws.dyads.size();
  j["draws"] = draws.size();
  json beta = json::array();
  for (const Interval& iv : summary.beta) beta.push_back(interval_json(iv));
  j["beta"] = beta;
  json lambda = json::array();
  for (const Interval& iv : summary.lambda) lambda.push_back(interval_json(iv));
  j["lambda"] = lambda;
  if (summary.has_phi) j["phi"] = interval_json(summary.phi);
  if (summary.has_power) j["power"] = interval_json(summary.power);
  j["inclusion_probabilities"] = std::vector<double>(summary.inclusion.data(),
                                                     summary.inclusion.data() + summary.inclusion.size());
  j["dimension"] = {{"pmf", std::vector<double>(summary.dimension.pmf.data(),
                                                summary.dimension.pmf.data() + summary.dimension.pmf.size())},
                    {"mode", summary.dimension.mode}};
  j["reference_draw"] = summary.reference_index;
  j["beta_ess"] = std::vector<double>(summary.beta_ess.data(), summary.beta_ess.data() + summary.beta_ess.size());
  json u = json::array();
  for (Eigen::Index i = 0; i < summary.u_mean.rows(); ++i) {
    std::vector<double> row(summary.u_mean.cols());
    for (Eigen::Index h = 0; h < summary.u_mean.cols(); ++h) row[h] = summary.u_mean(i, h);
    u.push_back(row);
  }
  j["u_frechet_mean"] = u;
  json chains = json::array();
  for (const ChainDiagnostics& c : draws.chains) {
    chains.push_back({{"chain", c.chain},
                      {"step_size", c.step_size},
                      {"init_divergences", c.init_divergences},
                      {"warmup_divergences", c.warmup_divergences},
                      {"divergences", c.divergences},
                      {"mean_accept", c.mean_accept},
                      {"mean_tree_depth", c.mean_tree_depth},
                      {"max_depth_hits", c.max_depth_hits}});
  }
  j["chains"] = chains;
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_dimension_csv(const Summary& summary, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "dimension,probability\n";
  for (Eigen::Index k = 0; k < summary.dimension.pmf.size(); ++k) out << k << ',' << fmt(summary.dimension.pmf[k]) << '\n';
}

void write_inclusion_csv(const Summary& summary, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "dimension,inclusion\n";
  for (Eigen::Index h = 0; h < summary.inclusion.size(); ++h) out << h << ',' << fmt(summary.inclusion[h]) << '\n';
}

void write_criteria_csv(const CriterionReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "d,loglik_at_estimate,aic,bic,dic,waic" << (report.has_cv ? ",cv_mean,cv_se" : "") << '\n';
  for (const CriterionRow& r : report.rows) {
    out << r.d << ',' << fmt(r.loglik_at_estimate) << ',' << fmt(r.aic) << ',' << fmt(r.bic) << ',' << fmt(r.dic)
        << ',' << fmt(r.waic);
    if (report.has_cv) out << ',' << fmt(r.cv_mean) << ',' << fmt(r.cv_se);
    out << '\n';
  }
  out << "# selected: aic=" << report.aic_choice << " bic=" << report.bic_choice << " dic=" << report.dic_choice
      << " waic=" << report.waic_choice;
  if (report.has_cv) out << " cv_best=" << report.cv_best << " cv_1se=" << report.cv_one_se;
  out << '\n';
}

void write_truth_json(const SimTruth& truth, const std::string& path) {
  using nlohmann::json;
  json j;
  j["family"] = std::string(to_string(truth.family.kind));
  j["link"] = std::string(to_string(truth.link));
  j["d0"] = truth.d0;
  j["beta0"] = std::vector<double>(truth.beta0.data(), truth.beta0.data() + truth.beta0.size());
  j["lambda0"] = std::vector<double>(truth.lambda0.data(), truth.lambda0.data() + truth.lambda0.size());
  j["phi"] = truth.aux.phi;
  j["power"] = truth.aux.power;
  if (truth.zero_inflation_pi) j["zero_inflation"] = *truth.zero_inflation_pi;
  json u = json::array();
  for (Eigen::Index i = 0; i < truth.u0.rows(); ++i) {
    std::vector<double> row(truth.u0.cols());
    for (Eigen::Index h = 0; h < truth.u0.cols(); ++h) row[h] = truth.u0(i, h);
    u.push_back(row);
  }
  j["u0"] = u;
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_gof_csv(const GofReport& report, const std::string& statistic, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "kind,draw,statistic,value\n";
  out << "observed,," << statistic << ',' << fmt(report.observed) << '\n';
  for (std::size_t k = 0; k < report.predictive.size(); ++k) {
    out << "predictive," << report.draw_index[k] << ',' << statistic << ',' << fmt(report.predictive[k]) << '\n';
  }
}

void write_degree_csv(const DegreePredictive& degrees, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "kind,draw,node,degree\n";
  for (Eigen::Index i = 0; i < degrees.observed.size(); ++i) {
    out << "observed,," << i << ',' << fmt(degrees.observed[i]) << '\n';
  }
  for (std::size_t s = 0; s < degrees.predictive.size(); ++s) {
    for (Eigen::Index i = 0; i < degrees.predictive[s].size(); ++i) {
      out << "predictive," << degrees.draw_index[s] << ',' << i << ',' << fmt(degrees.predictive[s][i]) << '\n';
    }
  }
}

void write_metrics_csv(const std::vector<RecoveryMetrics>& rows, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "replicate,trace_correlation,beta_error,latent_error,lambda_error\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << r << ',' << fmt(rows[r].trace_correlation) << ',' << fmt(rows[r].beta_error) << ','
        << fmt(rows[r].latent_error) << ',' << fmt(rows[r].lambda_error) << '\n';
  }
}

std::string version_string() {
#ifdef GLNEM_VERSION
  return GLNEM_VERSION;
#else
  return "unknown";
#endif
}

}  // namespace glnem
