#include "glnem/hmc.hpp"

#include <cmath>
#include <limits>

#include "glnem/errors.hpp"
#include "glnem/special.hpp"

namespace glnem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool no_u_turn(const Eigen::VectorXd& p_sharp_minus, const Eigen::VectorXd& p_sharp_plus,
               const Eigen::VectorXd& rho) {
  return p_sharp_plus.dot(rho) > 0.0 && p_sharp_minus.dot(rho) > 0.0;
}

}  // namespace

bool evaluate(const LogDensityFn& fn, const Eigen::VectorXd& q, HmcPoint& point) {
  point.q = q;
  try {
    point.logp = fn(q, point.grad);
  } catch (const NumericError&) {
    point.logp = -kInf;
    return false;
  }
  if (!std::isfinite(point.logp) || !point.grad.allFinite()) {
    point.logp = -kInf;
    return false;
  }
  return true;
}

void DualAveraging::restart(double step_size) {
  mu_ = std::log(10.0 * step_size);
  counter_ = 0.0;
  s_bar_ = 0.0;
  x_bar_ = 0.0;
}

double DualAveraging::learn(double accept_stat) {
  counter_ += 1.0;
  accept_stat = std::min(1.0, accept_stat);
  const double eta = 1.0 / (counter_ + t0_);
  s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - accept_stat);
  const double x = mu_ - s_bar_ * std::sqrt(counter_) / gamma_;
  const double x_eta = std::pow(counter_, -kappa_);
  x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
  return std::exp(x);
}

void WindowedVariance::restart(int num_warmup, int dim) {
  num_warmup_ = num_warmup;
  init_buffer_ = 75;
  term_buffer_ = 50;
  base_window_ = 25;
  active_ = num_warmup >= 20;
  if (active_ && init_buffer_ + base_window_ + term_buffer_ > num_warmup) {
    init_buffer_ = static_cast<int>(0.15 * num_warmup);
    term_buffer_ = static_cast<int>(0.1 * num_warmup);
    base_window_ = num_warmup - (init_buffer_ + term_buffer_);
  }
  counter_ = 0;
  window_size_ = base_window_;
  next_window_end_ = init_buffer_ + window_size_ - 1;
  samples_ = 0;
  mean_ = Eigen::VectorXd::Zero(dim);
  m2_ = Eigen::VectorXd::Zero(dim);
}

bool WindowedVariance::in_window() const {
  return counter_ >= init_buffer_ && counter_ < num_warmup_ - term_buffer_ && counter_ != num_warmup_;
}

bool WindowedVariance::end_of_window() const {
  return counter_ == next_window_end_ && counter_ != num_warmup_;
}

void WindowedVariance::next_window() {
  if (next_window_end_ == num_warmup_ - term_buffer_ - 1) return;
  window_size_ *= 2;
  next_window_end_ = counter_ + window_size_;
  if (next_window_end_ != num_warmup_ - term_buffer_ - 1) {
    const int boundary = next_window_end_ + 2 * window_size_;
    if (boundary >= num_warmup_ - term_buffer_) next_window_end_ = num_warmup_ - term_buffer_ - 1;
  }
}

bool WindowedVariance::learn(const Eigen::VectorXd& q, Eigen::VectorXd& inv_metric) {
  if (!active_) return false;
  if (in_window()) {
    ++samples_;
    const Eigen::VectorXd delta = q - mean_;
    mean_ += delta / static_cast<double>(samples_);
    m2_ += delta.cwiseProduct(q - mean_);
  }
  if (end_of_window()) {
    next_window();
    const double n = static_cast<double>(samples_);
    if (samples_ > 1) {
      const Eigen::VectorXd var = m2_ / (n - 1.0);
      inv_metric = (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
    }
    samples_ = 0;
    mean_.setZero();
    m2_.setZero();
    ++counter_;
    return true;
  }
  ++counter_;
  return false;
}

HmcKernel::HmcKernel(int dim, HmcOptions options)
    : dim_(dim), options_(options), inv_metric_(Eigen::VectorXd::Ones(dim)), dual_(options.target_accept) {
  if (options_.max_depth < 1) throw ConfigError("HMC max tree depth must be at least 1");
  if (options_.static_steps < 0) throw ConfigError("HMC static step count must be non-negative");
  if (!(options_.target_accept > 0.0 && options_.target_accept < 1.0)) {
    throw ConfigError("HMC target acceptance must lie in (0, 1)");
  }
}

Eigen::VectorXd HmcKernel::draw_momentum(Rng& rng) const {
  Eigen::VectorXd p(dim_);
  for (int k = 0; k < dim_; ++k) p[k] = standard_normal(rng) / std::sqrt(inv_metric_[k]);
  return p;
}

double HmcKernel::kinetic(const Eigen::VectorXd& p) const {
  return 0.5 * p.cwiseProduct(inv_metric_).dot(p);
}

bool HmcKernel::leapfrog(const LogDensityFn& fn, Phase& z, double eps) const {
  z.p += 0.5 * eps * z.point.grad;
  const Eigen::VectorXd q = z.point.q + eps * inv_metric_.cwiseProduct(z.p);
  if (!evaluate(fn, q, z.point)) return false;
  z.p += 0.5 * eps * z.point.grad;
  return true;
}

HmcTransition HmcKernel::transition(const LogDensityFn& fn, HmcPoint& point, Rng& rng) {
  if (options_.kind == TrajectoryKind::Static) return static_transition(fn, point, rng);
  return nuts_transition(fn, point, rng);
}

HmcTransition HmcKernel::static_transition(const LogDensityFn& fn, HmcPoint& point, Rng& rng) {
  HmcTransition out;
  if (options_.static_steps == 0) {
    out.accept_stat = 1.0;
    return out;
  }
  Phase z{point, draw_momentum(rng)};
  const double h0 = hamiltonian(z);
  bool ok = true;
  for (int s = 0; s < options_.static_steps && ok; ++s) {
    ok = leapfrog(fn, z, step_size_);
    ++out.leapfrog_steps;
  }
  double h = ok ? hamiltonian(z) : kInf;
  if (std::isnan(h)) h = kInf;
  out.divergent = h - h0 > options_.max_delta_h;
  out.accept_stat = h0 - h > 0.0 ? 1.0 : std::exp(h0 - h);
  if (!out.divergent && uniform01(rng) < out.accept_stat) point = z.point;
  return out;
}

HmcTransition HmcKernel::nuts_transition(const LogDensityFn& fn, HmcPoint& point, Rng& rng) {
  HmcTransition out;
  Phase z{point, draw_momentum(rng)};
  Phase z_fwd = z;
  Phase z_bck = z;
  HmcPoint sample = point;
  Phase z_propose = z;

  Eigen::VectorXd p_fwd_fwd = z.p;
  Eigen::VectorXd p_sharp_fwd_fwd = inv_metric_.cwiseProduct(z.p);
  Eigen::VectorXd p_fwd_bck = z.p;
  Eigen::VectorXd p_sharp_fwd_bck = p_sharp_fwd_fwd;
  Eigen::VectorXd p_bck_fwd = z.p;
  Eigen::VectorXd p_sharp_bck_fwd = p_sharp_fwd_fwd;
  Eigen::VectorXd p_bck_bck = z.p;
  Eigen::VectorXd p_sharp_bck_bck = p_sharp_fwd_fwd;
  Eigen::VectorXd rho = z.p;

  double log_sum_weight = 0.0;
  const double h0 = hamiltonian(z);
  int n_leapfrog = 0;
  double sum_metro_prob = 0.0;
  bool divergent = false;
  int depth = 0;

  while (depth < options_.max_depth) {
    Eigen::VectorXd rho_fwd = Eigen::VectorXd::Zero(dim_);
    Eigen::VectorXd rho_bck = Eigen::VectorXd::Zero(dim_);
    bool valid = false;
    double log_sum_weight_subtree = -kInf;

    if (uniform01(rng) > 0.5) {
      z = z_fwd;
      rho_bck = rho;
      p_bck_fwd = p_fwd_bck;
      p_sharp_bck_fwd = p_sharp_fwd_bck;
      valid = build_tree(fn, depth, z, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd, p_fwd_bck,
                         p_fwd_fwd, h0, 1.0, n_leapfrog, log_sum_weight_subtree, sum_metro_prob,
                         divergent, rng);
      z_fwd = z;
    } else {
      z = z_bck;
      rho_fwd = rho;
      p_fwd_bck = p_bck_fwd;
      p_sharp_fwd_bck = p_sharp_bck_fwd;
      valid = build_tree(fn, depth, z, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck, p_bck_fwd,
                         p_bck_bck, h0, -1.0, n_leapfrog, log_sum_weight_subtree, sum_metro_prob,
                         divergent, rng);
      z_bck = z;
    }
    if (!valid) break;
    ++depth;

    if (log_sum_weight_subtree > log_sum_weight) {
      sample = z_propose.point;
    } else if (uniform01(rng) < std::exp(log_sum_weight_subtree - log_sum_weight)) {
      sample = z_propose.point;
    }
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

    rho = rho_bck + rho_fwd;
    bool persist = no_u_turn(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
    Eigen::VectorXd rho_extended = rho_bck + p_fwd_bck;
    persist = persist && no_u_turn(p_sharp_bck_bck, p_sharp_fwd_bck, rho_extended);
    rho_extended = rho_fwd + p_bck_fwd;
    persist = persist && no_u_turn(p_sharp_bck_fwd, p_sharp_fwd_fwd, rho_extended);
    if (!persist) break;
  }

  out.leapfrog_steps = n_leapfrog;
  out.depth = depth;
  out.divergent = divergent;
  out.accept_stat = n_leapfrog > 0 ? sum_metro_prob / n_leapfrog : 0.0;
  point = sample;
  return out;
}

bool HmcKernel::build_tree(const LogDensityFn& fn, int depth, Phase& z, Phase& z_propose,
                           Eigen::VectorXd& p_sharp_beg, Eigen::VectorXd& p_sharp_end,
                           Eigen::VectorXd& rho, Eigen::VectorXd& p_beg, Eigen::VectorXd& p_end,
                           double h0, double sign, int& n_leapfrog, double& log_sum_weight,
                           double& sum_metro_prob, bool& divergent, Rng& rng) const {
  if (depth == 0) {
    const bool ok = leapfrog(fn, z, sign * step_size_);
    ++n_leapfrog;
    double h = ok ? hamiltonian(z) : kInf;
    if (std::isnan(h)) h = kInf;
    if (h - h0 > options_.max_delta_h) divergent = true;
    log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
    sum_metro_prob += h0 - h > 0.0 ? 1.0 : std::exp(h0 - h);
    z_propose = z;
    p_sharp_beg = inv_metric_.cwiseProduct(z.p);
    p_sharp_end = p_sharp_beg;
    rho += z.p;
    p_beg = z.p;
    p_end = p_beg;
    return !divergent;
  }

  Eigen::VectorXd rho_init = Eigen::VectorXd::Zero(dim_);
  Eigen::VectorXd p_init_end(dim_);
  Eigen::VectorXd p_sharp_init_end(dim_);
  double log_sum_weight_init = -kInf;
  if (!build_tree(fn, depth - 1, z, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end,
                  h0, sign, n_leapfrog, log_sum_weight_init, sum_metro_prob, divergent, rng)) {
    return false;
  }

  Phase z_propose_final = z;
  Eigen::VectorXd rho_final = Eigen::VectorXd::Zero(dim_);
  Eigen::VectorXd p_final_beg(dim_);
  Eigen::VectorXd p_sharp_final_beg(dim_);
  double log_sum_weight_final = -kInf;
  if (!build_tree(fn, depth - 1, z, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final, p_final_beg,
                  p_end, h0, sign, n_leapfrog, log_sum_weight_final, sum_metro_prob, divergent, rng)) {
    return false;
  }

  const double log_sum_weight_subtree = log_sum_exp(log_sum_weight_init, log_sum_weight_final);
  log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);
  if (log_sum_weight_final > log_sum_weight_subtree) {
    z_propose = z_propose_final;
  } else if (uniform01(rng) < std::exp(log_sum_weight_final - log_sum_weight_subtree)) {
    z_propose = z_propose_final;
  }

  const Eigen::VectorXd rho_subtree = rho_init + rho_final;
  rho += rho_subtree;
  bool persist = no_u_turn(p_sharp_beg, p_sharp_end, rho_subtree);
  Eigen::VectorXd rho_extended = rho_init + p_final_beg;
  persist = persist && no_u_turn(p_sharp_beg, p_sharp_final_beg, rho_extended);
  rho_extended = rho_final + p_init_end;
  persist = persist && no_u_turn(p_sharp_init_end, p_sharp_end, rho_extended);
  return persist;
}

void HmcKernel::init_step_size(const LogDensityFn& fn, const HmcPoint& point, Rng& rng) {
  if (!std::isfinite(point.logp)) throw NumericError("step size search started from a point with zero density");
  const double log_target = std::log(0.8);
  auto trial = [&]() {
    Phase z{point, draw_momentum(rng)};
    const double h0 = hamiltonian(z);
    double h = leapfrog(fn, z, step_size_) ? hamiltonian(z) : kInf;
    if (std::isnan(h)) h = kInf;
    return h0 - h;
  };
  const int direction = trial() > log_target ? 1 : -1;
  for (int iter = 0; iter < 200; ++iter) {
    const double delta_h = trial();
    if (direction == 1 && !(delta_h > log_target)) break;
    if (direction == -1 && !(delta_h < log_target)) break;
    step_size_ = direction == 1 ? 2.0 * step_size_ : 0.5 * step_size_;
    if (step_size_ > 1e7) throw NumericError("step size search diverged; the posterior may be improper");
    if (step_size_ < 1e-300) throw NumericError("step size search collapsed to zero");
  }
}

void HmcKernel::begin_adaptation(int num_warmup) {
  adapting_ = num_warmup > 0;
  dual_.restart(step_size_);
  windows_.restart(num_warmup, dim_);
}

void HmcKernel::adapt(const LogDensityFn& fn, const HmcPoint& point, const HmcTransition& t, Rng& rng) {
  if (!adapting_) return;
  step_size_ = dual_.learn(t.accept_stat);
  if (windows_.learn(point.q, inv_metric_)) {
    init_step_size(fn, point, rng);
    dual_.restart(step_size_);
  }
}

void HmcKernel::end_adaptation() {
  if (!adapting_) return;
  step_size_ = dual_.final_step_size();
  adapting_ = false;
}

}  // namespace glnem
