#pragma once

#include <functional>

#include <Eigen/Dense>

#include "glnem/random.hpp"

namespace glnem {

// Log density and its gradient at q. May throw NumericError; the kernel
// treats that as an infinitely unlikely point.
using LogDensityFn = std::function<double(const Eigen::VectorXd& q, Eigen::VectorXd& grad)>;

enum class TrajectoryKind { Nuts, Static };

struct HmcOptions {
  TrajectoryKind kind = TrajectoryKind::Nuts;
  int max_depth = 10;      // NUTS tree depth cap (2^depth leapfrog steps)
  int static_steps = 16;   // leapfrog steps per transition for TrajectoryKind::Static
  double target_accept = 0.8;
  double max_delta_h = 1000.0;  // energy error beyond which a trajectory is divergent
};

struct HmcPoint {
  Eigen::VectorXd q;
  double logp = 0.0;
  Eigen::VectorXd grad;
};

struct HmcTransition {
  double accept_stat = 0.0;
  bool divergent = false;
  int leapfrog_steps = 0;
  int depth = 0;
};

// Evaluates fn at q into point; returns false (logp = -inf) on NumericError
// or non-finite output.
bool evaluate(const LogDensityFn& fn, const Eigen::VectorXd& q, HmcPoint& point);

// Nesterov dual averaging of log step size toward a target acceptance rate.
class DualAveraging {
 public:
  explicit DualAveraging(double target = 0.8) : delta_(target) {}
  void restart(double step_size);
  // Returns the step size to use for the next iteration.
  double learn(double accept_stat);
  // Final averaged step size.
  double final_step_size() const { return std::exp(x_bar_); }

 private:
  double delta_;
  double gamma_ = 0.05;
  double t0_ = 10.0;
  double kappa_ = 0.75;
  double mu_ = 0.0;
  double counter_ = 0.0;
  double s_bar_ = 0.0;
  double x_bar_ = 0.0;
};

// Diagonal inverse-metric estimation over doubling warmup windows with an
// initial fast buffer and a terminal step-size-only buffer.
class WindowedVariance {
 public:
  void restart(int num_warmup, int dim);
  // Records q; returns true when a window closed and inv_metric was updated.
  bool learn(const Eigen::VectorXd& q, Eigen::VectorXd& inv_metric);

 private:
  bool in_window() const;
  bool end_of_window() const;
  void next_window();

  int num_warmup_ = 0;
  int init_buffer_ = 75;
  int term_buffer_ = 50;
  int base_window_ = 25;
  int counter_ = 0;
  int window_size_ = 25;
  int next_window_end_ = 0;
  bool active_ = false;
  long samples_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

class HmcKernel {
 public:
  HmcKernel(int dim, HmcOptions options);

  const HmcOptions& options() const { return options_; }
  double step_size() const { return step_size_; }
  void set_step_size(double eps) { step_size_ = eps; }
  const Eigen::VectorXd& inv_metric() const { return inv_metric_; }
  void set_inv_metric(const Eigen::VectorXd& m) { inv_metric_ = m; }

  // One transition from point; point is overwritten with the new state.
  HmcTransition transition(const LogDensityFn& fn, HmcPoint& point, Rng& rng);

  // Doubles or halves the step size until a single leapfrog step crosses an
  // acceptance of 0.8.
  void init_step_size(const LogDensityFn& fn, const HmcPoint& point, Rng& rng);

  // Warmup adaptation. begin keeps the current step size and metric.
  void begin_adaptation(int num_warmup);
  void adapt(const LogDensityFn& fn, const HmcPoint& point, const HmcTransition& t, Rng& rng);
  void end_adaptation();
  bool adapting() const { return adapting_; }

 private:
  struct Phase {
    HmcPoint point;
    Eigen::VectorXd p;
  };

  Eigen::VectorXd draw_momentum(Rng& rng) const;
  double kinetic(const Eigen::VectorXd& p) const;
  double hamiltonian(const Phase& z) const { return -z.point.logp + kinetic(z.p); }
  bool leapfrog(const LogDensityFn& fn, Phase& z, double eps) const;

  HmcTransition static_transition(const LogDensityFn& fn, HmcPoint& point, Rng& rng);
  HmcTransition nuts_transition(const LogDensityFn& fn, HmcPoint& point, Rng& rng);
  bool build_tree(const LogDensityFn& fn, int depth, Phase& z, Phase& z_propose,
                  Eigen::VectorXd& p_sharp_beg, Eigen::VectorXd& p_sharp_end, Eigen::VectorXd& rho,
                  Eigen::VectorXd& p_beg, Eigen::VectorXd& p_end, double h0, double sign,
                  int& n_leapfrog, double& log_sum_weight, double& sum_metro_prob, bool& divergent,
                  Rng& rng) const;

  int dim_;
  HmcOptions options_;
  double step_size_ = 1.0;
  Eigen::VectorXd inv_metric_;
  bool adapting_ = false;
  DualAveraging dual_;
  WindowedVariance windows_;
};

}  // namespace glnem
