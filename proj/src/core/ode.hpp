#pragma once

// Explicit embedded Runge-Kutta 4(5) (Dormand-Prince pair) with error-
// controlled adaptive steps and 4th-order dense output.  Two drivers share
// one stepping core: integrate() records every accepted step together with
// its interpolant, integrate_sampled() streams dense-output samples on a
// uniform grid without storing the step history.

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "core/model.hpp"

namespace memcap {

inline constexpr int kMaxState = 8;

struct IntegratorConfig {
  double rtol = 1.0e-6;
  double atol = 1.0e-9;
  double h_init = 1.0e-6;
  double h_max = 1.0e-2;
  long max_steps = 20'000'000;  // accepted + rejected attempts
  void validate() const;
};

/// rhs(t, y, dydt) with y and dydt of the problem dimension.
using Rhs = std::function<void(double t, const double* y, double* dydt)>;

/// Optional post-step projection (e.g. clamping a state to a bound).
/// Returns true if the state was modified.
using Projector = std::function<bool(double t, double* y)>;

struct IntegrationStats {
  long n_accepted = 0;
  long n_rejected = 0;
  long n_rhs = 0;
  long n_projected = 0;  // accepted steps altered by the projector
};

struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  // contd coefficients r1..r5, laid out per state component
  std::array<std::array<double, kMaxState>, 5> r;
};

class Trajectory {
public:
  Trajectory(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return times_.size(); }
  double time(std::size_t i) const { return times_[i]; }
  const double* state(std::size_t i) const { return &states_[i * dim_]; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const IntegrationStats& stats() const { return stats_; }

  /// Dense-output evaluation at any t inside [t_begin, t_end].
  void eval(double t, double* y) const;

  /// Uniform resampling at t_begin, t_begin + dt, ... (includes the last
  /// grid point <= t_end + tiny).  Column-major per state component.
  struct Uniform {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // [dim][n]
  };
  Uniform resample(double dt) const;

  // populated by integrate()
  void append(double t, const double* y);
  void append_step(const DenseStep& step);
  void set_stats(const IntegrationStats& s) { stats_ = s; }

private:
  int dim_;
  std::vector<double> times_;
  std::vector<double> states_;
  std::vector<DenseStep> steps_;
  IntegrationStats stats_;
};

/// Integrate rhs from y0 over [t0, t1], recording all accepted steps.
Trajectory integrate(const Rhs& rhs, const std::vector<double>& y0, double t0,
                     double t1, const IntegratorConfig& cfg);

/// Integrate and emit dense-output samples at t0 + k*dt_out (the endpoint t1
/// is always emitted as the final sample).  No step history is kept.
IntegrationStats integrate_sampled(
    const Rhs& rhs, const std::vector<double>& y0, double t0, double t1,
    const IntegratorConfig& cfg, double dt_out,
    const std::function<void(double t, const double* y)>& on_sample,
    const Projector& projector = nullptr);

}  // namespace memcap
