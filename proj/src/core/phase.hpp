#pragma once

// Fixed-point location and classification, limit-cycle detection, and
// bifurcation-threshold mapping versus the applied DC voltage (fixed series
// resistor throughout).

#include <optional>
#include <string>
#include <vector>

#include "core/circuit.hpp"
#include "core/model.hpp"

namespace memcap {

enum class FixedPointKind { SinkNode, SinkSpiral, Saddle, SourceNode, SpiralSource };
const char* to_string(FixedPointKind k);
std::optional<FixedPointKind> fixed_point_kind_from_string(const std::string& s);

struct FixedPoint {
  double x = 0.0;
  double q = 0.0;
  double det = 0.0;
  double tr = 0.0;
  double delta = 0.0;  // tr^2 - 4 det
  FixedPointKind kind = FixedPointKind::SinkNode;
};

/// Standard planar linearization taxonomy.  Throws DegenerateFixedPoint when
/// (det, tr, delta) sits on a classification boundary within `tol` relative
/// to the magnitude of the inputs.
FixedPointKind classify(double det, double tr, double delta, double tol = 1.0e-9);

struct NewtonOptions {
  double tol = 1.0e-6;       // residual infinity-norm target
  int max_iter = 80;
  int max_halvings = 30;
  double dedupe_dist = 1.0e-6;
};

/// Damped Newton search for roots of the planar field.  Seeds: the supplied
/// list if nonempty, otherwise a 20x20 grid over x in [0, d-0.3], q in [0, 3]
/// augmented with 1-D nullcline brackets (robust against the very sharp
/// memristance transition at x_c).
std::vector<CircuitState> find_roots(const ModelParams& p, double V, double r,
                                     const std::vector<CircuitState>& seeds = {},
                                     const NewtonOptions& opts = {});

std::vector<FixedPoint> find_fixed_points(const ModelParams& p, double V,
                                          double r,
                                          const std::vector<CircuitState>& seeds = {},
                                          const NewtonOptions& opts = {});

/// Closed-form fold voltage at which the off-contact sink/saddle pair
/// annihilates.  Type I: 2 (1 + r) sqrt(k (d/3)^3).  Type II uses the
/// contact-free resistance approximation R ~= rho0_eff (d - x), so the
/// effective rho0 enters; pass rho0_eff explicitly to explore readings
/// (default 10*rho0, the off-contact limit of the type-II law).
double analytic_v1prime(const ModelParams& p, double r,
                        std::optional<double> rho0_eff = std::nullopt);

struct LimitCycleInfo {
  double period = 0.0;
  double omega = 0.0;  // 2*pi / period
  // one period, uniformly resampled
  std::vector<double> time;  // relative to period start
  std::vector<double> x, q, v_c;
  double v_c_min = 0.0, v_c_max = 0.0;
  double x_min = 0.0, x_max = 0.0;
  int n_crossings = 0;
};

struct CycleOptions {
  double T = 1.5;
  double transient_fraction = 1.0 / 3.0;
  double dt_out = 1.0e-5;
  int min_crossings = 5;
  double period_consistency = 0.01;  // max relative spread of intervals
  std::size_t waveform_samples = 512;
};

/// Detect a limit cycle by Poincare events (upward x crossings of x_c):
/// at least `min_crossings` post-transient crossings whose intervals agree
/// within `period_consistency` of the mean.
std::optional<LimitCycleInfo> detect_limit_cycle(const ModelParams& p, double V,
                                                 double r, CircuitState init,
                                                 const IntegratorConfig& cfg,
                                                 const CycleOptions& opts = {});

struct ThresholdScanOptions {
  double v_min = 0.0;
  double v_max = 18.0;
  double dv_coarse = 0.05;
  double bisect_tol = 1.0e-3;
  bool with_cycle_thresholds = true;  // V1, V2 (requires simulations)
  double cycle_T = 1.5;
  CircuitState cycle_init{6.6, 2.0207};
};

struct Thresholds {
  double v0 = 0.0;        // saddle + spiral-source nucleation (1 -> 3 roots)
  double v1 = 0.0;        // onset of the detected limit cycle
  double v1_prime = 0.0;  // sink + saddle annihilation (3 -> 1 roots)
  double v2 = 0.0;        // limit cycle cut off
  double dv_coarse = 0.0;
  double bisect_tol = 0.0;
  bool has_cycle_thresholds = false;
};

/// V0 and V1' from fixed-point count transitions on a coarse grid refined by
/// bisection; V1 and V2 from bisection on detect_limit_cycle with the
/// cycle-adjacent initial condition.
Thresholds scan_thresholds(const ModelParams& p, double r,
                           const IntegratorConfig& cfg,
                           const ThresholdScanOptions& opts = {});

/// Fixed-point count transitions (V_lo, V_hi, count_lo, count_hi) located on
/// the coarse grid and refined by bisection; used by scan_thresholds and the
/// type-II fold diagnostics.
struct CountTransition {
  double v = 0.0;
  int count_below = 0;
  int count_above = 0;
};
std::vector<CountTransition> fold_transitions(const ModelParams& p, double r,
                                              double v_min, double v_max,
                                              double dv, double tol);

/// Resistance-axis analogue of scan_thresholds at fixed V: fixed-point
/// count transitions over r give the fold values, and bisection on
/// detect_limit_cycle gives the spiking window (r2, r1).
struct RThresholds {
  double r_sink_onset = 0.0;  // fold: sink-saddle pair appears as r grows
  double r1 = 0.0;            // cycle lost above this r
  double r2 = 0.0;            // cycle lost below this r
  bool has_cycle_window = false;
};

struct RScanOptions {
  double r_min = 1.0e-5;
  double r_max = 3.0e-2;
  double bisect_rel_tol = 1.0e-3;  // relative to the current bracket midpoint
  double cycle_T = 1.5;
  CircuitState cycle_init{6.6, 2.0207};
};

RThresholds scan_r_thresholds(const ModelParams& p, double V,
                              const IntegratorConfig& cfg,
                              const RScanOptions& opts = {});

struct PortraitOptions {
  double x_min = 0.0, x_max = 7.6;
  double q_min = 0.0, q_max = 3.0;
  int n_field = 25;      // field-sample grid per axis
  int n_edge = 40;       // trajectory starts spread along the window edge
  int n_ring = 12;       // starts on a ring around each spiral source
  double ring_radius = 0.03;
  double t_evolve = 0.05;
  double dt_out = 1.0e-4;
};

struct PortraitTrajectory {
  CircuitState init;
  bool ok = true;          // integration failures are isolated, not fatal
  std::vector<double> t, x, q;
};

struct Portrait {
  // unit-normalized field samples (zero vector at a fixed point)
  std::vector<double> fx_grid, fq_grid;  // flattened n_field x n_field
  std::vector<double> x_grid, q_grid;
  std::vector<PortraitTrajectory> trajectories;
  std::vector<FixedPoint> fixed_points;
};

Portrait phase_portrait(const ModelParams& p, double V, double r,
                        const IntegratorConfig& cfg,
                        const PortraitOptions& opts = {});

}  // namespace memcap
