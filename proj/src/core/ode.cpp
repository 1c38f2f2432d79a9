#include "core/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace memcap {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                 c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// embedded 4th-order error weights (b5 - b4)
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// dense-output weights
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;

struct StepWorkspace {
  int n = 0;
  std::array<double, kMaxState> k1, k2, k3, k4, k5, k6, k7, y1, err;
};

// One trial step from (t, y) with size h.  k1 must hold rhs(t, y).
// Returns the scaled error norm.
template <class F>
double trial_step(F&& rhs, double t, const double* y, double h,
                  const IntegratorConfig& cfg, StepWorkspace& w) {
  const int n = w.n;
  std::array<double, kMaxState> tmp;
  for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * w.k1[i];
  rhs(t + c2 * h, tmp.data(), w.k2.data());
  for (int i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a31 * w.k1[i] + a32 * w.k2[i]);
  rhs(t + c3 * h, tmp.data(), w.k3.data());
  for (int i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a41 * w.k1[i] + a42 * w.k2[i] + a43 * w.k3[i]);
  rhs(t + c4 * h, tmp.data(), w.k4.data());
  for (int i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a51 * w.k1[i] + a52 * w.k2[i] + a53 * w.k3[i] +
                         a54 * w.k4[i]);
  rhs(t + c5 * h, tmp.data(), w.k5.data());
  for (int i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a61 * w.k1[i] + a62 * w.k2[i] + a63 * w.k3[i] +
                         a64 * w.k4[i] + a65 * w.k5[i]);
  rhs(t + h, tmp.data(), w.k6.data());
  for (int i = 0; i < n; ++i)
    w.y1[i] = y[i] + h * (a71 * w.k1[i] + a73 * w.k3[i] + a74 * w.k4[i] +
                          a75 * w.k5[i] + a76 * w.k6[i]);
  rhs(t + h, w.y1.data(), w.k7.data());  // FSAL

  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    w.err[i] = h * (e1 * w.k1[i] + e3 * w.k3[i] + e4 * w.k4[i] +
                    e5 * w.k5[i] + e6 * w.k6[i] + e7 * w.k7[i]);
    double sc =
        cfg.atol + cfg.rtol * std::max(std::fabs(y[i]), std::fabs(w.y1[i]));
    double r = w.err[i] / sc;
    sum += r * r;
  }
  double norm = std::sqrt(sum / n);
  if (!std::isfinite(norm)) norm = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(w.y1[i]))
      norm = std::numeric_limits<double>::infinity();
  return norm;
}

void dense_coefficients(const StepWorkspace& w, const double* y0, double h,
                        DenseStep& out) {
  const int n = w.n;
  for (int i = 0; i < n; ++i) {
    double ydiff = w.y1[i] - y0[i];
    double bspl = h * w.k1[i] - ydiff;
    out.r[0][i] = y0[i];
    out.r[1][i] = ydiff;
    out.r[2][i] = bspl;
    out.r[3][i] = ydiff - h * w.k7[i] - bspl;
    out.r[4][i] = h * (d1 * w.k1[i] + d3 * w.k3[i] + d4 * w.k4[i] +
                       d5 * w.k5[i] + d6 * w.k6[i] + d7 * w.k7[i]);
  }
}

inline void dense_eval(const DenseStep& s, int n, double t, double* y) {
  double theta = (t - s.t0) / s.h;
  double theta1 = 1.0 - theta;
  for (int i = 0; i < n; ++i)
    y[i] = s.r[0][i] +
           theta * (s.r[1][i] +
                    theta1 * (s.r[2][i] +
                              theta * (s.r[3][i] + theta1 * s.r[4][i])));
}

// Core adaptive loop.  on_accept is called after every accepted (and
// possibly projected) step with the dense interpolant of that step.
template <class Accept>
IntegrationStats drive(const Rhs& rhs, const std::vector<double>& y0,
                       double t0, double t1, const IntegratorConfig& cfg,
                       const Projector& projector, Accept&& on_accept) {
  cfg.validate();
  if (!(t1 > t0))
    throw Error(ErrorCode::InvalidArg, "integration span must be nonempty");
  const int n = static_cast<int>(y0.size());
  if (n < 1 || n > kMaxState)
    throw Error(ErrorCode::InvalidArg, "state dimension out of range");

  IntegrationStats stats;
  StepWorkspace w;
  w.n = n;
  std::array<double, kMaxState> y{};
  std::copy(y0.begin(), y0.end(), y.begin());

  auto eval_rhs = [&](double t, const double* yy, double* dy) {
    rhs(t, yy, dy);
    ++stats.n_rhs;
  };

  double t = t0;
  double h = std::min(cfg.h_init, std::min(cfg.h_max, t1 - t0));
  eval_rhs(t, y.data(), w.k1.data());
  bool last_rejected = false;
  const double h_floor_scale = 16.0 * std::numeric_limits<double>::epsilon();

  while (t < t1) {
    if (stats.n_accepted + stats.n_rejected >= cfg.max_steps)
      throw Error(ErrorCode::StepBudgetExceeded,
                  "step budget of " + std::to_string(cfg.max_steps) +
                      " exhausted at t=" + std::to_string(t));
    bool hit_end = false;
    if (t + h >= t1) {
      h = t1 - t;
      hit_end = true;
    }
    double h_floor = h_floor_scale * std::max({std::fabs(t), std::fabs(t1), 1.0});
    if (h < h_floor && !hit_end)
      throw Error(ErrorCode::StepUnderflow,
                  "step size underflow at t=" + std::to_string(t) +
                      " (h=" + std::to_string(h) + ")");

    double err;
    bool domain_reject = false;
    try {
      err = trial_step(eval_rhs, t, y.data(), h, cfg, w);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Domain || e.code() == ErrorCode::NonFinite) {
        // trial state left the valid domain; retry with a smaller step
        domain_reject = true;
        err = std::numeric_limits<double>::infinity();
      } else {
        throw;
      }
    }

    if (err <= 1.0 && !domain_reject) {
      DenseStep ds;
      ds.t0 = t;
      ds.h = h;
      dense_coefficients(w, y.data(), h, ds);
      double t_new = hit_end ? t1 : t + h;
      bool projected = false;
      if (projector) {
        projected = projector(t_new, w.y1.data());
        if (projected) ++stats.n_projected;
      }
      ++stats.n_accepted;
      on_accept(ds, t_new, w.y1.data());
      t = t_new;
      std::copy(w.y1.begin(), w.y1.begin() + n, y.begin());
      if (projected)
        eval_rhs(t, y.data(), w.k1.data());
      else
        w.k1 = w.k7;  // FSAL
      double fac = kSafety * std::pow(std::max(err, 1.0e-10), -0.2);
      fac = std::clamp(fac, kFacMin, last_rejected ? 1.0 : kFacMax);
      h = std::min(h * fac, cfg.h_max);
      last_rejected = false;
    } else {
      ++stats.n_rejected;
      last_rejected = true;
      double fac = domain_reject
                       ? 0.25
                       : std::clamp(kSafety * std::pow(err, -0.2), kFacMin, 0.9);
      double h_new = h * fac;
      if (h_new < h_floor)
        throw Error(ErrorCode::StepUnderflow,
                    "step size underflow at t=" + std::to_string(t) +
                        " (rejected h=" + std::to_string(h) + ")");
      h = h_new;
    }
  }
  return stats;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0))
    throw Error(ErrorCode::Validation, "requires rtol > 0 and atol > 0");
  if (!(h_init > 0.0) || !(h_max >= h_init))
    throw Error(ErrorCode::Validation, "requires h_max >= h_init > 0");
  if (max_steps <= 0)
    throw Error(ErrorCode::Validation, "requires max_steps > 0");
}

void Trajectory::append(double t, const double* y) {
  times_.push_back(t);
  states_.insert(states_.end(), y, y + dim_);
}

void Trajectory::append_step(const DenseStep& step) { steps_.push_back(step); }

void Trajectory::eval(double t, double* y) const {
  if (steps_.empty())
    throw Error(ErrorCode::InvalidArg, "empty trajectory");
  if (t <= times_.front()) {
    std::copy(states_.begin(), states_.begin() + dim_, y);
    return;
  }
  // first step whose start lies at or after t, then back up one
  std::size_t lo = 0, hi = steps_.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (steps_[mid].t0 + steps_[mid].h < t)
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo >= steps_.size()) lo = steps_.size() - 1;
  dense_eval(steps_[lo], dim_, t, y);
}

Trajectory::Uniform Trajectory::resample(double dt) const {
  if (!(dt > 0.0))
    throw Error(ErrorCode::InvalidArg, "requires dt > 0");
  if (times_.empty())
    throw Error(ErrorCode::InvalidArg, "empty trajectory");
  double span = t_end() - t_begin();
  if (dt > span)
    throw Error(ErrorCode::InvalidArg, "resample step exceeds trajectory span");
  Uniform out;
  out.t0 = t_begin();
  out.dt = dt;
  std::size_t count = static_cast<std::size_t>(span / dt + 1.0e-9) + 1;
  out.states.assign(dim_, {});
  std::array<double, kMaxState> y{};
  for (std::size_t k = 0; k < count; ++k) {
    double t = t_begin() + static_cast<double>(k) * dt;
    if (t > t_end()) t = t_end();
    eval(t, y.data());
    out.times.push_back(t);
    for (int i = 0; i < dim_; ++i) out.states[i].push_back(y[i]);
  }
  return out;
}

Trajectory integrate(const Rhs& rhs, const std::vector<double>& y0, double t0,
                     double t1, const IntegratorConfig& cfg) {
  Trajectory traj(static_cast<int>(y0.size()));
  traj.append(t0, y0.data());
  IntegrationStats stats =
      drive(rhs, y0, t0, t1, cfg, nullptr,
            [&](const DenseStep& ds, double t_new, const double* y1) {
              traj.append_step(ds);
              traj.append(t_new, y1);
            });
  traj.set_stats(stats);
  return traj;
}

IntegrationStats integrate_sampled(
    const Rhs& rhs, const std::vector<double>& y0, double t0, double t1,
    const IntegratorConfig& cfg, double dt_out,
    const std::function<void(double t, const double* y)>& on_sample,
    const Projector& projector) {
  if (!(dt_out > 0.0))
    throw Error(ErrorCode::InvalidArg, "requires dt_out > 0");
  const int n = static_cast<int>(y0.size());
  on_sample(t0, y0.data());
  std::size_t next = 1;  // next uniform sample index
  std::array<double, kMaxState> y{};
  const double tol = 1.0e-9 * dt_out;  // absorbs round-off at grid == step end
  IntegrationStats stats = drive(
      rhs, y0, t0, t1, cfg, projector,
      [&](const DenseStep& ds, double t_new, const double* y1) {
        (void)y1;
        double t_next = t0 + static_cast<double>(next) * dt_out;
        while (t_next <= t_new + tol) {
          dense_eval(ds, n, t_next, y.data());
          if (projector) projector(t_next, y.data());
          on_sample(t_next, y.data());
          ++next;
          t_next = t0 + static_cast<double>(next) * dt_out;
        }
      });
  return stats;
}

}  // namespace memcap
