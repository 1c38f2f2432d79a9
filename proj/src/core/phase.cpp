#include "core/phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/signal.hpp"

namespace memcap {

namespace {

constexpr double kPi = 3.14159265358979323846;

double field_norm(const FieldValue& f) {
  return std::max(std::fabs(f.dx_dt), std::fabs(f.dq_dt));
}

// Evaluate the field, returning nullopt outside the valid domain.
std::optional<FieldValue> try_field(const ModelParams& p, double V, double r,
                                    const CircuitState& s) {
  try {
    return vector_field(p, V, r, s);
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Damped Newton iteration from one seed; nullopt if it fails to converge.
std::optional<CircuitState> newton_from(const ModelParams& p, double V,
                                        double r, CircuitState y,
                                        const NewtonOptions& opts) {
  const double x_lo = -1.0, x_hi = p.x_max();
  const double q_cap = 12.0;
  auto fv = try_field(p, V, r, y);
  if (!fv) return std::nullopt;
  double res = field_norm(*fv);
  for (int it = 0; it < opts.max_iter; ++it) {
    if (res < opts.tol) return y;
    Jacobian2 j = jacobian(p, V, r, y);
    double det = j.det();
    if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
    double dx = -(fv->dx_dt * j.a22 - fv->dq_dt * j.a12) / det;
    double dq = -(j.a11 * fv->dq_dt - j.a21 * fv->dx_dt) / det;
    double lambda = 1.0;
    bool improved = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      CircuitState trial{y.x + lambda * dx, y.q + lambda * dq};
      if (trial.x > x_lo && trial.x < x_hi && std::fabs(trial.q) < q_cap) {
        auto tf = try_field(p, V, r, trial);
        if (tf) {
          double tres = field_norm(*tf);
          if (tres < res) {
            y = trial;
            fv = tf;
            res = tres;
            improved = true;
            break;
          }
        }
      }
      lambda *= 0.5;
    }
    if (!improved) return std::nullopt;
  }
  return res < opts.tol ? std::optional<CircuitState>(y) : std::nullopt;
}

// On the dq/dt = 0 nullcline, q is a function of x.  Roots of the remaining
// 1-D equation h(x) = q_null^2 - dU/dx give excellent Newton seeds; this is
// what makes root finding reliable across the razor-thin memristance
// transition at x_c (width ~ 1/beta).
double nullcline_q(const ModelParams& p, double V, double r, double x) {
  double R = memristance(p, x);
  return V / ((1.0 + r / R) * (p.d - x));
}

double nullcline_h(const ModelParams& p, double V, double r, double x) {
  double qn = nullcline_q(p, V, r, x);
  return qn * qn - potential_and_gradient(p, x).dU_dx;
}

std::vector<double> nullcline_scan_grid(const ModelParams& p) {
  std::vector<double> xs;
  const double hi = p.d - 0.3;
  for (double x = -0.2; x < hi; x += 4.0e-3) xs.push_back(x);
  // refine around the contact transition; scale with the arctan sharpness
  double sharp = p.is_type2() ? std::get<TypeII>(p.memristance).beta2 : p.beta;
  double width = std::min(0.15, 200.0 / sharp);
  double step = std::max(width / 4000.0, 1.0e-6);
  for (double x = p.x_c - width; x < std::min(p.x_c + width, hi); x += step)
    xs.push_back(x);
  xs.push_back(hi);
  std::sort(xs.begin(), xs.end());
  return xs;
}

std::vector<CircuitState> nullcline_seeds(const ModelParams& p, double V,
                                          double r) {
  std::vector<CircuitState> seeds;
  std::vector<double> xs = nullcline_scan_grid(p);
  double prev_h = nullcline_h(p, V, r, xs.front());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    double h = nullcline_h(p, V, r, xs[i]);
    if ((prev_h < 0.0) != (h < 0.0)) {
      double a = xs[i - 1], b = xs[i];
      double fa = prev_h;
      for (int it = 0; it < 100; ++it) {
        double m = 0.5 * (a + b);
        double fm = nullcline_h(p, V, r, m);
        if ((fa < 0.0) == (fm < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      double x_root = 0.5 * (a + b);
      seeds.push_back({x_root, nullcline_q(p, V, r, x_root)});
    }
    prev_h = h;
  }
  return seeds;
}

}  // namespace

const char* to_string(FixedPointKind k) {
  switch (k) {
    case FixedPointKind::SinkNode: return "sink";
    case FixedPointKind::SinkSpiral: return "sink (spiral)";
    case FixedPointKind::Saddle: return "saddle";
    case FixedPointKind::SourceNode: return "source";
    case FixedPointKind::SpiralSource: return "spiral source";
  }
  return "?";
}

std::optional<FixedPointKind> fixed_point_kind_from_string(const std::string& s) {
  if (s == "sink") return FixedPointKind::SinkNode;
  if (s == "sink (spiral)") return FixedPointKind::SinkSpiral;
  if (s == "saddle") return FixedPointKind::Saddle;
  if (s == "source") return FixedPointKind::SourceNode;
  if (s == "spiral source") return FixedPointKind::SpiralSource;
  return std::nullopt;
}

FixedPointKind classify(double det, double tr, double delta, double tol) {
  if (!std::isfinite(det) || !std::isfinite(tr) || !std::isfinite(delta))
    throw Error(ErrorCode::InvalidArg, "non-finite Jacobian invariants");
  double scale = std::max({1.0, tr * tr, std::fabs(det), std::fabs(delta)});
  if (std::fabs(det) <= tol * scale)
    throw Error(ErrorCode::DegenerateFixedPoint,
                "det on the saddle-node boundary");
  if (det < 0.0) return FixedPointKind::Saddle;
  if (std::fabs(tr) <= tol * std::sqrt(scale))
    throw Error(ErrorCode::DegenerateFixedPoint,
                "tr on the center boundary");
  if (std::fabs(delta) <= tol * scale)
    throw Error(ErrorCode::DegenerateFixedPoint,
                "delta on the node-spiral boundary");
  if (tr < 0.0)
    return delta < 0.0 ? FixedPointKind::SinkSpiral : FixedPointKind::SinkNode;
  return delta < 0.0 ? FixedPointKind::SpiralSource : FixedPointKind::SourceNode;
}

std::vector<CircuitState> find_roots(const ModelParams& p, double V, double r,
                                     const std::vector<CircuitState>& seeds,
                                     const NewtonOptions& opts) {
  p.validate();
  if (!(r > 0.0)) throw Error(ErrorCode::Validation, "requires r > 0");

  if (V < 0.0) {  // field is symmetric under (q, V) -> (-q, -V)
    std::vector<CircuitState> mirrored = seeds;
    for (CircuitState& s : mirrored) s.q = -s.q;
    std::vector<CircuitState> roots = find_roots(p, -V, r, mirrored, opts);
    for (CircuitState& s : roots) s.q = -s.q;
    return roots;
  }

  std::vector<CircuitState> all_seeds;
  if (!seeds.empty()) {
    all_seeds = seeds;
  } else {
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j)
        all_seeds.push_back({(p.d - 0.3) * i / 19.0, 3.0 * j / 19.0});
    std::vector<CircuitState> nc = nullcline_seeds(p, V, r);
    all_seeds.insert(all_seeds.end(), nc.begin(), nc.end());
  }

  std::vector<CircuitState> roots;
  for (const CircuitState& seed : all_seeds) {
    auto root = newton_from(p, V, r, seed, opts);
    if (!root) continue;
    bool dup = false;
    for (const CircuitState& existing : roots) {
      double dx = existing.x - root->x, dq = existing.q - root->q;
      if (std::sqrt(dx * dx + dq * dq) < opts.dedupe_dist) {
        dup = true;
        break;
      }
    }
    if (!dup) roots.push_back(*root);
  }
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    return a.x != b.x ? a.x < b.x : a.q < b.q;
  });
  return roots;
}

std::vector<FixedPoint> find_fixed_points(const ModelParams& p, double V,
                                          double r,
                                          const std::vector<CircuitState>& seeds,
                                          const NewtonOptions& opts) {
  std::vector<FixedPoint> out;
  for (const CircuitState& s : find_roots(p, V, r, seeds, opts)) {
    Jacobian2 j = jacobian(p, V, r, s);
    FixedPoint fp;
    fp.x = s.x;
    fp.q = s.q;
    fp.det = j.det();
    fp.tr = j.tr();
    fp.delta = j.delta();
    fp.kind = classify(fp.det, fp.tr, fp.delta);
    out.push_back(fp);
  }
  return out;
}

double analytic_v1prime(const ModelParams& p, double r,
                        std::optional<double> rho0_eff) {
  if (p.is_type2()) {
    double rho = rho0_eff.value_or(10.0 * p.rho0);
    double d_eff = (p.d + r / rho) / 3.0;
    return 2.0 * std::sqrt(p.k * d_eff * d_eff * d_eff);
  }
  double d3 = p.d / 3.0;
  return 2.0 * (1.0 + r) * std::sqrt(p.k * d3 * d3 * d3);
}

std::optional<LimitCycleInfo> detect_limit_cycle(const ModelParams& p, double V,
                                                 double r, CircuitState init,
                                                 const IntegratorConfig& cfg,
                                                 const CycleOptions& opts) {
  CircuitTrace trace = simulate_circuit(p, Drive::dc(V),
                                        SeriesElement::fixed(r), init, opts.T,
                                        cfg, opts.dt_out);
  double t_skip = opts.transient_fraction * opts.T;
  SpikeOptions sopts;
  sopts.threshold = p.x_c;
  SpikeTrain train = detect_spikes(trace.x, 0.0, opts.dt_out, sopts);
  std::vector<double> crossings;
  for (double t : train.times)
    if (t >= t_skip) crossings.push_back(t);
  if (static_cast<int>(crossings.size()) < opts.min_crossings)
    return std::nullopt;

  std::vector<double> intervals;
  for (std::size_t i = 1; i < crossings.size(); ++i)
    intervals.push_back(crossings[i] - crossings[i - 1]);
  double mean = 0.0;
  for (double v : intervals) mean += v;
  mean /= intervals.size();
  for (double v : intervals)
    if (std::fabs(v - mean) > opts.period_consistency * mean)
      return std::nullopt;

  LimitCycleInfo info;
  info.period = mean;
  info.omega = 2.0 * kPi / mean;
  info.n_crossings = static_cast<int>(crossings.size());

  // resample the final full period from the uniform trace
  double t_end = crossings.back();
  double t_start = t_end - mean;
  info.v_c_min = std::numeric_limits<double>::infinity();
  info.v_c_max = -info.v_c_min;
  info.x_min = info.v_c_min;
  info.x_max = -info.v_c_min;
  auto interp = [&](const std::vector<double>& col, double t) {
    double s = t / opts.dt_out;
    std::size_t i = std::min(static_cast<std::size_t>(s), trace.size() - 2);
    double f = s - static_cast<double>(i);
    return col[i] * (1.0 - f) + col[i + 1] * f;
  };
  for (std::size_t i = 0; i < opts.waveform_samples; ++i) {
    double tt = t_start + mean * static_cast<double>(i) /
                              static_cast<double>(opts.waveform_samples);
    info.time.push_back(tt - t_start);
    info.x.push_back(interp(trace.x, tt));
    info.q.push_back(interp(trace.q, tt));
    info.v_c.push_back(interp(trace.v_c, tt));
    info.v_c_min = std::min(info.v_c_min, info.v_c.back());
    info.v_c_max = std::max(info.v_c_max, info.v_c.back());
    info.x_min = std::min(info.x_min, info.x.back());
    info.x_max = std::max(info.x_max, info.x.back());
  }
  return info;
}

std::vector<CountTransition> fold_transitions(const ModelParams& p, double r,
                                              double v_min, double v_max,
                                              double dv, double tol) {
  std::vector<CountTransition> out;
  auto count_at = [&](double V) {
    return static_cast<int>(find_roots(p, V, r).size());
  };
  double v_prev = v_min;
  int c_prev = count_at(v_prev);
  for (double v = v_min + dv; v <= v_max + 0.5 * dv; v += dv) {
    double vv = std::min(v, v_max);
    int c = count_at(vv);
    if (c != c_prev) {
      double lo = v_prev, hi = vv;
      int c_lo = c_prev;
      while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        int cm = count_at(mid);
        if (cm == c_lo)
          lo = mid;
        else
          hi = mid;
      }
      out.push_back({0.5 * (lo + hi), c_prev, c});
    }
    v_prev = vv;
    c_prev = c;
  }
  return out;
}

Thresholds scan_thresholds(const ModelParams& p, double r,
                           const IntegratorConfig& cfg,
                           const ThresholdScanOptions& opts) {
  Thresholds th;
  th.dv_coarse = opts.dv_coarse;
  th.bisect_tol = opts.bisect_tol;

  std::vector<CountTransition> folds = fold_transitions(
      p, r, opts.v_min, opts.v_max, opts.dv_coarse, opts.bisect_tol);
  // V0: first 1 -> 3; V1': following 3 -> 1
  bool have_v0 = false, have_v1p = false;
  for (const CountTransition& f : folds) {
    if (!have_v0 && f.count_below == 1 && f.count_above == 3) {
      th.v0 = f.v;
      have_v0 = true;
    } else if (have_v0 && !have_v1p && f.count_below == 3 && f.count_above == 1) {
      th.v1_prime = f.v;
      have_v1p = true;
    }
  }
  if (!have_v0 || !have_v1p)
    throw Error(ErrorCode::BracketNotFound,
                "fixed-point count transitions not found on the coarse grid; "
                "widen [v_min, v_max] or refine dv_coarse");

  if (!opts.with_cycle_thresholds) return th;

  CycleOptions copts;
  copts.T = opts.cycle_T;
  auto has_cycle = [&](double V) {
    return detect_limit_cycle(p, V, r, opts.cycle_init, cfg, copts).has_value();
  };

  // coarse walk down from V1' to bracket the cycle onset
  double step = 0.2;
  double v_with = 0.0, v_without = 0.0;
  bool found_with = false, found_without = false;
  for (double v = th.v1_prime - 0.5 * opts.bisect_tol; v > opts.v_min;
       v -= step) {
    if (has_cycle(v)) {
      v_with = v;
      found_with = true;
      break;
    }
  }
  if (!found_with)
    throw Error(ErrorCode::BracketNotFound,
                "no limit cycle detected below V1'; cannot bracket V1");
  for (double v = v_with - step; v > opts.v_min - 0.5 * step; v -= step) {
    double vv = std::max(v, opts.v_min);
    if (!has_cycle(vv)) {
      v_without = vv;
      found_without = true;
      break;
    }
    v_with = vv;
    if (vv <= opts.v_min) break;
  }
  if (!found_without)
    throw Error(ErrorCode::BracketNotFound,
                "limit cycle persists down to v_min; cannot bracket V1");
  while (v_with - v_without > opts.bisect_tol) {
    double mid = 0.5 * (v_with + v_without);
    if (has_cycle(mid))
      v_with = mid;
    else
      v_without = mid;
  }
  th.v1 = 0.5 * (v_with + v_without);

  // walk up from V1' to bracket the cycle cutoff
  double v_hi_with = 0.0, v_hi_without = 0.0;
  found_with = found_without = false;
  for (double v = th.v1_prime + step; v < opts.v_max + 0.5 * step; v += step) {
    double vv = std::min(v, opts.v_max);
    if (has_cycle(vv)) {
      v_hi_with = vv;
      found_with = true;
    } else if (found_with) {
      v_hi_without = vv;
      found_without = true;
      break;
    }
    if (vv >= opts.v_max) break;
  }
  if (!found_with || !found_without)
    throw Error(ErrorCode::BracketNotFound,
                "cannot bracket V2 inside [V1', v_max]");
  while (v_hi_without - v_hi_with > opts.bisect_tol) {
    double mid = 0.5 * (v_hi_with + v_hi_without);
    if (has_cycle(mid))
      v_hi_with = mid;
    else
      v_hi_without = mid;
  }
  th.v2 = 0.5 * (v_hi_with + v_hi_without);
  th.has_cycle_thresholds = true;
  return th;
}

RThresholds scan_r_thresholds(const ModelParams& p, double V,
                              const IntegratorConfig& cfg,
                              const RScanOptions& opts) {
  RThresholds out;
  // fold scan on a log grid in r
  auto count_at = [&](double r) {
    return static_cast<int>(find_roots(p, V, r).size());
  };
  const int n_grid = 120;
  double lf = std::log(opts.r_min), hf = std::log(opts.r_max);
  double r_prev = opts.r_min;
  int c_prev = count_at(r_prev);
  bool have_fold = false;
  for (int i = 1; i <= n_grid; ++i) {
    double r = std::exp(lf + (hf - lf) * i / n_grid);
    int c = count_at(r);
    if (!have_fold && c_prev == 1 && c == 3) {
      double lo = r_prev, hi = r;
      while (hi - lo > opts.bisect_rel_tol * hi) {
        double mid = std::sqrt(lo * hi);
        if (count_at(mid) == 1)
          lo = mid;
        else
          hi = mid;
      }
      out.r_sink_onset = std::sqrt(lo * hi);
      have_fold = true;
    }
    r_prev = r;
    c_prev = c;
  }

  CycleOptions copts;
  copts.T = opts.cycle_T;
  auto has_cycle = [&](double r) {
    return detect_limit_cycle(p, V, r, opts.cycle_init, cfg, copts).has_value();
  };
  // bracket the cycle window on the same log grid
  double first_with = 0.0, last_with = 0.0, before = 0.0, after = 0.0;
  bool any = false;
  const int n_cycle = 24;
  double prev = opts.r_min;
  bool prev_has = has_cycle(prev);
  if (prev_has) {
    first_with = prev;
    any = true;
  }
  for (int i = 1; i <= n_cycle; ++i) {
    double r = std::exp(lf + (hf - lf) * i / n_cycle);
    bool h = has_cycle(r);
    if (h && !any) {
      any = true;
      first_with = r;
      before = prev;
    }
    if (h) last_with = r;
    if (!h && any && after == 0.0 && last_with == prev) after = r;
    prev = r;
    prev_has = h;
  }
  (void)prev_has;
  if (!any)
    throw Error(ErrorCode::BracketNotFound,
                "no limit cycle found on the r grid at V=" + std::to_string(V));
  if (before > 0.0) {
    double lo = before, hi = first_with;
    while (hi - lo > opts.bisect_rel_tol * hi) {
      double mid = std::sqrt(lo * hi);
      if (has_cycle(mid))
        hi = mid;
      else
        lo = mid;
    }
    out.r2 = std::sqrt(lo * hi);
  }
  if (after > 0.0) {
    double lo = last_with, hi = after;
    while (hi - lo > opts.bisect_rel_tol * hi) {
      double mid = std::sqrt(lo * hi);
      if (has_cycle(mid))
        lo = mid;
      else
        hi = mid;
    }
    out.r1 = std::sqrt(lo * hi);
  }
  out.has_cycle_window = out.r1 > 0.0 && out.r2 > 0.0;
  return out;
}

Portrait phase_portrait(const ModelParams& p, double V, double r,
                        const IntegratorConfig& cfg,
                        const PortraitOptions& opts) {
  if (!(opts.x_max > opts.x_min) || !(opts.q_max > opts.q_min))
    throw Error(ErrorCode::Validation, "portrait window is empty");
  if (opts.x_max >= p.x_max())
    throw Error(ErrorCode::Validation, "portrait window crosses the x guard");

  Portrait out;
  out.fixed_points = find_fixed_points(p, V, r);

  // normalized field samples
  for (int i = 0; i < opts.n_field; ++i) {
    double x = opts.x_min + (opts.x_max - opts.x_min) * i / (opts.n_field - 1);
    for (int j = 0; j < opts.n_field; ++j) {
      double q = opts.q_min + (opts.q_max - opts.q_min) * j / (opts.n_field - 1);
      FieldValue f = vector_field(p, V, r, CircuitState{x, q});
      double norm = std::hypot(f.dx_dt, f.dq_dt);
      out.x_grid.push_back(x);
      out.q_grid.push_back(q);
      if (norm > 1.0e-12) {
        out.fx_grid.push_back(f.dx_dt / norm);
        out.fq_grid.push_back(f.dq_dt / norm);
      } else {
        out.fx_grid.push_back(0.0);
        out.fq_grid.push_back(0.0);
      }
    }
  }

  // trajectory starts: evenly spaced around the window edge, then rings
  // around every spiral source
  std::vector<CircuitState> starts;
  double w = opts.x_max - opts.x_min, h = opts.q_max - opts.q_min;
  double perimeter = 2.0 * (w + h);
  for (int i = 0; i < opts.n_edge; ++i) {
    double s = perimeter * i / opts.n_edge;
    CircuitState c;
    if (s < w) {
      c = {opts.x_min + s, opts.q_min};
    } else if (s < w + h) {
      c = {opts.x_max, opts.q_min + (s - w)};
    } else if (s < 2.0 * w + h) {
      c = {opts.x_max - (s - w - h), opts.q_max};
    } else {
      c = {opts.x_min, opts.q_max - (s - 2.0 * w - h)};
    }
    starts.push_back(c);
  }
  for (const FixedPoint& fp : out.fixed_points) {
    if (fp.kind != FixedPointKind::SpiralSource &&
        fp.kind != FixedPointKind::SourceNode)
      continue;
    for (int i = 0; i < opts.n_ring; ++i) {
      double ang = 2.0 * kPi * i / opts.n_ring;
      starts.push_back({fp.x + opts.ring_radius * std::cos(ang),
                        fp.q + opts.ring_radius * std::sin(ang)});
    }
  }

  for (const CircuitState& init : starts) {
    PortraitTrajectory traj;
    traj.init = init;
    try {
      CircuitTrace tr = simulate_circuit(p, Drive::dc(V),
                                         SeriesElement::fixed(r), init,
                                         opts.t_evolve, cfg, opts.dt_out);
      traj.t = tr.t;
      traj.x = tr.x;
      traj.q = tr.q;
    } catch (const Error&) {
      traj.ok = false;
    }
    out.trajectories.push_back(std::move(traj));
  }
  return out;
}

}  // namespace memcap
