#include "core/circuit.hpp"

#include <cmath>

#include "core/io.hpp"

namespace memcap {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

Rhs make_circuit_rhs(const ModelParams& p, const Drive& drive,
                     const SeriesElement& series) {
  if (const FixedResistor* f = series.get_if<FixedResistor>()) {
    double r = f->r;
    return [p, drive, r](double t, const double* y, double* dy) {
      FieldValue fv = vector_field(p, drive.value(t), r, CircuitState{y[0], y[1]});
      dy[0] = fv.dx_dt;
      dy[1] = fv.dq_dt;
    };
  }
  if (const KernelMemristor* m = series.get_if<KernelMemristor>()) {
    KernelMemristor km = *m;
    // state: (x, q, r, s)
    return [p, drive, km](double t, const double* y, double* dy) {
      CircuitState s{y[0], y[1]};
      double r = std::max(y[2], km.r_min);
      double V = drive.value(t);
      FieldValue fv = vector_field(p, V, r, s);
      double i_r = series_current(p, V, r, s);
      dy[0] = fv.dx_dt;
      dy[1] = fv.dq_dt;
      double dr = -km.alpha1 * i_r + km.lambda1 * y[3];
      if (y[2] <= km.r_min && dr < 0.0) dr = 0.0;  // pinned at the bound
      dy[2] = dr;
      dy[3] = (km.r0 - y[2]) - km.gamma_kernel * y[3];
    };
  }
  const ThresholdMemristor& tm = *series.get_if<ThresholdMemristor>();
  // state: (x, q, r)
  return [p, drive, tm](double t, const double* y, double* dy) {
    CircuitState s{y[0], y[1]};
    double r = std::max(y[2], tm.r_min);
    double V = drive.value(t);
    FieldValue fv = vector_field(p, V, r, s);
    double i_r = series_current(p, V, r, s);
    dy[0] = fv.dx_dt;
    dy[1] = fv.dq_dt;
    double sg = std::atan(tm.lambda_prime * (i_r - tm.i_thresh)) / kPi + 0.5;
    double dr = tm.alpha2 * r * r * sg - tm.lambda2 * r * (1.0 - sg);
    if (y[2] <= tm.r_min && dr < 0.0) dr = 0.0;
    dy[2] = dr;
  };
}

Projector make_circuit_projector(const SeriesElement& series) {
  double r_min = 0.0;
  if (const KernelMemristor* m = series.get_if<KernelMemristor>())
    r_min = m->r_min;
  else if (const ThresholdMemristor* m = series.get_if<ThresholdMemristor>())
    r_min = m->r_min;
  else
    return nullptr;
  return [r_min](double, double* y) {
    if (y[2] < r_min) {
      y[2] = r_min;
      return true;
    }
    return false;
  };
}

std::vector<double> initial_state(const SeriesElement& series,
                                  const CircuitState& init) {
  std::vector<double> y0{init.x, init.q};
  if (series.get_if<KernelMemristor>()) {
    y0.push_back(series.initial_resistance());
    y0.push_back(0.0);  // kernel history integral starts empty
  } else if (series.get_if<ThresholdMemristor>()) {
    y0.push_back(series.initial_resistance());
  }
  return y0;
}

CircuitTrace simulate_circuit(const ModelParams& p, const Drive& drive,
                              const SeriesElement& series,
                              const CircuitState& init, double T,
                              const IntegratorConfig& cfg, double dt_out) {
  p.validate();
  drive.validate();
  series.validate();
  if (!(T > 0.0)) throw Error(ErrorCode::Validation, "requires T > 0");
  if (!(dt_out > 0.0) || dt_out > T)
    throw Error(ErrorCode::Validation, "requires 0 < dt_out <= T");
  check_domain(p, init.x);

  const bool fixed = series.get_if<FixedResistor>() != nullptr;
  const double r_fixed = fixed ? series.get_if<FixedResistor>()->r : 0.0;
  double r_min = 0.0;
  if (const KernelMemristor* m = series.get_if<KernelMemristor>())
    r_min = m->r_min;
  else if (const ThresholdMemristor* m = series.get_if<ThresholdMemristor>())
    r_min = m->r_min;

  // land the final sample exactly on the output grid
  std::size_t n_out = static_cast<std::size_t>(std::llround(T / dt_out));
  if (n_out < 1) n_out = 1;
  double t_end = static_cast<double>(n_out) * dt_out;

  CircuitTrace trace;
  trace.dt = dt_out;
  trace.t.reserve(n_out + 1);

  auto on_sample = [&](double t, const double* y) {
    CircuitState s{y[0], y[1]};
    double V = drive.value(t);
    double v_c = memcap_voltage(p, s);
    double r = fixed ? r_fixed : std::max(y[2], r_min);
    trace.t.push_back(t);
    trace.x.push_back(s.x);
    trace.q.push_back(s.q);
    trace.v_c.push_back(v_c);
    trace.i_m.push_back(v_c / memristance(p, s.x));
    trace.i_r.push_back((V - v_c) / r);
    trace.r_series.push_back(r);
    trace.v_drive.push_back(V);
  };

  trace.stats = integrate_sampled(make_circuit_rhs(p, drive, series),
                                  initial_state(series, init), 0.0, t_end, cfg,
                                  dt_out, on_sample,
                                  make_circuit_projector(series));
  return trace;
}

void CircuitTrace::write_csv(const std::string& path, int precision) const {
  CsvWriter w(path, precision);
  w.header({"t", "x", "q", "V_C", "I_M", "I_r", "r_series", "V_drive"});
  for (std::size_t i = 0; i < size(); ++i)
    w.row({t[i], x[i], q[i], v_c[i], i_m[i], i_r[i], r_series[i], v_drive[i]});
}

}  // namespace memcap
