#include "core/model.hpp"

#include <cmath>

namespace memcap {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorCode::Validation, msg);
}

}  // namespace

void ModelParams::validate() const {
  require(std::isfinite(d) && std::isfinite(x_c) && std::isfinite(beta) &&
              std::isfinite(k) && std::isfinite(rho0) &&
              std::isfinite(gamma_damp) && std::isfinite(x_guard),
          "model parameters must be finite");
  require(x_c > 0.0 && x_c < d, "requires d > x_c > 0, got d=" +
                                    std::to_string(d) +
                                    ", x_c=" + std::to_string(x_c));
  require(k > 0.0, "requires k > 0");
  require(gamma_damp > 0.0, "requires gamma_damp > 0");
  require(rho0 > 0.0, "requires rho0 > 0");
  require(beta > 0.0, "requires beta > 0");
  require(x_guard > 0.0 && x_guard < d, "requires 0 < x_guard < d");
  if (const TypeII* t2 = std::get_if<TypeII>(&memristance))
    require(t2->beta2 > 0.0, "requires beta2 > 0");
}

double Drive::value(double t) const {
  if (const DcDrive* d = std::get_if<DcDrive>(&rep_)) return d->V;
  if (const DcPlusAcDrive* d = std::get_if<DcPlusAcDrive>(&rep_))
    return d->V_dc + d->delta_V * std::sin(d->omega_source * t);
  const PiecewiseDcDrive& pw = std::get<PiecewiseDcDrive>(rep_);
  double t_end = 0.0;
  for (const PiecewiseSegment& seg : pw.segments) {
    t_end += seg.duration;
    if (t < t_end) return seg.V;
  }
  return pw.segments.back().V;  // last segment extends to infinity
}

void Drive::validate() const {
  if (const DcPlusAcDrive* d = std::get_if<DcPlusAcDrive>(&rep_)) {
    require(d->delta_V >= 0.0, "requires delta_V >= 0");
    require(d->omega_source >= 0.0, "requires omega_source >= 0");
  } else if (const PiecewiseDcDrive* pw = std::get_if<PiecewiseDcDrive>(&rep_)) {
    require(!pw->segments.empty(), "piecewise drive needs at least one segment");
    for (const PiecewiseSegment& seg : pw->segments)
      require(seg.duration > 0.0, "piecewise segment durations must be > 0");
  }
}

void SeriesElement::validate() const {
  if (const FixedResistor* f = std::get_if<FixedResistor>(&rep_)) {
    require(f->r > 0.0, "requires series resistance r > 0");
  } else if (const KernelMemristor* m = std::get_if<KernelMemristor>(&rep_)) {
    require(m->r0 > 0.0 && m->r_min > 0.0 && m->init_r > 0.0,
            "requires r0, r_min, init_r > 0");
    require(m->init_r >= m->r_min, "requires init_r >= r_min");
    require(m->lambda1 > 0.0, "requires lambda1 > 0");
    require(m->gamma_kernel >= 0.0, "requires gamma_kernel >= 0");
  } else {
    const ThresholdMemristor& t = std::get<ThresholdMemristor>(rep_);
    require(t.r_min > 0.0 && t.init_r > 0.0, "requires r_min, init_r > 0");
    require(t.init_r >= t.r_min, "requires init_r >= r_min");
    require(t.lambda2 > 0.0, "requires lambda2 > 0");
    require(t.lambda_prime > 0.0, "requires lambda_prime > 0");
  }
}

int SeriesElement::n_extra_states() const {
  if (std::holds_alternative<FixedResistor>(rep_)) return 0;
  if (std::holds_alternative<KernelMemristor>(rep_)) return 2;
  return 1;
}

double SeriesElement::initial_resistance() const {
  if (const FixedResistor* f = std::get_if<FixedResistor>(&rep_)) return f->r;
  if (const KernelMemristor* m = std::get_if<KernelMemristor>(&rep_))
    return m->init_r;
  return std::get<ThresholdMemristor>(rep_).init_r;
}

void check_domain(const ModelParams& p, double x) {
  if (!(x < p.d - p.x_guard))
    throw Error(ErrorCode::Domain,
                "displacement x=" + std::to_string(x) +
                    " is not below d - x_guard = " +
                    std::to_string(p.d - p.x_guard));
}

double capacitance(const ModelParams& p, double x) {
  check_domain(p, x);
  return 1.0 / (p.d - x);
}

namespace {

inline double arctan_step(double sharp, double u) {
  // arctan(sharp*u)/pi + 0.5, a smoothed unit step falling across u = 0
  return std::atan(sharp * u) / kPi + 0.5;
}
inline double arctan_step_du(double sharp, double u) {
  return sharp / (kPi * (1.0 + sharp * sharp * u * u));
}

}  // namespace

double memristance(const ModelParams& p, double x) {
  check_domain(p, x);
  double gap = p.d - x;
  if (const TypeII* t2 = std::get_if<TypeII>(&p.memristance))
    return p.rho0 * gap * (9.0 * arctan_step(t2->beta2, p.x_c - x) + 1.0);
  return arctan_step(p.beta, p.x_c - x) + p.rho0 * gap;
}

double memristance_dx(const ModelParams& p, double x) {
  check_domain(p, x);
  double gap = p.d - x;
  if (const TypeII* t2 = std::get_if<TypeII>(&p.memristance)) {
    double g = 9.0 * arctan_step(t2->beta2, p.x_c - x) + 1.0;
    double dg = -9.0 * arctan_step_du(t2->beta2, p.x_c - x);
    return p.rho0 * (-g + gap * dg);
  }
  return -arctan_step_du(p.beta, p.x_c - x) - p.rho0;
}

PotentialValue potential_and_gradient(const ModelParams& p, double x) {
  check_domain(p, x);
  double u = 1.0 / (p.d - x);
  double u2 = u * u;
  double u3 = u2 * u;
  double u6 = u3 * u3;
  double u7 = u6 * u;
  double u12 = u6 * u6;
  double u13 = u12 * u;
  PotentialValue out;
  out.U = 0.5 * p.k * x * x + 4.0 * (u12 - u6);
  out.dU_dx = p.k * x + 4.0 * (12.0 * u13 - 6.0 * u7);
  return out;
}

double potential_curvature(const ModelParams& p, double x) {
  check_domain(p, x);
  double u = 1.0 / (p.d - x);
  double u2 = u * u;
  double u4 = u2 * u2;
  double u8 = u4 * u4;
  double u14 = u8 * u4 * u2;
  return p.k + 4.0 * (156.0 * u14 - 42.0 * u8);
}

double memcap_voltage(const ModelParams& p, const CircuitState& s) {
  check_domain(p, s.x);
  return s.q * (p.d - s.x);
}

FieldValue vector_field(const ModelParams& p, double V, double r,
                        const CircuitState& s) {
  double v_c = memcap_voltage(p, s);
  double dU = potential_and_gradient(p, s.x).dU_dx;
  FieldValue f;
  f.dx_dt = (s.q * s.q - dU) / p.gamma_damp;
  f.dq_dt = (V - v_c) / r - v_c / memristance(p, s.x);
  if (!std::isfinite(f.dx_dt) || !std::isfinite(f.dq_dt))
    throw Error(ErrorCode::NonFinite, "vector field is not finite at x=" +
                                          std::to_string(s.x) +
                                          ", q=" + std::to_string(s.q));
  return f;
}

FieldValue vector_field(const ModelParams& p, const Drive& drive,
                        const SeriesElement& series, const CircuitState& s,
                        double t) {
  const FixedResistor* f = series.get_if<FixedResistor>();
  if (!f)
    throw Error(ErrorCode::InvalidArg,
                "planar vector field requires a fixed series resistor; "
                "memristor variants are handled by the augmented circuit RHS");
  return vector_field(p, drive.value(t), f->r, s);
}

double series_current(const ModelParams& p, double V, double r_eff,
                      const CircuitState& s) {
  return (V - memcap_voltage(p, s)) / r_eff;
}

double series_current(const ModelParams& p, const Drive& drive,
                      const SeriesElement& series, const CircuitState& s,
                      double t) {
  return series_current(p, drive.value(t), series.initial_resistance(), s);
}

Jacobian2 jacobian(const ModelParams& p, double V, double r,
                   const CircuitState& s) {
  (void)V;
  check_domain(p, s.x);
  double v_c = memcap_voltage(p, s);
  double gap = p.d - s.x;
  double R = memristance(p, s.x);
  double dR = memristance_dx(p, s.x);
  Jacobian2 j;
  j.a11 = -potential_curvature(p, s.x) / p.gamma_damp;
  j.a12 = 2.0 * s.q / p.gamma_damp;
  j.a21 = s.q / r + s.q / R + v_c * dR / (R * R);
  j.a22 = -gap * (1.0 / r + 1.0 / R);
  return j;
}

Jacobian2 jacobian_fd(const ModelParams& p, double V, double r,
                      const CircuitState& s, double h) {
  auto f = [&](double x, double q) {
    return vector_field(p, V, r, CircuitState{x, q});
  };
  FieldValue fx_p = f(s.x + h, s.q);
  FieldValue fx_m = f(s.x - h, s.q);
  FieldValue fq_p = f(s.x, s.q + h);
  FieldValue fq_m = f(s.x, s.q - h);
  Jacobian2 j;
  j.a11 = (fx_p.dx_dt - fx_m.dx_dt) / (2.0 * h);
  j.a12 = (fq_p.dx_dt - fq_m.dx_dt) / (2.0 * h);
  j.a21 = (fx_p.dq_dt - fx_m.dq_dt) / (2.0 * h);
  j.a22 = (fq_p.dq_dt - fq_m.dq_dt) / (2.0 * h);
  return j;
}

}  // namespace memcap
