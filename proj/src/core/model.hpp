#pragma once

// Dimensionless model of the leaky memcapacitor: a movable-plate capacitor
// whose plate displacement x sets both the capacitance C(x) = 1/(d - x) and
// a parallel leakage resistance R(x), driven through a series element by a
// voltage source.  Units: sigma = R_m = eps*A = eps_l = 1, so d, x_c are in
// plate-gap units, resistances in units of R_m, energies in eps_l.  These
// normalization constants are fixed by the unit system and are not runtime
// parameters.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace memcap {

enum class ErrorCode {
  Ok = 0,
  Validation,
  Domain,
  StepBudgetExceeded,
  StepUnderflow,
  NonFinite,
  InsufficientSpikes,
  NoLimitCycle,
  DegenerateFixedPoint,
  BracketNotFound,
  UnknownExperiment,
  Config,
  Io,
  InvalidArg,
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

/// Memristance law selector.  Type I is the arctan step plus a residual
/// linear-in-gap term; type II scales the residual term by a 10:1 arctan
/// factor and uses its own (much softer) sharpness beta2.
struct TypeI {};
struct TypeII {
  double beta2 = 50.0;
};
using MemristanceKind = std::variant<TypeI, TypeII>;

struct ModelParams {
  double d = 8.0;            // plate gap at q = 0
  double x_c = 6.4;          // contact onset displacement
  double beta = 5.0e4;       // contact sharpness (type I)
  double k = 5.0 / 6.0;      // spring constant
  double rho0 = 1.25e-4;     // residual resistivity coefficient
  double gamma_damp = 1.25e-4;  // plate dissipation coefficient
  double x_guard = 1.0e-3;   // keep x below d - x_guard (potential is singular at d)
  MemristanceKind memristance = TypeI{};

  bool is_type2() const { return std::holds_alternative<TypeII>(memristance); }
  double x_max() const { return d - x_guard; }
  void validate() const;  // throws Error(Validation)
};

struct CircuitState {
  double x = 0.0;  // top-plate displacement, positive toward the bottom plate
  double q = 0.0;  // memcapacitor charge
};

// ---------------------------------------------------------------------------
// Drive: source voltage V(t), defined for all t >= 0.

struct DcDrive {
  double V = 0.0;
};
struct DcPlusAcDrive {
  double V_dc = 0.0;
  double delta_V = 0.0;
  double omega_source = 0.0;
};
struct PiecewiseSegment {
  double duration = 0.0;
  double V = 0.0;
};
struct PiecewiseDcDrive {
  std::vector<PiecewiseSegment> segments;  // last segment extends to infinity
};

class Drive {
public:
  Drive() : rep_(DcDrive{0.0}) {}
  explicit Drive(DcDrive d) : rep_(d) {}
  explicit Drive(DcPlusAcDrive d) : rep_(d) {}
  explicit Drive(PiecewiseDcDrive d) : rep_(std::move(d)) {}

  static Drive dc(double V) { return Drive(DcDrive{V}); }
  static Drive dc_plus_ac(double V_dc, double delta_V, double omega_source) {
    return Drive(DcPlusAcDrive{V_dc, delta_V, omega_source});
  }
  static Drive piecewise(std::vector<PiecewiseSegment> segs) {
    return Drive(PiecewiseDcDrive{std::move(segs)});
  }

  double value(double t) const;
  void validate() const;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&rep_);
  }
  const std::variant<DcDrive, DcPlusAcDrive, PiecewiseDcDrive>& rep() const {
    return rep_;
  }

private:
  std::variant<DcDrive, DcPlusAcDrive, PiecewiseDcDrive> rep_;
};

// ---------------------------------------------------------------------------
// Series element between the source and the memcapacitor.

struct FixedResistor {
  double r = 1.0e-3;
};

/// dr/dt = -alpha1*I_r + lambda1 * s,  ds/dt = (r0 - r) - gamma_kernel * s.
/// The auxiliary state s is the exponential-kernel history integral of
/// (r0 - r); this reduction is exact and keeps the right-hand side Markovian.
struct KernelMemristor {
  double alpha1 = 3.4641e-6;
  double lambda1 = 1.6e5;
  double gamma_kernel = 0.0;  // memory-kernel decay rate (not the plate damping)
  double r0 = 1.0e-3;
  double r_min = 0.8e-3;
  double init_r = 1.0e-3;
};

/// dr/dt = alpha2*r^2*sg - lambda2*r*(1 - sg) with the smoothed switch
/// sg = arctan(lambda_prime*(I_r - i_thresh))/pi + 0.5.
struct ThresholdMemristor {
  double alpha2 = 1.6e4;
  double lambda2 = 2.0e3;
  double i_thresh = 10.3923;
  double lambda_prime = 1.0e3;
  double r_min = 0.8e-3;
  double init_r = 1.0e-3;
};

class SeriesElement {
public:
  SeriesElement() : rep_(FixedResistor{}) {}
  explicit SeriesElement(FixedResistor e) : rep_(e) {}
  explicit SeriesElement(KernelMemristor e) : rep_(e) {}
  explicit SeriesElement(ThresholdMemristor e) : rep_(e) {}

  static SeriesElement fixed(double r) { return SeriesElement(FixedResistor{r}); }

  void validate() const;
  /// Extra ODE states beyond (x, q): 0 fixed, 2 kernel (r, s), 1 threshold (r).
  int n_extra_states() const;
  double initial_resistance() const;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&rep_);
  }

private:
  std::variant<FixedResistor, KernelMemristor, ThresholdMemristor> rep_;
};

// ---------------------------------------------------------------------------
// Constitutive laws and the planar vector field (fixed series resistor).

void check_domain(const ModelParams& p, double x);  // throws Error(Domain)

/// C(x) = 1/(d - x); strictly positive and increasing on the valid domain.
double capacitance(const ModelParams& p, double x);

/// Leakage resistance R(x) of the selected type; strictly positive.
double memristance(const ModelParams& p, double x);
double memristance_dx(const ModelParams& p, double x);

struct PotentialValue {
  double U;
  double dU_dx;
};
/// U(x) = k x^2 / 2 + 4 [ (d-x)^-12 - (d-x)^-6 ].
PotentialValue potential_and_gradient(const ModelParams& p, double x);
double potential_curvature(const ModelParams& p, double x);  // d2U/dx2

/// V_C = q (d - x); inverse of q = C(x) V_C.
double memcap_voltage(const ModelParams& p, const CircuitState& s);

struct FieldValue {
  double dx_dt;
  double dq_dt;
};

/// Planar field for a fixed series resistor r:
///   dx/dt = (q^2 - dU/dx) / gamma_damp
///   dq/dt = (V - V_C)/r - V_C/R(x)
FieldValue vector_field(const ModelParams& p, double V, double r,
                        const CircuitState& s);
FieldValue vector_field(const ModelParams& p, const Drive& drive,
                        const SeriesElement& series, const CircuitState& s,
                        double t);

/// Current through the series element, I_r = (V - V_C)/r_eff.
double series_current(const ModelParams& p, double V, double r_eff,
                      const CircuitState& s);
double series_current(const ModelParams& p, const Drive& drive,
                      const SeriesElement& series, const CircuitState& s,
                      double t);

struct Jacobian2 {
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
  double det() const { return a11 * a22 - a12 * a21; }
  double tr() const { return a11 + a22; }
  double delta() const {
    double t = tr();
    return t * t - 4.0 * det();
  }
};

/// Analytic partial derivatives of the planar field at (x, q).
Jacobian2 jacobian(const ModelParams& p, double V, double r,
                   const CircuitState& s);
/// Central-difference cross-check of the analytic Jacobian.
Jacobian2 jacobian_fd(const ModelParams& p, double V, double r,
                      const CircuitState& s, double h = 1.0e-7);

}  // namespace memcap
