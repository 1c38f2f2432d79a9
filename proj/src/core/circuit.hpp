#pragma once

// Circuit-level simulation: the planar (x, q) system for a fixed series
// resistor, and the augmented systems for the two series-memristor variants.
// Output is a uniformly resampled trace with the derived signals used by
// the analysis modules.

#include <cstdint>
#include <string>
#include <vector>

#include "core/model.hpp"
#include "core/ode.hpp"

namespace memcap {

struct CircuitTrace {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> q;
  std::vector<double> v_c;       // q (d - x)
  std::vector<double> i_m;       // V_C / R(x)
  std::vector<double> i_r;       // (V - V_C) / r_series
  std::vector<double> r_series;  // clamped at r_min for memristor variants
  std::vector<double> v_drive;
  IntegrationStats stats;

  std::size_t size() const { return t.size(); }
  void write_csv(const std::string& path, int precision = 17) const;
};

/// Full circuit RHS as a flat ODE: state (x, q) plus the series-element
/// states when present.  Usable directly with the integrator.
Rhs make_circuit_rhs(const ModelParams& p, const Drive& drive,
                     const SeriesElement& series);
Projector make_circuit_projector(const SeriesElement& series);
std::vector<double> initial_state(const SeriesElement& series,
                                  const CircuitState& init);

CircuitTrace simulate_circuit(const ModelParams& p, const Drive& drive,
                              const SeriesElement& series,
                              const CircuitState& init, double T,
                              const IntegratorConfig& cfg,
                              double dt_out = 1.0e-5);

}  // namespace memcap
