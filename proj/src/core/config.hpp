#pragma once

// Flat dotted-key configuration over the full simulation setup.  Defaults
// alone reproduce the reference parameter set (d=8, x_c=6.4, beta=5e4,
// k=5/6, r=1e-3, rho0=1.25e-4, gamma=1.25e-4).  A JSON object (nested or
// flat) is accepted as an alternative input and goes through the same
// schema validation.

#include <map>
#include <string>
#include <vector>

#include "core/circuit.hpp"
#include "core/model.hpp"
#include "core/ode.hpp"

namespace memcap {

struct SimParams {
  double T = 1.5;
  double x0 = 0.0;
  double q0 = 0.0;
  double dt_out = 1.0e-5;
};

struct FullConfig {
  ModelParams model;
  double beta2 = 50.0;  // applied when model.memristance = type2
  double r = 1.0e-3;    // series resistance when series.kind = fixed
  std::string series_kind = "fixed";  // fixed | kernel | threshold
  KernelMemristor kernel;
  ThresholdMemristor threshold;
  std::string drive_kind = "dc";  // dc | dc_ac | piecewise
  double drive_v = 8.0829;
  DcPlusAcDrive drive_ac{8.0829, 0.1155, 1000.0};
  std::vector<PiecewiseSegment> drive_segments;
  IntegratorConfig integrator;
  SimParams sim;

  SeriesElement series() const;
  Drive drive() const;
  CircuitState initial_state() const { return {sim.x0, sim.q0}; }
  void validate() const;
};

FullConfig default_config();

/// All recognized dotted keys, in schema order.
const std::vector<std::string>& config_keys();

/// Set one key from its text representation; throws Error(Config) for an
/// unknown key (the message lists the valid keys) or a type mismatch, and
/// Error(Validation) if the resulting value violates an invariant.
void apply_override(FullConfig& cfg, const std::string& key,
                    const std::string& value);

std::string get_value(const FullConfig& cfg, const std::string& key);

/// Load `path` over the defaults.  Files ending in .json are parsed as JSON
/// (nested objects are flattened to dotted keys); anything else is parsed as
/// `key = value` lines with '#' comments.
FullConfig load_config_file(const std::string& path);
void apply_config_text(FullConfig& cfg, const std::string& text);

}  // namespace memcap
