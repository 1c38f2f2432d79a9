#pragma once

// Named, reproducible experiment runners.  Each experiment runs a fixed
// scenario from the configured parameter set, writes CSV/SVG artifacts into
// its own directory, and evaluates built-in checks whose results (measured
// value, expectation, tolerance, reference tag) land in a JSON report.
// Check failures are recorded, never fatal; artifacts contain no timestamps
// so re-running an experiment reproduces identical files.

#include <string>
#include <vector>

#include "core/config.hpp"

namespace memcap {

struct CheckResult {
  std::string name;
  std::string measured;
  std::string expected;
  bool pass = false;
  std::string reference;  // figure/table tag the check traces back to
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;  // snapshot
  std::vector<CheckResult> checks;
  std::vector<std::string> artifacts;
  bool all_passed() const;
  std::string to_json() const;
};

struct ExperimentFormats {
  bool csv = true;
  bool json = true;
  bool svg = false;
};

const std::vector<std::string>& experiment_names();
bool is_experiment(const std::string& name);

/// Run a registered experiment with `base` parameters (model/integrator
/// fields are honored; per-experiment drives and durations come from the
/// registry but respect explicit overrides where meaningful).  Writes
/// artifacts under out_dir/<name>/ and always writes report.json there.
ExperimentReport run_experiment(const std::string& name,
                                const FullConfig& base,
                                const std::string& out_dir,
                                const ExperimentFormats& formats = {});

}  // namespace memcap
