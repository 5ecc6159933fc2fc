#pragma once

#include <string>
#include <vector>

#include "slung/scenario.hpp"

namespace slung {

struct BatchResult {
  std::string name;
  bool ok = false;
  std::string error;
  Trajectory traj;
  double wall_seconds = 0;
};

// Runs independent scenarios; OpenMP over scenarios unless parallel=false.
// One rollout is always sequential, so results are identical either way.
std::vector<BatchResult> run_batch(const std::vector<Scenario>& scenarios,
                                   bool parallel = true);

// Monte-Carlo sweep of the attitude error-function bounds. Deterministic for
// any thread count (per-sample seeding); serial path kept as the reference.
struct SweepResult {
  long samples = 0;
  long lower_bound_violations = 0;   // b1 ||e_R||^2 <= Psi
  long upper_bound_violations = 0;   // Psi <= b2 ||e_R||^2 when Psi < cap
  long upper_bound_checked = 0;
  double max_hatvee_error = 0;       // vee(hat(v)) - v and hat(v)w vs cross
  double max_orthonormality = 0;     // exp_so3 output drift
  double max_psi_negative = 0;       // most negative Psi encountered
};
SweepResult manifold_sweep(long samples, const ErrorGainMatrix& G,
                           double psi_cap, unsigned seed, bool parallel);

}  // namespace slung
