#pragma once

#include <map>
#include <string>
#include <vector>

#include "slung/control.hpp"
#include "slung/dynamics.hpp"

namespace slung {

struct Scenario;  // scenario.hpp

struct SimConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  int reprojection_every = 1;
  int record_every = 1;

  void validate() const;
  int n_steps() const;
};

// Column-oriented rollout record. Metric columns are fixed per model kind;
// the schema version covers column names and their order.
inline constexpr int kTrajectorySchemaVersion = 1;

struct Trajectory {
  std::vector<double> t;
  std::vector<std::string> state_names;
  std::vector<std::string> control_names;
  std::vector<std::string> metric_names;
  std::vector<VecX> state;
  std::vector<VecX> control;
  std::vector<VecX> metric;

  int samples() const { return static_cast<int>(t.size()); }
  int metric_index(const std::string& name) const;
  std::vector<double> series(const std::string& metric_name) const;
};

// ---------------------------------------------------------------------------
// Fixed-step RK4 with zero-order-hold inputs. Rotations advance through the
// exponential map inside the stage reconstruction; bearings integrate in the
// (q, omega) embedding with the unit constraint restored by reprojection
// after the step.

SingleQuadState step_single(const SingleQuadState& s, const SingleModel& model,
                            double f, const Vec3& M, const DisturbanceSet& d,
                            double dt, bool reproject = true);
ChainState step_chain(const ChainState& s, const ChainModel& model, double f,
                      const Vec3& M, const DisturbanceSet& d, double dt,
                      bool reproject = true, double* rcond = nullptr);
MultiQuadState step_multi(const MultiQuadState& s, const MultiModel& model,
                          const std::vector<double>& f,
                          const std::vector<Vec3>& M, const DisturbanceSet& d,
                          double dt, bool reproject = true,
                          double* rcond = nullptr);

/// Full closed-loop rollout of a prepared scenario. Deterministic; throws
/// NonFinite/Diverged/SingularMass with a timestamp on numerical failure.
Trajectory run(const Scenario& scenario);

// ---------------------------------------------------------------------------
// Summary statistics per metric series.

struct SeriesSummary {
  double terminal = 0;
  double peak = 0;           // max absolute value
  double steady_state = 0;   // mean absolute value over the last 10%
  double settling_time = -1; // first time the series stays below threshold
};

struct MetricsSummary {
  std::map<std::string, SeriesSummary> series;
  double settle_threshold = 0;
};

MetricsSummary metrics(const Trajectory& traj, double settle_threshold = 0.05);

}  // namespace slung
