#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slung/control.hpp"
#include "slung/sim.hpp"

namespace slung {

enum class ModelKind { kSingleQuad, kChain, kMultiQuad };

// One flight-mode segment of a single-quadrotor scenario. Attitude segments
// spin about a fixed axis; position segments hover at a setpoint.
struct FlightPhase {
  enum class Kind { kAttitudeSpin, kPositionHover };
  Kind kind = Kind::kPositionHover;
  double t_start = 0;
  // attitude spin
  Vec3 axis = Vec3(1, 0, 0);
  double rate = 0;        // rad/s about axis
  double thrust_cmd = 0;  // held total thrust during the attitude segment
  // position hover
  Vec3 xd = Vec3::Zero();
  Vec3 b1d = Vec3(1, 0, 0);
};

struct Scenario {
  std::string name;
  ModelKind kind = ModelKind::kSingleQuad;

  // Parameters (which ones apply depends on kind).
  QuadParams quad;
  CableParams cable;
  PayloadParams payload;
  std::vector<QuadParams> quads;
  std::vector<CableParams> cables;
  double gravity = kDefaultGravity;

  DisturbanceSet dist;
  Gains gains;
  std::vector<double> kq;      // per-link gains (chain)
  std::vector<double> komega;
  bool adaptive = false;  // adaptive compensation terms on/off
  bool integral = false;  // integral compensation terms on/off

  // Gain synthesis for the payload system (no published gains).
  bool use_lqr = false;
  double lqr_q_pos = 1.0;   // weights on [x; xdot] blocks of Qw
  double lqr_q_vel = 1.0;
  double lqr_r = 1.0;

  SystemState initial;

  std::vector<FlightPhase> phases;  // single-quad mode schedule
  Vec3 xd = Vec3::Zero();           // chain setpoint
  Vec3 b1d = Vec3(1, 0, 0);
  Vec3 x0d = Vec3::Zero();          // payload setpoint
  std::vector<Vec3> b1d_multi;

  SimConfig sim;
  std::string out_dir;
  bool plots = true;

  void validate() const;
};

// Controller stack and model bundles derived from a scenario: stacked gain
// matrices assembled, Lyapunov weight solved, LQR synthesized when requested.
struct PreparedScenario {
  Scenario sc;
  std::optional<SingleModel> single;
  std::optional<ChainModel> chain;
  std::optional<MultiModel> multi;
  Gains gains;          // with K_x / K_xdot / K_z filled in
  MatX PB_t;            // (P Bss)^T for the translational integral
  MatX lyapunov_P;
  StateSpace closed_loop;
};
PreparedScenario prepare_scenario(const Scenario& sc);

// JSON round-trip. Unknown keys are rejected; invariant violations raise
// ValidationError with the offending key path.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text,
                             const std::string& origin = "<string>");
std::string scenario_to_json(const Scenario& sc);

// Built-in scenario registry (the study cases shipped with the library).
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

}  // namespace slung
