#pragma once

#include <variant>
#include <vector>

#include "slung/geometry.hpp"
#include "slung/params.hpp"

namespace slung {

struct SingleQuadState {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Rotation R;
  Vec3 Omega = Vec3::Zero();
};

struct ChainState {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Rotation R;
  Vec3 Omega = Vec3::Zero();
  std::vector<Bearing> links;
};

// One quadrotor plus its cable in the multi-body payload system.
struct QuadCableState {
  Rotation R;
  Vec3 Omega = Vec3::Zero();
  std::vector<Bearing> links;
};

struct MultiQuadState {
  Vec3 x0 = Vec3::Zero();
  Vec3 v0 = Vec3::Zero();
  Rotation R0;
  Vec3 Omega0 = Vec3::Zero();
  std::vector<QuadCableState> quads;

  int n_quads() const { return static_cast<int>(quads.size()); }
  int total_links() const {
    int n = 0;
    for (const auto& q : quads) n += static_cast<int>(q.links.size());
    return n;
  }
};

using SystemState =
    std::variant<SingleQuadState, ChainState, MultiQuadState>;

// Flat row layouts; rotations stored row-major. Used by the CSV emitter and
// the bit-exactness tests.
Eigen::VectorXd flatten(const SingleQuadState& s);
Eigen::VectorXd flatten(const ChainState& s);
Eigen::VectorXd flatten(const MultiQuadState& s);
Eigen::VectorXd flatten(const SystemState& s);
std::vector<std::string> state_column_names(const SystemState& s);

bool all_finite(const SystemState& s);
double state_inf_norm(const SystemState& s);

}  // namespace slung
