#include "slung/state.hpp"

#include <string>

namespace slung {

namespace {

void put_vec3(Eigen::VectorXd& out, int& k, const Vec3& v) {
  out.segment<3>(k) = v;
  k += 3;
}

void put_rot(Eigen::VectorXd& out, int& k, const Rotation& R) {
  const Mat3& m = R.matrix();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out(k++) = m(r, c);
}

void vec3_names(std::vector<std::string>& out, const std::string& base) {
  out.push_back(base + "_1");
  out.push_back(base + "_2");
  out.push_back(base + "_3");
}

void rot_names(std::vector<std::string>& out, const std::string& base) {
  for (int r = 1; r <= 3; ++r)
    for (int c = 1; c <= 3; ++c)
      out.push_back(base + "_" + std::to_string(r) + std::to_string(c));
}

}  // namespace

Eigen::VectorXd flatten(const SingleQuadState& s) {
  Eigen::VectorXd out(18);
  int k = 0;
  put_vec3(out, k, s.x);
  put_vec3(out, k, s.v);
  put_rot(out, k, s.R);
  put_vec3(out, k, s.Omega);
  return out;
}

Eigen::VectorXd flatten(const ChainState& s) {
  Eigen::VectorXd out(18 + 6 * static_cast<int>(s.links.size()));
  int k = 0;
  put_vec3(out, k, s.x);
  put_vec3(out, k, s.v);
  put_rot(out, k, s.R);
  put_vec3(out, k, s.Omega);
  for (const auto& b : s.links) {
    put_vec3(out, k, b.q);
    put_vec3(out, k, b.omega);
  }
  return out;
}

Eigen::VectorXd flatten(const MultiQuadState& s) {
  int dim = 18;
  for (const auto& q : s.quads)
    dim += 12 + 6 * static_cast<int>(q.links.size());
  Eigen::VectorXd out(dim);
  int k = 0;
  put_vec3(out, k, s.x0);
  put_vec3(out, k, s.v0);
  put_rot(out, k, s.R0);
  put_vec3(out, k, s.Omega0);
  for (const auto& q : s.quads) {
    put_rot(out, k, q.R);
    put_vec3(out, k, q.Omega);
    for (const auto& b : q.links) {
      put_vec3(out, k, b.q);
      put_vec3(out, k, b.omega);
    }
  }
  return out;
}

Eigen::VectorXd flatten(const SystemState& s) {
  return std::visit([](const auto& v) { return flatten(v); }, s);
}

std::vector<std::string> state_column_names(const SystemState& s) {
  std::vector<std::string> out;
  if (std::holds_alternative<SingleQuadState>(s)) {
    vec3_names(out, "x");
    vec3_names(out, "v");
    rot_names(out, "R");
    vec3_names(out, "Omega");
  } else if (const auto* c = std::get_if<ChainState>(&s)) {
    vec3_names(out, "x");
    vec3_names(out, "v");
    rot_names(out, "R");
    vec3_names(out, "Omega");
    for (size_t i = 0; i < c->links.size(); ++i) {
      vec3_names(out, "q" + std::to_string(i + 1));
      vec3_names(out, "w" + std::to_string(i + 1));
    }
  } else {
    const auto& m = std::get<MultiQuadState>(s);
    vec3_names(out, "x0");
    vec3_names(out, "v0");
    rot_names(out, "R0");
    vec3_names(out, "Omega0");
    for (int i = 0; i < m.n_quads(); ++i) {
      const std::string qi = std::to_string(i + 1);
      rot_names(out, "R" + qi);
      vec3_names(out, "Omega" + qi);
      for (size_t j = 0; j < m.quads[i].links.size(); ++j) {
        vec3_names(out, "q" + qi + "_" + std::to_string(j + 1));
        vec3_names(out, "w" + qi + "_" + std::to_string(j + 1));
      }
    }
  }
  return out;
}

bool all_finite(const SystemState& s) { return flatten(s).allFinite(); }

double state_inf_norm(const SystemState& s) {
  return flatten(s).cwiseAbs().maxCoeff();
}

}  // namespace slung
