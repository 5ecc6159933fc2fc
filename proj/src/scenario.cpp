#include "slung/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "slung/linearize.hpp"

namespace slung {

namespace {

using nlohmann::json;

const Vec3 kE3{0, 0, 1};
constexpr double kDegToRad = M_PI / 180.0;

Eigen::Matrix<double, 3, 2> cmat() {
  Eigen::Matrix<double, 3, 2> C;
  C << 1, 0, 0, 1, 0, 0;
  return C;
}

// --------------------------------------------------------------------------
// JSON helpers

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) {
      throw ParseError(path + ": unknown key \"" + key + "\"");
    }
  }
}

const json& require(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(path + ": missing required key \"" + key + "\"");
  }
  return *it;
}

double as_num(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected a number");
  return j.get<double>();
}

double num_or(const json& j, const char* key, double fallback,
              const std::string& path) {
  auto it = j.find(key);
  return it == j.end() ? fallback : as_num(*it, path + "." + key);
}

bool bool_or(const json& j, const char* key, bool fallback,
             const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) throw ParseError(path + "." + key + ": expected bool");
  return it->get<bool>();
}

Vec3 as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError(path + ": expected an array of 3 numbers");
  return {as_num(j[0], path), as_num(j[1], path), as_num(j[2], path)};
}

std::vector<double> as_dvec(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected an array");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(as_num(e, path));
  return out;
}

Mat3 as_mat3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError(path + ": expected a 3x3 array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const Vec3 row = as_vec3(j[r], path);
    m.row(r) = row.transpose();
  }
  return m;
}

Rotation as_rotation(const json& j, const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "identity") {
    return Rotation::identity();
  }
  if (j.is_object()) {
    check_keys(j, {"axis", "angle_deg"}, path);
    const Vec3 axis = as_vec3(require(j, "axis", path), path + ".axis");
    const double ang =
        as_num(require(j, "angle_deg", path), path + ".angle_deg");
    return exp_so3(ang * kDegToRad * axis.normalized());
  }
  try {
    return Rotation(as_mat3(j, path));
  } catch (const InvalidRotation& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json mat3_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r)
    rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

// --------------------------------------------------------------------------
// Sub-object parsers

QuadParams parse_quad(const json& j, const std::string& path) {
  check_keys(j, {"m", "J", "d", "c_tau_f", "f_rotor_max"}, path);
  QuadParams q;
  q.m = as_num(require(j, "m", path), path + ".m");
  q.J = as_mat3(require(j, "J", path), path + ".J");
  q.d = as_num(require(j, "d", path), path + ".d");
  q.c_tau_f = as_num(require(j, "c_tau_f", path), path + ".c_tau_f");
  q.f_rotor_max = num_or(j, "f_rotor_max", 0.0, path);
  return q;
}

json quad_json(const QuadParams& q) {
  json j;
  j["m"] = q.m;
  j["J"] = mat3_json(q.J);
  j["d"] = q.d;
  j["c_tau_f"] = q.c_tau_f;
  if (q.f_rotor_max > 0) j["f_rotor_max"] = q.f_rotor_max;
  return j;
}

CableParams parse_cable(const json& j, const std::string& path) {
  check_keys(j, {"link_masses", "link_lengths"}, path);
  CableParams c;
  c.link_masses = as_dvec(require(j, "link_masses", path), path);
  c.link_lengths = as_dvec(require(j, "link_lengths", path), path);
  return c;
}

json cable_json(const CableParams& c) {
  json j;
  j["link_masses"] = c.link_masses;
  j["link_lengths"] = c.link_lengths;
  return j;
}

DisturbanceSet parse_disturbance(const json& j, const std::string& path) {
  check_keys(j, {"delta_x", "delta_R", "theta_x", "theta_R", "W_mode"}, path);
  DisturbanceSet d;
  if (j.contains("delta_x")) d.delta_x = as_vec3(j["delta_x"], path);
  if (j.contains("delta_R")) d.delta_R = as_vec3(j["delta_R"], path);
  auto to_vecx = [&](const char* key) {
    const auto v = as_dvec(j[key], path + "." + key);
    return Eigen::Map<const VecX>(v.data(), v.size()).eval();
  };
  d.theta_x = j.contains("theta_x") ? to_vecx("theta_x") : VecX::Zero(3);
  d.theta_R = j.contains("theta_R") ? to_vecx("theta_R") : VecX::Zero(3);
  if (j.contains("W_mode")) {
    const std::string mode = j["W_mode"].get<std::string>();
    if (mode == "identity") {
      d.W_mode = UncertaintyMode::kIdentity;
    } else if (mode == "zero") {
      d.W_mode = UncertaintyMode::kZero;
    } else {
      throw ParseError(path + ".W_mode: expected \"identity\" or \"zero\"");
    }
  }
  return d;
}

Bearing parse_bearing(const json& j, const std::string& path) {
  check_keys(j, {"q", "omega"}, path);
  const Vec3 q = as_vec3(require(j, "q", path), path + ".q");
  const Vec3 w = j.contains("omega") ? as_vec3(j["omega"], path + ".omega")
                                     : Vec3::Zero();
  try {
    return Bearing(q, w);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::vector<Bearing> parse_links(const json& j, int expected,
                                 const std::string& path) {
  std::vector<Bearing> out;
  if (j.is_object()) {
    // {"angles_deg": [...], "toward": [1,0,0]} — tilt from vertical.
    check_keys(j, {"angles_deg", "toward"}, path);
    const auto angles = as_dvec(require(j, "angles_deg", path), path);
    const Vec3 toward = j.contains("toward")
                            ? as_vec3(j["toward"], path).normalized()
                            : Vec3(1, 0, 0);
    for (double a : angles) {
      const double rad = a * kDegToRad;
      out.emplace_back(std::cos(rad) * kE3 + std::sin(rad) * toward,
                       Vec3::Zero());
    }
  } else if (j.is_array()) {
    for (size_t i = 0; i < j.size(); ++i)
      out.push_back(parse_bearing(j[i], path + "[" + std::to_string(i) + "]"));
  } else {
    throw ParseError(path + ": expected link list or angle spec");
  }
  if (expected >= 0 && static_cast<int>(out.size()) != expected) {
    throw ValidationError(path + ": link count must match the cable (" +
                          std::to_string(expected) + ")");
  }
  return out;
}

json links_json(const std::vector<Bearing>& links) {
  json arr = json::array();
  for (const auto& b : links) {
    json e;
    e["q"] = vec3_json(b.q);
    e["omega"] = vec3_json(b.omega);
    arr.push_back(e);
  }
  return arr;
}

Gains parse_gains(const json& j, std::vector<double>* kq,
                  std::vector<double>* komega, const std::string& path) {
  check_keys(j,
             {"kx", "kv", "kR", "kOmega", "c1", "c2", "gamma_x", "gamma_R",
              "kI", "kz", "sigma", "B_theta", "kq", "komega"},
             path);
  Gains g;
  g.kx = num_or(j, "kx", 0, path);
  g.kv = num_or(j, "kv", 0, path);
  g.kR = num_or(j, "kR", 0, path);
  g.kOmega = num_or(j, "kOmega", 0, path);
  g.c1 = num_or(j, "c1", 0, path);
  g.c2 = num_or(j, "c2", 0, path);
  g.gamma_x = num_or(j, "gamma_x", 0, path);
  g.gamma_R = num_or(j, "gamma_R", 0, path);
  g.kI = num_or(j, "kI", 0, path);
  g.kz = num_or(j, "kz", 0, path);
  g.sigma = num_or(j, "sigma", 0, path);
  g.B_theta = num_or(j, "B_theta", 0, path);
  if (j.contains("kq")) *kq = as_dvec(j["kq"], path + ".kq");
  if (j.contains("komega")) *komega = as_dvec(j["komega"], path + ".komega");
  return g;
}

json gains_json(const Scenario& sc) {
  const Gains& g = sc.gains;
  json j;
  j["kx"] = g.kx;
  j["kv"] = g.kv;
  j["kR"] = g.kR;
  j["kOmega"] = g.kOmega;
  j["c1"] = g.c1;
  j["c2"] = g.c2;
  j["gamma_x"] = g.gamma_x;
  j["gamma_R"] = g.gamma_R;
  j["kI"] = g.kI;
  j["kz"] = g.kz;
  j["sigma"] = g.sigma;
  j["B_theta"] = g.B_theta;
  if (!sc.kq.empty()) j["kq"] = sc.kq;
  if (!sc.komega.empty()) j["komega"] = sc.komega;
  return j;
}

}  // namespace

// --------------------------------------------------------------------------

void Scenario::validate() const {
  sim.validate();
  dist.validate();
  if (name.empty()) throw ValidationError("scenario needs a name");
  switch (kind) {
    case ModelKind::kSingleQuad: {
      quad.validate();
      if (!std::holds_alternative<SingleQuadState>(initial))
        throw ValidationError("initial state must be a single-quad state");
      if (phases.empty())
        throw ValidationError("single-quad scenario needs flight phases");
      for (size_t i = 1; i < phases.size(); ++i) {
        if (!(phases[i].t_start > phases[i - 1].t_start))
          throw ValidationError("phase switch times must strictly increase");
      }
      break;
    }
    case ModelKind::kChain: {
      quad.validate();
      cable.validate();
      if (!std::holds_alternative<ChainState>(initial))
        throw ValidationError("initial state must be a chain state");
      const auto& st = std::get<ChainState>(initial);
      if (static_cast<int>(st.links.size()) != cable.n())
        throw ValidationError("initial link count must match the cable");
      if (!kq.empty() && static_cast<int>(kq.size()) != cable.n())
        throw ValidationError("kq must have one gain per link");
      if (!komega.empty() && static_cast<int>(komega.size()) != cable.n())
        throw ValidationError("komega must have one gain per link");
      break;
    }
    case ModelKind::kMultiQuad: {
      payload.validate();
      if (quads.empty() || quads.size() != cables.size() ||
          quads.size() != payload.attach_points.size())
        throw ValidationError(
            "quadrotor, cable, and attachment counts must match");
      for (const auto& q : quads) q.validate();
      for (const auto& c : cables) c.validate();
      if (!std::holds_alternative<MultiQuadState>(initial))
        throw ValidationError("initial state must be a multi-quad state");
      const auto& st = std::get<MultiQuadState>(initial);
      if (st.quads.size() != quads.size())
        throw ValidationError("initial state quad count mismatch");
      for (size_t i = 0; i < quads.size(); ++i) {
        if (static_cast<int>(st.quads[i].links.size()) != cables[i].n())
          throw ValidationError("initial link count must match cable " +
                                std::to_string(i + 1));
      }
      if (!b1d_multi.empty() && b1d_multi.size() != quads.size())
        throw ValidationError("b1d list must have one entry per quadrotor");
      break;
    }
  }
}

PreparedScenario prepare_scenario(const Scenario& sc_in) {
  Scenario sc = sc_in;
  sc.validate();

  PreparedScenario ps;
  ps.gains = sc.gains;
  const auto C = cmat();

  switch (sc.kind) {
    case ModelKind::kSingleQuad: {
      ps.single = SingleModel{sc.quad, sc.gravity};
      break;
    }
    case ModelKind::kChain: {
      ps.chain = ChainModel::make(sc.quad, sc.cable, sc.gravity);
      const int n = sc.cable.n();
      const int D = 3 + 2 * n;
      if (static_cast<int>(sc.kq.size()) != n ||
          static_cast<int>(sc.komega.size()) != n)
        throw ValidationError("chain scenario needs kq/komega per link");
      MatX Kx = MatX::Zero(3, D), Kxd = MatX::Zero(3, D),
           Kz = MatX::Zero(3, D);
      Kx.block<3, 3>(0, 0) = sc.gains.kx * Mat3::Identity();
      Kxd.block<3, 3>(0, 0) = sc.gains.kv * Mat3::Identity();
      Kz.block<3, 3>(0, 0) = sc.gains.kz * Mat3::Identity();
      // Per-link terms push the quadrotor after the horizontal link
      // displacement: du contribution +kq C C^T (q - e3) + kw C C^T qdot.
      // In the [C^T (e3 x q); C^T omega] state convention that is a block
      // -k C Rot with the quarter-turn Rot mapping C^T xi to C^T dq.
      Eigen::Matrix2d rot;
      rot << 0, 1, -1, 0;
      for (int i = 0; i < n; ++i) {
        Kx.block<3, 2>(0, 3 + 2 * i) = -sc.kq[i] * C * rot;
        Kxd.block<3, 2>(0, 3 + 2 * i) = -sc.komega[i] * C * rot;
      }
      ps.gains.K_x = Kx;
      ps.gains.K_xdot = Kxd;
      ps.gains.K_z = Kz;

      const LinearModel lm = linearize_chain(sc.quad, sc.cable, sc.gravity);
      ps.closed_loop = state_space(lm, Kx, Kxd);
      if (sc.integral) {
        ps.lyapunov_P = solve_lyapunov(ps.closed_loop.A,
                                       MatX::Identity(2 * D, 2 * D));
        ps.PB_t = ps.closed_loop.B.transpose() * ps.lyapunov_P;
      } else {
        ps.PB_t = MatX::Zero(D, 2 * D);
      }
      break;
    }
    case ModelKind::kMultiQuad: {
      ps.multi = MultiModel::make(sc.payload, sc.quads, sc.cables, sc.gravity);
      const int nq = static_cast<int>(sc.quads.size());
      const int D = 6 + 2 * ps.multi->total_links();

      const LinearModel lm =
          linearize_multi(sc.payload, sc.quads, sc.cables, sc.gravity);
      if (!sc.use_lqr)
        throw ValidationError("multi-quad scenarios use lqr gain synthesis");
      MatX Qw = MatX::Identity(2 * D, 2 * D);
      Qw.topLeftCorner(D, D) *= sc.lqr_q_pos;
      Qw.bottomRightCorner(D, D) *= sc.lqr_q_vel;
      const MatX Rw = sc.lqr_r * MatX::Identity(3 * nq, 3 * nq);
      const LqrGains k = synthesize_gains_lqr(lm, Qw, Rw);
      ps.gains.K_x = k.K_x;
      ps.gains.K_xdot = k.K_xdot;
      MatX Kz = MatX::Zero(3 * nq, D);
      for (int i = 0; i < nq; ++i)
        Kz.block<3, 3>(3 * i, 0) = sc.gains.kz * Mat3::Identity();
      ps.gains.K_z = Kz;

      ps.closed_loop = state_space(lm, ps.gains.K_x, ps.gains.K_xdot);
      if (sc.integral) {
        ps.lyapunov_P = solve_lyapunov(ps.closed_loop.A,
                                       MatX::Identity(2 * D, 2 * D));
        ps.PB_t = ps.closed_loop.B.transpose() * ps.lyapunov_P;
      } else {
        ps.PB_t = MatX::Zero(D, 2 * D);
      }
      if (sc.b1d_multi.empty()) sc.b1d_multi.assign(nq, Vec3(1, 0, 0));
      break;
    }
  }
  ps.sc = sc;
  return ps;
}

// --------------------------------------------------------------------------
// Parsing

namespace {

SystemState parse_initial(const json& j, const Scenario& sc,
                          const std::string& path) {
  switch (sc.kind) {
    case ModelKind::kSingleQuad: {
      check_keys(j, {"x", "v", "R", "Omega"}, path);
      SingleQuadState s;
      if (j.contains("x")) s.x = as_vec3(j["x"], path + ".x");
      if (j.contains("v")) s.v = as_vec3(j["v"], path + ".v");
      if (j.contains("R")) s.R = as_rotation(j["R"], path + ".R");
      if (j.contains("Omega")) s.Omega = as_vec3(j["Omega"], path + ".Omega");
      return s;
    }
    case ModelKind::kChain: {
      check_keys(j, {"x", "v", "R", "Omega", "links"}, path);
      ChainState s;
      if (j.contains("x")) s.x = as_vec3(j["x"], path + ".x");
      if (j.contains("v")) s.v = as_vec3(j["v"], path + ".v");
      if (j.contains("R")) s.R = as_rotation(j["R"], path + ".R");
      if (j.contains("Omega")) s.Omega = as_vec3(j["Omega"], path + ".Omega");
      s.links = parse_links(require(j, "links", path), sc.cable.n(),
                            path + ".links");
      return s;
    }
    case ModelKind::kMultiQuad: {
      check_keys(j, {"x0", "v0", "R0", "Omega0", "quads"}, path);
      MultiQuadState s;
      if (j.contains("x0")) s.x0 = as_vec3(j["x0"], path + ".x0");
      if (j.contains("v0")) s.v0 = as_vec3(j["v0"], path + ".v0");
      if (j.contains("R0")) s.R0 = as_rotation(j["R0"], path + ".R0");
      if (j.contains("Omega0"))
        s.Omega0 = as_vec3(j["Omega0"], path + ".Omega0");
      const json& qs = require(j, "quads", path);
      if (!qs.is_array() || qs.size() != sc.quads.size())
        throw ValidationError(path + ".quads: one entry per quadrotor");
      for (size_t i = 0; i < qs.size(); ++i) {
        const std::string qp = path + ".quads[" + std::to_string(i) + "]";
        check_keys(qs[i], {"R", "Omega", "links"}, qp);
        QuadCableState q;
        if (qs[i].contains("R")) q.R = as_rotation(qs[i]["R"], qp + ".R");
        if (qs[i].contains("Omega"))
          q.Omega = as_vec3(qs[i]["Omega"], qp + ".Omega");
        q.links = parse_links(require(qs[i], "links", qp), sc.cables[i].n(),
                              qp + ".links");
        s.quads.push_back(std::move(q));
      }
      return s;
    }
  }
  throw ParseError(path + ": bad model kind");
}

json initial_json(const Scenario& sc) {
  json j;
  switch (sc.kind) {
    case ModelKind::kSingleQuad: {
      const auto& s = std::get<SingleQuadState>(sc.initial);
      j["x"] = vec3_json(s.x);
      j["v"] = vec3_json(s.v);
      j["R"] = mat3_json(s.R.matrix());
      j["Omega"] = vec3_json(s.Omega);
      break;
    }
    case ModelKind::kChain: {
      const auto& s = std::get<ChainState>(sc.initial);
      j["x"] = vec3_json(s.x);
      j["v"] = vec3_json(s.v);
      j["R"] = mat3_json(s.R.matrix());
      j["Omega"] = vec3_json(s.Omega);
      j["links"] = links_json(s.links);
      break;
    }
    case ModelKind::kMultiQuad: {
      const auto& s = std::get<MultiQuadState>(sc.initial);
      j["x0"] = vec3_json(s.x0);
      j["v0"] = vec3_json(s.v0);
      j["R0"] = mat3_json(s.R0.matrix());
      j["Omega0"] = vec3_json(s.Omega0);
      json qs = json::array();
      for (const auto& q : s.quads) {
        json e;
        e["R"] = mat3_json(q.R.matrix());
        e["Omega"] = vec3_json(q.Omega);
        e["links"] = links_json(q.links);
        qs.push_back(e);
      }
      j["quads"] = qs;
      break;
    }
  }
  return j;
}

void parse_command(const json& j, Scenario& sc, const std::string& path) {
  switch (sc.kind) {
    case ModelKind::kSingleQuad: {
      check_keys(j, {"phases"}, path);
      const json& phases = require(j, "phases", path);
      for (size_t i = 0; i < phases.size(); ++i) {
        const std::string pp = path + ".phases[" + std::to_string(i) + "]";
        const json& p = phases[i];
        FlightPhase ph;
        const std::string type = require(p, "type", pp).get<std::string>();
        ph.t_start = num_or(p, "t_start", 0.0, pp);
        if (type == "attitude_spin") {
          check_keys(p, {"type", "t_start", "axis", "rate", "thrust"}, pp);
          ph.kind = FlightPhase::Kind::kAttitudeSpin;
          ph.axis = as_vec3(require(p, "axis", pp), pp + ".axis");
          ph.rate = as_num(require(p, "rate", pp), pp + ".rate");
          const json& th = require(p, "thrust", pp);
          if (th.is_string() && th.get<std::string>() == "hover") {
            ph.thrust_cmd = sc.quad.m * sc.gravity;
          } else {
            ph.thrust_cmd = as_num(th, pp + ".thrust");
          }
        } else if (type == "position_hover") {
          check_keys(p, {"type", "t_start", "xd", "b1d"}, pp);
          ph.kind = FlightPhase::Kind::kPositionHover;
          ph.xd = as_vec3(require(p, "xd", pp), pp + ".xd");
          if (p.contains("b1d")) ph.b1d = as_vec3(p["b1d"], pp + ".b1d");
        } else {
          throw ParseError(pp + ".type: unknown phase type \"" + type + "\"");
        }
        sc.phases.push_back(ph);
      }
      break;
    }
    case ModelKind::kChain: {
      check_keys(j, {"xd", "b1d"}, path);
      sc.xd = as_vec3(require(j, "xd", path), path + ".xd");
      if (j.contains("b1d")) sc.b1d = as_vec3(j["b1d"], path + ".b1d");
      break;
    }
    case ModelKind::kMultiQuad: {
      check_keys(j, {"x0d", "b1d"}, path);
      sc.x0d = as_vec3(require(j, "x0d", path), path + ".x0d");
      if (j.contains("b1d")) {
        const json& b = j["b1d"];
        if (b.is_array() && !b.empty() && b[0].is_array()) {
          for (size_t i = 0; i < b.size(); ++i)
            sc.b1d_multi.push_back(
                as_vec3(b[i], path + ".b1d[" + std::to_string(i) + "]"));
        } else {
          sc.b1d_multi.assign(sc.quads.size(), as_vec3(b, path + ".b1d"));
        }
      }
      break;
    }
  }
}

json command_json(const Scenario& sc) {
  json j;
  switch (sc.kind) {
    case ModelKind::kSingleQuad: {
      json phases = json::array();
      for (const auto& ph : sc.phases) {
        json p;
        p["t_start"] = ph.t_start;
        if (ph.kind == FlightPhase::Kind::kAttitudeSpin) {
          p["type"] = "attitude_spin";
          p["axis"] = vec3_json(ph.axis);
          p["rate"] = ph.rate;
          p["thrust"] = ph.thrust_cmd;
        } else {
          p["type"] = "position_hover";
          p["xd"] = vec3_json(ph.xd);
          p["b1d"] = vec3_json(ph.b1d);
        }
        phases.push_back(p);
      }
      j["phases"] = phases;
      break;
    }
    case ModelKind::kChain:
      j["xd"] = vec3_json(sc.xd);
      j["b1d"] = vec3_json(sc.b1d);
      break;
    case ModelKind::kMultiQuad: {
      j["x0d"] = vec3_json(sc.x0d);
      json b = json::array();
      for (const auto& v : sc.b1d_multi) b.push_back(vec3_json(v));
      j["b1d"] = b;
      break;
    }
  }
  return j;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text,
                             const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  check_keys(j,
             {"name", "model", "gravity", "quad", "cable", "payload", "quads",
              "cables", "disturbance", "gains", "adaptive", "integral", "lqr",
              "initial", "command", "sim", "output"},
             origin);

  Scenario sc;
  sc.name = require(j, "name", origin).get<std::string>();
  const std::string model = require(j, "model", origin).get<std::string>();
  if (model == "single_quad") {
    sc.kind = ModelKind::kSingleQuad;
  } else if (model == "quad_chain") {
    sc.kind = ModelKind::kChain;
  } else if (model == "multi_quad_payload") {
    sc.kind = ModelKind::kMultiQuad;
  } else {
    throw ParseError(origin + ".model: unknown model \"" + model + "\"");
  }
  sc.gravity = num_or(j, "gravity", kDefaultGravity, origin);

  if (sc.kind == ModelKind::kMultiQuad) {
    sc.payload.m0 =
        as_num(require(require(j, "payload", origin), "m0", origin + ".payload"),
               origin + ".payload.m0");
    const json& pj = j["payload"];
    check_keys(pj, {"m0", "J0", "attach_points"}, origin + ".payload");
    sc.payload.J0 = as_mat3(require(pj, "J0", origin + ".payload"),
                            origin + ".payload.J0");
    for (const auto& ap : require(pj, "attach_points", origin + ".payload"))
      sc.payload.attach_points.push_back(
          as_vec3(ap, origin + ".payload.attach_points"));
    for (const auto& qj : require(j, "quads", origin))
      sc.quads.push_back(parse_quad(qj, origin + ".quads"));
    for (const auto& cj : require(j, "cables", origin))
      sc.cables.push_back(parse_cable(cj, origin + ".cables"));
  } else {
    sc.quad = parse_quad(require(j, "quad", origin), origin + ".quad");
    if (sc.kind == ModelKind::kChain)
      sc.cable = parse_cable(require(j, "cable", origin), origin + ".cable");
  }

  if (j.contains("disturbance"))
    sc.dist = parse_disturbance(j["disturbance"], origin + ".disturbance");
  sc.gains =
      parse_gains(require(j, "gains", origin), &sc.kq, &sc.komega,
                  origin + ".gains");
  sc.adaptive = bool_or(j, "adaptive", false, origin);
  sc.integral = bool_or(j, "integral", false, origin);
  if (j.contains("lqr")) {
    check_keys(j["lqr"], {"q_pos", "q_vel", "r"}, origin + ".lqr");
    sc.use_lqr = true;
    sc.lqr_q_pos = num_or(j["lqr"], "q_pos", 1.0, origin + ".lqr");
    sc.lqr_q_vel = num_or(j["lqr"], "q_vel", 1.0, origin + ".lqr");
    sc.lqr_r = num_or(j["lqr"], "r", 1.0, origin + ".lqr");
  }
  sc.initial =
      parse_initial(require(j, "initial", origin), sc, origin + ".initial");
  parse_command(require(j, "command", origin), sc, origin + ".command");

  const json& sj = require(j, "sim", origin);
  check_keys(sj, {"dt", "t_final", "record_every", "reprojection_every"},
             origin + ".sim");
  sc.sim.dt = as_num(require(sj, "dt", origin + ".sim"), origin + ".sim.dt");
  sc.sim.t_final = as_num(require(sj, "t_final", origin + ".sim"),
                          origin + ".sim.t_final");
  sc.sim.record_every =
      static_cast<int>(num_or(sj, "record_every", 1, origin + ".sim"));
  sc.sim.reprojection_every =
      static_cast<int>(num_or(sj, "reprojection_every", 1, origin + ".sim"));

  if (j.contains("output")) {
    check_keys(j["output"], {"dir", "plots"}, origin + ".output");
    if (j["output"].contains("dir"))
      sc.out_dir = j["output"]["dir"].get<std::string>();
    sc.plots = bool_or(j["output"], "plots", true, origin + ".output");
  }

  sc.validate();
  return sc;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (buf.str().empty()) throw ParseError(path + ": empty file");
  return parse_scenario_text(buf.str(), path);
}

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  switch (sc.kind) {
    case ModelKind::kSingleQuad:
      j["model"] = "single_quad";
      j["quad"] = quad_json(sc.quad);
      break;
    case ModelKind::kChain:
      j["model"] = "quad_chain";
      j["quad"] = quad_json(sc.quad);
      j["cable"] = cable_json(sc.cable);
      break;
    case ModelKind::kMultiQuad: {
      j["model"] = "multi_quad_payload";
      json pj;
      pj["m0"] = sc.payload.m0;
      pj["J0"] = mat3_json(sc.payload.J0);
      json aps = json::array();
      for (const auto& ap : sc.payload.attach_points)
        aps.push_back(vec3_json(ap));
      pj["attach_points"] = aps;
      j["payload"] = pj;
      json qs = json::array(), cs = json::array();
      for (const auto& q : sc.quads) qs.push_back(quad_json(q));
      for (const auto& c : sc.cables) cs.push_back(cable_json(c));
      j["quads"] = qs;
      j["cables"] = cs;
      break;
    }
  }
  j["gravity"] = sc.gravity;

  json dj;
  dj["delta_x"] = vec3_json(sc.dist.delta_x);
  dj["delta_R"] = vec3_json(sc.dist.delta_R);
  dj["theta_x"] = std::vector<double>(sc.dist.theta_x.data(),
                                      sc.dist.theta_x.data() +
                                          sc.dist.theta_x.size());
  dj["theta_R"] = std::vector<double>(sc.dist.theta_R.data(),
                                      sc.dist.theta_R.data() +
                                          sc.dist.theta_R.size());
  dj["W_mode"] =
      sc.dist.W_mode == UncertaintyMode::kIdentity ? "identity" : "zero";
  j["disturbance"] = dj;

  j["gains"] = gains_json(sc);
  j["adaptive"] = sc.adaptive;
  j["integral"] = sc.integral;
  if (sc.use_lqr) {
    json lj;
    lj["q_pos"] = sc.lqr_q_pos;
    lj["q_vel"] = sc.lqr_q_vel;
    lj["r"] = sc.lqr_r;
    j["lqr"] = lj;
  }
  j["initial"] = initial_json(sc);
  j["command"] = command_json(sc);
  json sj;
  sj["dt"] = sc.sim.dt;
  sj["t_final"] = sc.sim.t_final;
  sj["record_every"] = sc.sim.record_every;
  sj["reprojection_every"] = sc.sim.reprojection_every;
  j["sim"] = sj;
  return j.dump(2) + "\n";
}

// --------------------------------------------------------------------------
// Built-in study cases

namespace {

QuadParams agile_quad() {
  QuadParams q;
  q.m = 0.755;
  // Full inertia identification of the airframe; the roll/pitch entries
  // sit an order below the yaw inertia.
  Mat3 J;
  J << 5.5711, 0.0618, -0.0251, 0.06177, 5.5757, 0.0101, -0.02502, 0.01007,
      10.5053;
  J *= 1e-3;
  q.J = 0.5 * (J + J.transpose());  // source values are slightly asymmetric
  q.d = 0.169;
  q.c_tau_f = 0.1056;
  q.f_rotor_max = 3.2;
  return q;
}

QuadParams small_quad(double f_max = 0.0) {
  QuadParams q;
  q.m = 0.5;
  q.J = Vec3(0.557e-2, 0.557e-2, 1.05e-2).asDiagonal();
  q.d = 0.169;
  q.c_tau_f = 0.1056;
  q.f_rotor_max = f_max;
  return q;
}

QuadParams carrier_quad() {
  QuadParams q;
  q.m = 0.755;
  q.J = Vec3(0.557e-2, 0.557e-2, 1.05e-2).asDiagonal();
  q.d = 0.169;
  q.c_tau_f = 0.1056;
  q.f_rotor_max = 0.0;
  return q;
}

Mat3 box_inertia(double m, double lx, double ly, double lz) {
  return Vec3(m / 12.0 * (ly * ly + lz * lz), m / 12.0 * (lx * lx + lz * lz),
              m / 12.0 * (lx * lx + ly * ly))
      .asDiagonal();
}

std::vector<Bearing> tilted_links(const std::vector<double>& angles_deg,
                                  const Vec3& toward) {
  std::vector<Bearing> out;
  for (double a : angles_deg) {
    const double rad = a * kDegToRad;
    out.emplace_back(std::cos(rad) * kE3 + std::sin(rad) * toward.normalized(),
                     Vec3::Zero());
  }
  return out;
}

Scenario flip_scenario(bool adaptive) {
  Scenario sc;
  sc.name = adaptive ? "flip_adaptive" : "flip_plain";
  sc.kind = ModelKind::kSingleQuad;
  sc.quad = agile_quad();
  sc.gains.kx = 6.0;
  sc.gains.kv = 3.0;
  sc.gains.kR = 0.7;
  sc.gains.kOmega = 0.12;
  sc.gains.c1 = 0.1;
  sc.gains.c2 = 0.1;
  sc.gains.gamma_x = 20.0;
  sc.gains.gamma_R = 0.01;
  sc.gains.B_theta = 0.4;
  sc.adaptive = adaptive;

  sc.dist.W_mode = UncertaintyMode::kIdentity;
  sc.dist.theta_x = Vec3(0.25, 0.125, 0.2);
  sc.dist.theta_R = Vec3(0.03, -0.06, 0.09);

  sc.initial = SingleQuadState{};

  FlightPhase flip;
  flip.kind = FlightPhase::Kind::kAttitudeSpin;
  flip.t_start = 0.0;
  flip.axis = Vec3(std::sqrt(0.5), std::sqrt(0.5), 0.0);
  flip.rate = 4.0 * M_PI;
  flip.thrust_cmd = sc.quad.m * sc.gravity;
  FlightPhase hover;
  hover.kind = FlightPhase::Kind::kPositionHover;
  hover.t_start = 0.375;
  hover.xd = Vec3::Zero();
  hover.b1d = Vec3(1, 0, 0);
  sc.phases = {flip, hover};

  sc.sim.dt = 1e-3;
  sc.sim.t_final = 2.0;
  return sc;
}

Scenario chain5_scenario(bool integral) {
  Scenario sc;
  sc.name = integral ? "chain5_integral" : "chain5_plain";
  sc.kind = ModelKind::kChain;
  sc.quad = small_quad();
  sc.cable.link_masses.assign(5, 0.1);
  sc.cable.link_lengths.assign(5, 0.1);

  sc.gains.kx = 12.8;
  sc.gains.kv = 4.22;
  sc.gains.kR = 0.65;
  sc.gains.kOmega = 0.11;
  sc.gains.kI = 1.5;
  sc.gains.c1 = 0.7;
  sc.gains.c2 = 0.7;
  sc.gains.kz = 2.0;
  sc.gains.sigma = 0.1;
  sc.kq = {11.01, 6.67, 1.97, 0.41, 0.069};
  sc.komega = {0.93, 0.24, 0.032, 0.030, 0.025};
  sc.integral = integral;

  sc.dist.delta_x = Vec3(-0.0125, 0.0125, 0.01);
  sc.dist.delta_R = Vec3(0.03, -0.02, 0.01);

  ChainState s0;
  s0.x = Vec3(0.6, -0.7, 0.2);
  s0.links = tilted_links({90, 72, 54, 36, 18}, Vec3(1, 0, 0));
  sc.initial = s0;

  sc.xd = Vec3::Zero();
  sc.b1d = Vec3(1, 0, 0);
  sc.sim.dt = 1e-3;
  sc.sim.t_final = 10.0;
  return sc;
}

Scenario payload_box_scenario() {
  Scenario sc;
  sc.name = "payload_box";
  sc.kind = ModelKind::kMultiQuad;
  sc.payload.m0 = 0.5;
  sc.payload.J0 = box_inertia(0.5, 0.6, 0.8, 0.2);
  sc.payload.attach_points = {Vec3(0.3, -0.4, -0.1), Vec3(0.3, 0.4, -0.1),
                              Vec3(-0.3, -0.4, -0.1), Vec3(-0.3, 0.4, -0.1)};
  sc.quads.assign(4, carrier_quad());
  CableParams cab;
  cab.link_masses.assign(5, 0.01);
  cab.link_lengths.assign(5, 0.15);
  sc.cables.assign(4, cab);

  sc.gains.kR = 0.7;
  sc.gains.kOmega = 0.12;
  sc.gains.c2 = 0.1;
  sc.use_lqr = true;
  sc.lqr_q_pos = 10.0;
  sc.lqr_q_vel = 1.0;
  sc.lqr_r = 1.0;

  MultiQuadState s0;
  s0.x0 = Vec3(1.0, 4.8, 0.0);
  s0.quads.resize(4);
  for (auto& q : s0.quads) {
    q.links.assign(5, Bearing(kE3, Vec3::Zero()));
  }
  sc.initial = s0;

  sc.x0d = Vec3(0.44, 0.78, -0.5);
  sc.b1d_multi.assign(4, Vec3(1, 0, 0));
  sc.sim.dt = 1e-3;
  sc.sim.t_final = 10.0;
  return sc;
}

Scenario payload_box_tilted_scenario() {
  Scenario sc = payload_box_scenario();
  sc.name = "payload_box_tilted";
  sc.payload.m0 = 1.0;
  sc.payload.J0 = box_inertia(1.0, 1.0, 1.2, 0.2);
  sc.payload.attach_points = {Vec3(0.5, -0.6, -0.1), Vec3(0.5, 0.6, -0.1),
                              Vec3(-0.5, -0.6, -0.1), Vec3(-0.5, 0.6, -0.1)};

  MultiQuadState s0;
  s0.x0 = Vec3(2.4, 0.8, -1.0);
  s0.R0 = exp_so3(30.0 * kDegToRad * Vec3(1, 0, 0));
  s0.quads.resize(4);
  const std::vector<double> curved = {75, 60, 45, 30, 15};
  for (int i = 0; i < 4; ++i) {
    if (i == 0 || i == 2) {
      s0.quads[i].R = exp_so3(-35.0 * kDegToRad * Vec3(0, 1, 0));
      s0.quads[i].links = tilted_links(curved, Vec3(1, 0, 0));
    } else {
      s0.quads[i].links.assign(5, Bearing(kE3, Vec3::Zero()));
    }
  }
  sc.initial = s0;
  return sc;
}

Scenario rod_scenario(bool integral) {
  Scenario sc;
  sc.name = integral ? "rod_integral" : "rod_plain";
  sc.kind = ModelKind::kMultiQuad;
  sc.payload.m0 = 0.5;
  Mat3 J0 = Vec3(1e-4, 0.5 / 12.0, 0.5 / 12.0).asDiagonal();
  sc.payload.J0 = J0;
  // Ring mounts sit just above the rod axis; exactly on-axis attachments
  // leave the roll mode uncontrollable (no stabilizing gain exists).
  sc.payload.attach_points = {Vec3(0.5, 0, -0.02), Vec3(-0.5, 0, -0.02)};
  sc.quads.assign(2, carrier_quad());
  CableParams cab;
  cab.link_masses.assign(1, 0.01);
  cab.link_lengths.assign(1, 0.5);
  sc.cables.assign(2, cab);

  sc.gains.kR = 0.7;
  sc.gains.kOmega = 0.12;
  sc.gains.c2 = 0.7;
  sc.gains.kI = 0.5;
  sc.gains.kz = 2.0;
  sc.gains.sigma = 0.1;
  sc.use_lqr = true;
  sc.lqr_q_pos = 10.0;
  sc.lqr_q_vel = 1.0;
  sc.lqr_r = 1.0;
  sc.integral = integral;

  sc.dist.delta_x = Vec3(-0.0125, 0.0125, 0.01);
  sc.dist.delta_R = Vec3(0.03, -0.02, 0.01);

  MultiQuadState s0;
  s0.x0 = Vec3(1.0, 0.5, -0.5);
  s0.R0 = exp_so3(30.0 * kDegToRad * Vec3(1, 0, 0));
  s0.quads.resize(2);
  s0.quads[0].R = exp_so3(-35.0 * kDegToRad * Vec3(0, 1, 0));
  s0.quads[0].links = tilted_links({20}, Vec3(1, 0, 0));
  s0.quads[1].links.assign(1, Bearing(kE3, Vec3::Zero()));
  sc.initial = s0;

  sc.x0d = Vec3(0, 0, -0.5);
  sc.b1d_multi.assign(2, Vec3(1, 0, 0));
  sc.sim.dt = 1e-3;
  sc.sim.t_final = 10.0;
  return sc;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"flip_adaptive",   "flip_plain", "chain5_integral",
          "chain5_plain", "payload_box",           "payload_box_tilted",
          "rod_integral",    "rod_plain"};
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "flip_adaptive") return flip_scenario(true);
  if (name == "flip_plain") return flip_scenario(false);
  if (name == "chain5_integral") return chain5_scenario(true);
  if (name == "chain5_plain") return chain5_scenario(false);
  if (name == "payload_box") return payload_box_scenario();
  if (name == "payload_box_tilted") return payload_box_tilted_scenario();
  if (name == "rod_integral") return rod_scenario(true);
  if (name == "rod_plain") return rod_scenario(false);
  throw ValidationError("unknown built-in scenario: " + name);
}

}  // namespace slung
