#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "slung/batch.hpp"
#include "slung/emit.hpp"
#include "slung/oracle.hpp"

namespace {

using namespace slung;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

Scenario load_scenario(const std::string& ref) {
  if (std::filesystem::exists(ref)) return parse_scenario(ref);
  for (const auto& name : builtin_scenario_names()) {
    if (name == ref) return builtin_scenario(ref);
  }
  // Fall back to the bundled directory.
  const std::filesystem::path bundled =
      std::filesystem::path(SLUNG_SCENARIO_DIR) / (ref + ".json");
  if (std::filesystem::exists(bundled)) return parse_scenario(bundled.string());
  throw ValidationError("no such scenario file or built-in: " + ref);
}

void apply_overrides(Scenario& sc, double dt, double t_final,
                     const std::string& out_dir, bool no_plots) {
  if (dt > 0) sc.sim.dt = dt;
  if (t_final > 0) sc.sim.t_final = t_final;
  if (!out_dir.empty()) sc.out_dir = out_dir;
  if (no_plots) sc.plots = false;
}

int cmd_simulate(const std::vector<std::string>& refs, double dt,
                 double t_final, const std::string& out_dir, bool no_plots,
                 bool serial) {
  std::vector<Scenario> scenarios;
  for (const auto& ref : refs) {
    Scenario sc = load_scenario(ref);
    apply_overrides(sc, dt, t_final, out_dir, no_plots);
    if (sc.out_dir.empty()) sc.out_dir = "out";
    scenarios.push_back(std::move(sc));
  }
  const auto results = run_batch(scenarios, !serial);
  bool any_failed = false;
  for (size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.ok) {
      any_failed = true;
      std::cerr << r.name << ": FAILED: " << r.error << "\n";
      continue;
    }
    emit(r.traj, scenarios[i].out_dir, r.name, scenarios[i].plots);
    const MetricsSummary ms = metrics(r.traj);
    std::cout << r.name << ": " << r.traj.samples() << " samples in "
              << r.wall_seconds << " s; |e_x|(T) = "
              << ms.series.at("e_x_norm").terminal
              << ", psi_max = " << ms.series.at("psi").peak
              << ", e_q(T) = " << ms.series.at("e_q").terminal << "\n";
  }
  return any_failed ? kExitNumerical : 0;
}

nlohmann::json matrix_json(const MatX& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

int cmd_linearize(const std::string& ref, const std::string& out_path) {
  const Scenario sc = load_scenario(ref);
  LinearModel lm;
  if (sc.kind == ModelKind::kChain) {
    lm = linearize_chain(sc.quad, sc.cable, sc.gravity);
  } else if (sc.kind == ModelKind::kMultiQuad) {
    lm = linearize_multi(sc.payload, sc.quads, sc.cables, sc.gravity);
  } else {
    throw ValidationError("linearize applies to chain or payload scenarios");
  }
  const StateSpace ol = state_space(lm, MatX(), MatX());
  Eigen::EigenSolver<MatX> es(ol.A, false);

  nlohmann::json j;
  j["scenario"] = sc.name;
  j["dim"] = lm.dim();
  j["M"] = matrix_json(lm.Mmat);
  j["G"] = matrix_json(lm.Gmat);
  j["B"] = matrix_json(lm.Bmat);
  nlohmann::json eig = nlohmann::json::array();
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    eig.push_back({{"re", es.eigenvalues()(i).real()},
                   {"im", es.eigenvalues()(i).imag()}});
  }
  j["open_loop_eigenvalues"] = eig;

  const PreparedScenario ps = prepare_scenario(sc);
  Eigen::EigenSolver<MatX> cl(ps.closed_loop.A, false);
  nlohmann::json ceig = nlohmann::json::array();
  for (int i = 0; i < cl.eigenvalues().size(); ++i) {
    ceig.push_back({{"re", cl.eigenvalues()(i).real()},
                    {"im", cl.eigenvalues()(i).imag()}});
  }
  j["closed_loop_eigenvalues"] = ceig;
  j["closed_loop_hurwitz"] = is_hurwitz(ps.closed_loop.A, 0.0);

  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    out << text;
  }
  return 0;
}

int cmd_gains_check(const std::string& ref) {
  const Scenario sc = load_scenario(ref);
  double Omega_d_max = 4 * M_PI;
  for (const auto& ph : sc.phases) {
    if (ph.kind == FlightPhase::Kind::kAttitudeSpin)
      Omega_d_max = std::max(Omega_d_max, std::abs(ph.rate));
  }
  const Mat3 J = sc.kind == ModelKind::kMultiQuad ? sc.quads[0].J : sc.quad.J;
  const double m = sc.kind == ModelKind::kMultiQuad ? sc.quads[0].m : sc.quad.m;

  const auto att = check_attitude_gain_condition(J, sc.gains.kR,
                                                 sc.gains.kOmega, sc.gains.c2,
                                                 Omega_d_max);
  nlohmann::json j;
  j["scenario"] = sc.name;
  j["attitude"] = {{"B2", att.B2},
                   {"bound_lambda", att.bound_lambda},
                   {"bound_damping", att.bound_damping},
                   {"c2", att.c2},
                   {"margin", att.margin},
                   {"pass", att.pass}};
  if (sc.gains.kx > 0) {
    PositionGainInputs in{sc.gains.kx, sc.gains.kv, sc.gains.kR,
                          sc.gains.kOmega, sc.gains.c1, sc.gains.c2};
    PositionGainBounds bounds;
    bounds.B_theta = sc.gains.B_theta > 0 ? sc.gains.B_theta : 1.0;
    bounds.B_Wx = 1.0;
    bounds.B1 = 1.05 * m * sc.gravity;
    bounds.Omega_d_max = Omega_d_max;
    const auto pos = check_position_gain_condition(in, J, m, 0.5, bounds);
    j["position"] = {{"alpha", pos.alpha},
                     {"c1_bound", pos.c1_bound},
                     {"c1_pass", pos.c1_pass},
                     {"lm_W1", pos.lm_W1},
                     {"lm_W2", pos.lm_W2},
                     {"W12_norm", pos.W12_norm},
                     {"coupling_threshold", pos.coupling_threshold},
                     {"coupling_pass", pos.coupling_pass},
                     {"pass", pos.pass}};
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_gains_synth(const std::string& ref) {
  const Scenario sc = load_scenario(ref);
  LinearModel lm;
  if (sc.kind == ModelKind::kChain) {
    lm = linearize_chain(sc.quad, sc.cable, sc.gravity);
  } else if (sc.kind == ModelKind::kMultiQuad) {
    lm = linearize_multi(sc.payload, sc.quads, sc.cables, sc.gravity);
  } else {
    throw ValidationError("gain synthesis applies to chain or payload models");
  }
  const int D = lm.dim();
  MatX Qw = MatX::Identity(2 * D, 2 * D);
  Qw.topLeftCorner(D, D) *= sc.lqr_q_pos;
  Qw.bottomRightCorner(D, D) *= sc.lqr_q_vel;
  const MatX Rw = sc.lqr_r * MatX::Identity(lm.input_dim(), lm.input_dim());
  const LqrGains k = synthesize_gains_lqr(lm, Qw, Rw);

  nlohmann::json j;
  j["scenario"] = sc.name;
  j["K_x"] = matrix_json(k.K_x);
  j["K_xdot"] = matrix_json(k.K_xdot);
  const StateSpace cl = state_space(lm, k.K_x, k.K_xdot);
  j["closed_loop_hurwitz"] = is_hurwitz(cl.A, 0.0);
  std::cout << j.dump(2) << "\n";
  return 0;
}

bool report(const char* name, bool ok, const std::string& detail) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << detail << ")\n";
  return ok;
}

int cmd_check(bool serial) {
  bool all = true;

  {
    const auto sweep = manifold_sweep(10000, ErrorGainMatrix(1, 2, 3), 1.0,
                                      20240817u, !serial);
    all &= report("manifold sweep",
                  sweep.lower_bound_violations == 0 &&
                      sweep.upper_bound_violations == 0 &&
                      sweep.max_hatvee_error < 1e-12 &&
                      sweep.max_orthonormality < 1e-9 &&
                      sweep.max_psi_negative > -1e-12,
                  "10^4 samples, hat/vee err " +
                      std::to_string(sweep.max_hatvee_error));
  }

  {
    // Coupled base/pendulum cross-integration against the chain model.
    QuadParams quad;
    quad.m = 0.5;
    quad.J = Vec3(0.557e-2, 0.557e-2, 1.05e-2).asDiagonal();
    quad.d = 0.169;
    quad.c_tau_f = 0.1056;
    CableParams cable;
    cable.link_masses = {0.1};
    cable.link_lengths = {0.1};
    const ChainModel model = ChainModel::make(quad, cable);

    PendulumRefConfig cfg;
    cfg.m = quad.m;
    cfg.m1 = 0.1;
    cfg.l = 0.1;
    cfg.force = -model.inertia.M00 * kDefaultGravity * Vec3(0, 0, 1);
    PendulumRefState s0;
    s0.theta = 0.5;
    s0.phi_dot = 2.0;

    const double dt = 1e-4, T = 2.0;
    const auto ref = spherical_pendulum_reference(s0, cfg, T, dt);

    ChainState cs;
    cs.x = s0.xb;
    cs.v = s0.vb;
    cs.links.push_back(
        sphere_project(pendulum_ref_direction(s0), pendulum_ref_omega(s0)));
    DisturbanceSet none;
    double worst = 0;
    ChainState c = cs;
    for (size_t k = 1; k < ref.size(); ++k) {
      c = step_chain(c, model, model.inertia.M00 * kDefaultGravity,
                     Vec3::Zero(), none, dt);
      const auto& r = ref[k].s;
      worst = std::max(worst, (c.x - r.xb).norm());
      worst = std::max(worst, (c.v - r.vb).norm());
      worst = std::max(worst,
                       (c.links[0].q - pendulum_ref_direction(r)).norm());
      worst =
          std::max(worst, (c.links[0].omega - pendulum_ref_omega(r)).norm());
    }
    all &= report("pendulum oracle equivalence", worst < 1e-5,
                  "max state deviation " + std::to_string(worst));
  }

  {
    // Analytic linearization vs numeric Jacobian, both systems.
    const Scenario c3 = builtin_scenario("chain5_integral");
    const ChainModel model = ChainModel::make(c3.quad, c3.cable, c3.gravity);
    const LinearModel lm = linearize_chain(c3.quad, c3.cable, c3.gravity);
    const StateSpace ol = state_space(lm, MatX(), MatX());
    const int D = lm.dim();
    const MatX J = finite_difference_jacobian(
        [&](const VecX& z) {
          return chain_reduced_dynamics(model, Vec3::Zero(), z, Vec3::Zero());
        },
        VecX::Zero(2 * D), 1e-6);
    const double rel = (J - ol.A).cwiseAbs().maxCoeff() /
                       (1.0 + ol.A.cwiseAbs().maxCoeff());
    all &= report("chain linearization vs finite differences", rel < 1e-4,
                  "max rel deviation " + std::to_string(rel));

    const Scenario c4 = builtin_scenario("payload_box");
    const MultiModel mm =
        MultiModel::make(c4.payload, c4.quads, c4.cables, c4.gravity);
    const LinearModel lm4 =
        linearize_multi(c4.payload, c4.quads, c4.cables, c4.gravity);
    const StateSpace ol4 = state_space(lm4, MatX(), MatX());
    const int D4 = lm4.dim();
    const MatX J4 = finite_difference_jacobian(
        [&](const VecX& z) {
          return multi_reduced_dynamics(mm, Vec3::Zero(), z,
                                        VecX::Zero(3 * mm.n_quads()));
        },
        VecX::Zero(2 * D4), 1e-6);
    const double rel4 = (J4 - ol4.A).cwiseAbs().maxCoeff() /
                        (1.0 + ol4.A.cwiseAbs().maxCoeff());
    all &= report("payload linearization vs finite differences", rel4 < 1e-4,
                  "max rel deviation " + std::to_string(rel4));
  }

  {
    // Unforced chain energy audit.
    const Scenario c3 = builtin_scenario("chain5_integral");
    const ChainModel model = ChainModel::make(c3.quad, c3.cable, c3.gravity);
    ChainState s = std::get<ChainState>(c3.initial);
    DisturbanceSet none;
    std::vector<double> E;
    const double dt = 1e-4;
    E.push_back(energy(s, model).total());
    for (int k = 0; k < 20000; ++k) {
      s = step_chain(s, model, 0.0, Vec3::Zero(), none, dt);
      E.push_back(energy(s, model).total());
    }
    const double drift = energy_drift(E);
    all &= report("chain energy audit", drift <= 1e-6,
                  "relative drift " + std::to_string(drift));
  }

  return all ? 0 : kExitNumerical;
}

int cmd_list() {
  for (const auto& name : builtin_scenario_names()) std::cout << name << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometric slung-load dynamics and control simulator"};
  app.require_subcommand(1);

  std::vector<std::string> sim_refs;
  double dt = 0, t_final = 0;
  std::string out_dir;
  bool no_plots = false, serial = false;
  unsigned seed = 0;

  auto* sim = app.add_subcommand("simulate", "run scenarios and emit results");
  sim->add_option("scenario", sim_refs, "scenario files or built-in names")
      ->required();
  sim->add_option("--dt", dt, "override integration step");
  sim->add_option("--t-final", t_final, "override final time");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_flag("--no-plots", no_plots, "skip SVG plots");
  sim->add_flag("--serial", serial, "disable the parallel batch runner");
  sim->add_option("--seed", seed,
                  "reserved; the dynamics are deterministic");

  std::string lin_ref, lin_out;
  auto* lin = app.add_subcommand("linearize",
                                 "emit linearized model matrices as JSON");
  lin->add_option("scenario", lin_ref)->required();
  lin->add_option("--out", lin_out, "write JSON here instead of stdout");

  auto* gains = app.add_subcommand("gains", "gain tools");
  gains->require_subcommand(1);
  std::string gc_ref, gs_ref;
  auto* gcheck = gains->add_subcommand("check", "evaluate gain conditions");
  gcheck->add_option("scenario", gc_ref)->required();
  auto* gsynth = gains->add_subcommand("synth", "LQR gain synthesis");
  gsynth->add_option("scenario", gs_ref)->required();

  bool check_serial = false;
  auto* check = app.add_subcommand("check", "run the oracle suite");
  check->add_flag("--serial", check_serial, "serial sweep kernels");

  app.add_subcommand("list-scenarios", "list built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(sim_refs, dt, t_final, out_dir, no_plots, serial);
    if (lin->parsed()) return cmd_linearize(lin_ref, lin_out);
    if (gcheck->parsed()) return cmd_gains_check(gc_ref);
    if (gsynth->parsed()) return cmd_gains_synth(gs_ref);
    if (check->parsed()) return cmd_check(check_serial);
    return cmd_list();
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
