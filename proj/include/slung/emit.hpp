#pragma once

#include <string>
#include <vector>

#include "slung/sim.hpp"

namespace slung {

// Full-precision CSV: header "t,<state...>,<control...>,<metric...>",
// 17 significant digits so a re-read reproduces the trajectory exactly.
void write_csv(const Trajectory& traj, const std::string& path);
Trajectory read_csv(const std::string& path);
std::string csv_header(const Trajectory& traj);

// Terminal/peak/steady/settling summary per metric plus the fixed aliases
// (e_q_final, psi_max, x_err_final) expected by downstream tooling.
std::string metrics_json(const Trajectory& traj, double settle_threshold = 0.05);
void write_metrics(const Trajectory& traj, const std::string& path,
                   double settle_threshold = 0.05);

// Line plot of selected metric series (no rendering dependency).
void write_svg_plot(const Trajectory& traj,
                    const std::vector<std::string>& series_names,
                    const std::string& title, const std::string& path);

// Everything a scenario emits: series CSV, metrics JSON, standard plots.
void emit(const Trajectory& traj, const std::string& out_dir,
          const std::string& stem, bool plots);

}  // namespace slung
