#include "slung/emit.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace slung {

namespace {

void append_num(std::string& out, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

}  // namespace

std::string csv_header(const Trajectory& traj) {
  std::string h = "t";
  for (const auto& n : traj.state_names) h += "," + n;
  for (const auto& n : traj.control_names) h += ",u:" + n;
  for (const auto& n : traj.metric_names) h += ",m:" + n;
  return h;
}

void write_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << csv_header(traj) << "\n";
  std::string line;
  for (int k = 0; k < traj.samples(); ++k) {
    line.clear();
    append_num(line, traj.t[k]);
    for (int i = 0; i < traj.state[k].size(); ++i) {
      line += ',';
      append_num(line, traj.state[k](i));
    }
    for (int i = 0; i < traj.control[k].size(); ++i) {
      line += ',';
      append_num(line, traj.control[k](i));
    }
    for (int i = 0; i < traj.metric[k].size(); ++i) {
      line += ',';
      append_num(line, traj.metric[k](i));
    }
    out << line << "\n";
  }
  if (!out) throw IoError("failed while writing " + path);
}

Trajectory read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty csv: " + path);

  Trajectory traj;
  const auto cols = split(line, ',');
  for (size_t i = 1; i < cols.size(); ++i) {
    const std::string& c = cols[i];
    if (c.rfind("u:", 0) == 0) {
      traj.control_names.push_back(c.substr(2));
    } else if (c.rfind("m:", 0) == 0) {
      traj.metric_names.push_back(c.substr(2));
    } else {
      traj.state_names.push_back(c);
    }
  }
  const int ns = static_cast<int>(traj.state_names.size());
  const int nc = static_cast<int>(traj.control_names.size());
  const int nm = static_cast<int>(traj.metric_names.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto vals = split(line, ',');
    if (static_cast<int>(vals.size()) != 1 + ns + nc + nm)
      throw IoError(path + ": malformed row");
    auto num = [&](int i) { return std::stod(vals[i]); };
    traj.t.push_back(num(0));
    VecX s(ns), u(nc), m(nm);
    for (int i = 0; i < ns; ++i) s(i) = num(1 + i);
    for (int i = 0; i < nc; ++i) u(i) = num(1 + ns + i);
    for (int i = 0; i < nm; ++i) m(i) = num(1 + ns + nc + i);
    traj.state.push_back(s);
    traj.control.push_back(u);
    traj.metric.push_back(m);
  }
  return traj;
}

std::string metrics_json(const Trajectory& traj, double settle_threshold) {
  const MetricsSummary s = metrics(traj, settle_threshold);
  nlohmann::json j;
  j["schema_version"] = kTrajectorySchemaVersion;
  j["settle_threshold"] = settle_threshold;
  j["t_final"] = traj.t.empty() ? 0.0 : traj.t.back();
  for (const auto& [name, ss] : s.series) {
    nlohmann::json e;
    e["final"] = ss.terminal;
    e["max"] = ss.peak;
    e["steady_state"] = ss.steady_state;
    e["settling_time"] = ss.settling_time;
    j["series"][name] = e;
  }
  j["e_q_final"] = s.series.at("e_q").terminal;
  j["psi_max"] = s.series.at("psi").peak;
  j["x_err_final"] = s.series.at("e_x_norm").terminal;
  return j.dump(2) + "\n";
}

void write_metrics(const Trajectory& traj, const std::string& path,
                   double settle_threshold) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << metrics_json(traj, settle_threshold);
}

void write_svg_plot(const Trajectory& traj,
                    const std::vector<std::string>& series_names,
                    const std::string& title, const std::string& path) {
  const int W = 720, H = 420, ml = 60, mr = 20, mt = 36, mb = 40;
  const double t0 = traj.t.front(), t1 = traj.t.back();
  double lo = 0, hi = 0;
  std::vector<std::vector<double>> data;
  for (const auto& name : series_names) {
    data.push_back(traj.series(name));
    for (double v : data.back()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;

  auto px = [&](double t) {
    return ml + (t - t0) / std::max(t1 - t0, 1e-12) * (W - ml - mr);
  };
  auto py = [&](double v) { return H - mb - (v - lo) / (hi - lo) * (H - mt - mb); };

  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title
      << "</text>\n";
  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << (H - mb) << "\" x2=\"" << (W - mr)
      << "\" y2=\"" << (H - mb) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << (H - mb) << "\" stroke=\"black\"/>\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", lo);
  out << "<text x=\"" << (ml - 6) << "\" y=\"" << (H - mb)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", hi);
  out << "<text x=\"" << (ml - 6) << "\" y=\"" << (mt + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g s", t1);
  out << "<text x=\"" << (W - mr) << "\" y=\"" << (H - mb + 16)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << buf << "</text>\n";

  for (size_t s = 0; s < data.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[s % 6]
        << "\" stroke-width=\"1.2\" points=\"";
    const int stride = std::max(1, traj.samples() / 2000);
    for (int k = 0; k < traj.samples(); k += stride) {
      out << px(traj.t[k]) << "," << py(data[s][k]) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << (ml + 8) << "\" y=\"" << (mt + 14 * (s + 1))
        << "\" fill=\"" << colors[s % 6]
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << series_names[s]
        << "</text>\n";
  }
  out << "</svg>\n";
}

void emit(const Trajectory& traj, const std::string& out_dir,
          const std::string& stem, bool plots) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  const fs::path base = fs::path(out_dir) / stem;
  write_csv(traj, (base.string() + ".csv"));
  write_metrics(traj, (base.string() + "_metrics.json"));
  if (plots) {
    write_svg_plot(traj, {"psi"}, "attitude error", base.string() + "_psi.svg");
    write_svg_plot(traj, {"e_q", "e_omega"}, "link errors",
                   base.string() + "_links.svg");
    write_svg_plot(traj, {"e_x_norm", "e_v_norm"}, "position error",
                   base.string() + "_position.svg");
  }
}

}  // namespace slung
