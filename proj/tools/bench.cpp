// Compares the serial and OpenMP paths of the batch runner and the
// Monte-Carlo manifold sweep. Per-rollout physics is sequential by nature;
// the parallel axes are independent scenarios and independent samples.

#include <chrono>
#include <cstdio>
#include <vector>

#include "slung/batch.hpp"

using namespace slung;

namespace {

double time_of(const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int main() {
  // A batch of short chain stabilizations from staggered initial offsets.
  std::vector<Scenario> batch;
  for (int i = 0; i < 8; ++i) {
    Scenario sc = builtin_scenario("chain5_integral");
    sc.name += "_case" + std::to_string(i);
    auto& st = std::get<ChainState>(sc.initial);
    st.x += 0.05 * i * Vec3(1, -1, 0.5);
    sc.sim.t_final = 2.0;
    batch.push_back(std::move(sc));
  }

  std::vector<BatchResult> serial_results, parallel_results;
  const double t_serial =
      time_of([&] { serial_results = run_batch(batch, false); });
  const double t_parallel =
      time_of([&] { parallel_results = run_batch(batch, true); });

  double max_dev = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto& a = serial_results[i].traj;
    const auto& b = parallel_results[i].traj;
    for (int k = 0; k < a.samples(); ++k) {
      max_dev =
          std::max(max_dev, (a.state[k] - b.state[k]).cwiseAbs().maxCoeff());
    }
  }
  std::printf("batch rollouts  : serial %.3f s, openmp %.3f s, speedup %.2fx, "
              "max state dev %.3g\n",
              t_serial, t_parallel, t_serial / t_parallel, max_dev);

  const long n = 2'000'000;
  SweepResult s_serial, s_parallel;
  const double w_serial = time_of([&] {
    s_serial = manifold_sweep(n, ErrorGainMatrix(1, 2, 3), 1.0, 7u, false);
  });
  const double w_parallel = time_of([&] {
    s_parallel = manifold_sweep(n, ErrorGainMatrix(1, 2, 3), 1.0, 7u, true);
  });
  const bool identical =
      s_serial.lower_bound_violations == s_parallel.lower_bound_violations &&
      s_serial.upper_bound_checked == s_parallel.upper_bound_checked &&
      s_serial.max_hatvee_error == s_parallel.max_hatvee_error;
  std::printf("manifold sweep  : serial %.3f s, openmp %.3f s, speedup %.2fx, "
              "results %s\n",
              w_serial, w_parallel, w_serial / w_parallel,
              identical ? "identical" : "DIFFER");
  return identical && max_dev == 0.0 ? 0 : 1;
}
