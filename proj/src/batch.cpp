#include "slung/batch.hpp"

#include <chrono>
#include <cmath>
#include <random>

#ifdef SLUNG_HAVE_OPENMP
#include <omp.h>
#endif

namespace slung {

std::vector<BatchResult> run_batch(const std::vector<Scenario>& scenarios,
                                   bool parallel) {
  const int n = static_cast<int>(scenarios.size());
  std::vector<BatchResult> results(n);

#ifdef SLUNG_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
#endif
  for (int i = 0; i < n; ++i) {
    auto& r = results[i];
    r.name = scenarios[i].name;
    const auto start = std::chrono::steady_clock::now();
    try {
      r.traj = run(scenarios[i]);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
  }
  (void)parallel;
  return results;
}

namespace {

Rotation sample_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> uang(0.0, M_PI);
  Vec3 axis(n01(rng), n01(rng), n01(rng));
  while (axis.norm() < 1e-6) axis = Vec3(n01(rng), n01(rng), n01(rng));
  return exp_so3(uang(rng) * axis.normalized());
}

SweepResult sweep_range(long begin, long end, const ErrorGainMatrix& G,
                        double psi_cap, const PsiBounds& b, unsigned seed) {
  SweepResult acc;
  std::normal_distribution<double> n01;
  for (long s = begin; s < end; ++s) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (s + 1));

    // hat/vee inverse pair and the cross-product identity
    const Vec3 v(n01(rng), n01(rng), n01(rng));
    const Vec3 w(n01(rng), n01(rng), n01(rng));
    acc.max_hatvee_error =
        std::max(acc.max_hatvee_error, (vee(hat(v)) - v).norm());
    acc.max_hatvee_error =
        std::max(acc.max_hatvee_error, (hat(v) * w - v.cross(w)).norm());

    const Rotation R = sample_rotation(rng);
    const Rotation Rd = sample_rotation(rng);
    acc.max_orthonormality = std::max(
        acc.max_orthonormality,
        (R.matrix().transpose() * R.matrix() - Mat3::Identity()).norm());

    const double psi = attitude_error_value(R, Rd, G);
    const double er2 = attitude_error_vector(R, Rd, G).squaredNorm();
    acc.max_psi_negative = std::min(acc.max_psi_negative, psi);
    if (b.b1 * er2 > psi * (1 + 1e-12) + 1e-12) ++acc.lower_bound_violations;
    if (psi < psi_cap) {
      ++acc.upper_bound_checked;
      if (psi > b.b2 * er2 * (1 + 1e-12) + 1e-12) ++acc.upper_bound_violations;
    }
    ++acc.samples;
  }
  return acc;
}

void merge(SweepResult& into, const SweepResult& part) {
  into.samples += part.samples;
  into.lower_bound_violations += part.lower_bound_violations;
  into.upper_bound_violations += part.upper_bound_violations;
  into.upper_bound_checked += part.upper_bound_checked;
  into.max_hatvee_error = std::max(into.max_hatvee_error, part.max_hatvee_error);
  into.max_orthonormality =
      std::max(into.max_orthonormality, part.max_orthonormality);
  into.max_psi_negative =
      std::min(into.max_psi_negative, part.max_psi_negative);
}

}  // namespace

SweepResult manifold_sweep(long samples, const ErrorGainMatrix& G,
                           double psi_cap, unsigned seed, bool parallel) {
  const PsiBounds b = psi_bounds(G, psi_cap);
  SweepResult total;

#ifdef SLUNG_HAVE_OPENMP
  if (parallel) {
    const int nt = omp_get_max_threads();
    std::vector<SweepResult> parts(nt);
#pragma omp parallel num_threads(nt)
    {
      const int tid = omp_get_thread_num();
      const long chunk = (samples + nt - 1) / nt;
      const long b0 = tid * chunk;
      const long b1 = std::min(samples, b0 + chunk);
      if (b0 < b1) parts[tid] = sweep_range(b0, b1, G, psi_cap, b, seed);
    }
    for (const auto& p : parts) merge(total, p);
    return total;
  }
#endif
  (void)parallel;
  total = sweep_range(0, samples, G, psi_cap, b, seed);
  return total;
}

}  // namespace slung
