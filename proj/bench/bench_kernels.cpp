// Parallel transform kernels against their serial per-node references.
// Usage: bench_kernels [l_max ...]   (default 8 16 24 32)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include <omp.h>

#include "vesicle/kernels.hpp"

using namespace vesicle;

namespace {

template <class F>
double seconds(F&& f, int reps) {
  f();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < reps; ++k) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void row(const char* name, int l_max, double fast, double ref, double diff) {
  std::printf("%-10s %5d %12.3e %12.3e %8.1f %10.2e\n", name, l_max, fast, ref, ref / fast, diff);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> sizes;
  for (int k = 1; k < argc; ++k) sizes.push_back(std::atoi(argv[k]));
  if (sizes.empty()) sizes = {8, 16, 24, 32};

  std::printf("threads %d\n", omp_get_max_threads());
  std::printf("%-10s %5s %12s %12s %8s %10s\n", "kernel", "l_max", "fast [s]", "ref [s]", "speedup", "max diff");
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int L : sizes) {
    const GridPtr grid = build_grid(L);
    const std::size_t n = harmonic_count(L), m = grid->size();
    std::vector<double> c(n), v(m), v_ref(m), c_out(n), c_ref(n);
    std::vector<Eigen::Vector3d> g(m), g_ref(m);
    for (auto& x : c) x = u(rng);
    const int reps = L <= 16 ? 20 : 4;

    double tf = seconds([&] { kernels::synthesize(*grid, L, c, v); }, reps);
    double tr = seconds([&] { kernels::synthesize_reference(*grid, L, c, v_ref); }, reps);
    double d = 0;
    for (std::size_t k = 0; k < m; ++k) d = std::max(d, std::abs(v[k] - v_ref[k]));
    row("synthesize", L, tf, tr, d);

    tf = seconds([&] { kernels::analyze(*grid, L, v, c_out); }, reps);
    tr = seconds([&] { kernels::analyze_reference(*grid, L, v, c_ref); }, reps);
    d = 0;
    for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(c_out[k] - c_ref[k]));
    row("analyze", L, tf, tr, d);

    tf = seconds([&] { kernels::synthesize_gradient(*grid, L, c, g); }, reps);
    tr = seconds([&] { kernels::synthesize_gradient_reference(*grid, L, c, g_ref); }, reps);
    d = 0;
    for (std::size_t k = 0; k < m; ++k) d = std::max(d, (g[k] - g_ref[k]).cwiseAbs().maxCoeff());
    row("gradient", L, tf, tr, d);
  }
}
