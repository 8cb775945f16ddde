// Serial vs OpenMP timings for the three data-parallel kernels. Also checks
// that both variants agree bit for bit.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <vector>

#include "consroute/bayes_opt.hpp"
#include "consroute/gp.hpp"
#include "consroute/kernels.hpp"
#include "consroute/threshold.hpp"

using namespace consroute;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

template <class T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

bool report(const char* name, double ts, double tp, bool equal) {
  std::printf("%-20s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  %s\n", name, ts * 1e3, tp * 1e3,
              ts / tp, equal ? "identical" : "MISMATCH");
  return equal;
}

}  // namespace

int main(int argc, char** argv) {
  const double scale = argc > 1 ? std::atof(argv[1]) : 1.0;
  const int reps = 5;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::printf("threads: %d (openmp %s)\n", kernels::max_threads(), kernels::openmp_enabled() ? "on" : "off");
  bool ok = true;

  {
    const auto n = static_cast<Eigen::Index>(20000 * scale);
    RowMatrix points(n, 256), centroids(12, 256);
    for (Eigen::Index i = 0; i < points.size(); ++i) points.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < centroids.size(); ++i) centroids.data()[i] = normal(rng);
    std::vector<int> ls(n), lp(n);
    std::vector<double> ds(n), dp(n);
    const double ts = best_of(reps, [&] { kernels::serial::nearest_centroid(points, centroids, ls, ds); });
    const double tp = best_of(reps, [&] { kernels::parallel::nearest_centroid(points, centroids, lp, dp); });
    ok = report("nearest_centroid", ts, tp, same_bits(ls, lp) && same_bits(ds, dp)) && ok;
  }

  {
    std::vector<Observation> obs;
    for (std::uint64_t i = 0; i < 400; ++i) {
      const ThresholdPair p = sample_triangle(rng);
      obs.push_back({p, std::sin(4 * p.tau1) * std::cos(3 * p.tau2) + 0.01 * normal(rng), i});
    }
    const GpSurrogate gp = gp_fit(obs, GpHyper{});
    std::vector<ThresholdPair> cand(static_cast<std::size_t>(20000 * scale));
    for (auto& c : cand) c = sample_triangle(rng);
    std::vector<double> ms(cand.size()), vs(cand.size()), mp(cand.size()), vp(cand.size());
    const double ts = best_of(reps, [&] { kernels::serial::gp_posterior(gp, cand, ms, vs); });
    const double tp = best_of(reps, [&] { kernels::parallel::gp_posterior(gp, cand, mp, vp); });
    ok = report("gp_posterior", ts, tp, same_bits(ms, mp) && same_bits(vs, vp)) && ok;
  }

  {
    std::vector<ScoredOutcome> table(5000);
    for (auto& t : table) t = {unif(rng), {unif(rng), unif(rng), unif(rng)}};
    std::vector<ThresholdPair> cand(static_cast<std::size_t>(4000 * scale));
    for (auto& c : cand) c = sample_triangle(rng);
    std::vector<double> us(cand.size()), up(cand.size());
    const double ts = best_of(reps, [&] { kernels::serial::threshold_utilities(table, cand, us); });
    const double tp = best_of(reps, [&] { kernels::parallel::threshold_utilities(table, cand, up); });
    ok = report("threshold_utilities", ts, tp, same_bits(us, up)) && ok;
  }
  return ok ? 0 : 1;
}
