// Benchmark of the OpenMP kernels against their serial reference
// implementations. Prints per-kernel timings and the speedup.

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mrpd/phantom.hpp"
#include "mrpd/prior.hpp"
#include "mrpd/quality.hpp"
#include "mrpd/rng.hpp"

using namespace mrpd;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-24s serial %9.4f ms   parallel %9.4f ms   speedup %5.2fx\n", name,
              serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif

  {  // SSIM map on a large image pair
    const int n = 768;
    RealField a = shepp_logan(n, n, 1), b = shepp_logan(n, n, 2);
    volatile double sink = 0.0;
    double ts = time_best_of(3, [&] { sink = ssim_map_serial(a, b).data[0]; });
    double tp = time_best_of(3, [&] { sink = ssim_map(a, b).data[0]; });
    (void)sink;
    report("ssim_map 768x768", ts, tp);
  }

  {  // Gaussian-mixture posterior mean with many components
    const int h = 64, w = 64, K = 256;
    NoiseSchedule sched = linear_schedule(1000, 1e-4, 0.02);
    Rng rng(42);
    std::vector<LatentField> means;
    for (int k = 0; k < K; ++k) {
      LatentField m(1, h, w);
      for (double& v : m.data) v = rng.normal();
      means.push_back(std::move(m));
    }
    GaussianMixturePrior prior(std::vector<double>(K, 1.0 / K), means, 1.0);
    LatentField z(1, h, w);
    for (double& v : z.data) v = rng.normal();
    volatile double sink = 0.0;
    double ts =
        time_best_of(3, [&] { sink = gmm_posterior_mean_serial(prior, z, 500, sched).data[0]; });
    double tp = time_best_of(3, [&] { sink = prior.posterior_mean(z, 500, sched).data[0]; });
    (void)sink;
    report("gmm_posterior 256x4096", ts, tp);
  }

  return 0;
}
