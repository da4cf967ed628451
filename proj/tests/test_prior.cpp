#include <doctest.h>

#include <cmath>
#include <vector>

#include "mrpd/prior.hpp"
#include "mrpd/rng.hpp"

using namespace mrpd;

namespace {

constexpr double kPi = 3.14159265358979323846;

LatentField random_latent(int c, int h, int w, uint64_t seed, double scale = 1.0) {
  LatentField z(c, h, w);
  Rng rng(seed);
  for (auto& v : z.data) v = scale * rng.normal();
  return z;
}

double max_abs_diff(const LatentField& a, const LatentField& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

double l2(const LatentField& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return std::sqrt(s);
}

double dot(const LatentField& a, const LatentField& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

// Direct orthonormal DCT-II from the definition, as an independent oracle.
LatentField naive_dct2(const LatentField& x) {
  int h = x.height, w = x.width;
  LatentField out(x.channels, h, w);
  for (int ch = 0; ch < x.channels; ++ch)
    for (int u = 0; u < h; ++u)
      for (int v = 0; v < w; ++v) {
        double cu = u == 0 ? std::sqrt(1.0 / h) : std::sqrt(2.0 / h);
        double cv = v == 0 ? std::sqrt(1.0 / w) : std::sqrt(2.0 / w);
        double acc = 0.0;
        for (int r = 0; r < h; ++r)
          for (int c = 0; c < w; ++c)
            acc += x.at(ch, r, c) * std::cos(kPi * (r + 0.5) * u / h) *
                   std::cos(kPi * (c + 0.5) * v / w);
        out.at(ch, u, v) = cu * cv * acc;
      }
  return out;
}

}  // namespace

TEST_SUITE("prior") {

TEST_CASE("linear schedule validates and starts at 1") {
  NoiseSchedule s = linear_schedule(1000, 1e-4, 0.02);
  CHECK(validate(s).ok);
  CHECK(s.alpha_bar[0] == 1.0);
  CHECK(s.alpha_bar[1] == doctest::Approx(1.0 - 1e-4).epsilon(1e-12));
  CHECK(s.alpha_bar[1000] < 0.01);
  s.alpha_bar[5] = s.alpha_bar[4];
  CHECK_FALSE(validate(s).ok);
}

TEST_CASE("mixture constructor rejects bad parameters") {
  std::vector<LatentField> means{LatentField(1, 2, 2)};
  CHECK_THROWS_AS(GaussianMixturePrior({0.5}, means, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GaussianMixturePrior({1.0}, means, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GaussianMixturePrior({1.0, 0.0}, means, 1.0), std::invalid_argument);
  CHECK_NOTHROW(GaussianMixturePrior({1.0}, means, 1.0));
}

TEST_CASE("standard normal prior: eps_hat = sqrt(1-a) z") {
  GaussianMixturePrior prior({1.0}, {LatentField(1, 4, 4)}, 1.0);
  NoiseSchedule s = linear_schedule(1000, 1e-4, 0.02);
  LatentField z = random_latent(1, 4, 4, 1);
  for (int t : {1, 500, 1000}) {
    LatentField eps = prior.predict_eps(z, t, s).eps_hat;
    double f = std::sqrt(1.0 - s.alpha_bar[t]);
    for (size_t i = 0; i < z.data.size(); ++i)
      CHECK(eps.data[i] == doctest::Approx(f * z.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("Tweedie identity: clean prediction equals the analytic posterior mean") {
  LatentField mu = random_latent(2, 4, 4, 2);
  double var = 0.7;
  GaussianMixturePrior prior({1.0}, {mu}, var);
  NoiseSchedule s = linear_schedule(1000, 1e-4, 0.02);
  LatentField z = random_latent(2, 4, 4, 3);
  for (int t : {1, 250, 500, 999}) {
    LatentField clean = ddim_predict_clean(z, t, prior.predict_eps(z, t, s), s);
    double a = s.alpha_bar[t], sa = std::sqrt(a), s2 = a * var + (1 - a);
    for (size_t i = 0; i < z.data.size(); ++i) {
      double expect = (sa * var * z.data[i] + (1 - a) * mu.data[i]) / s2;
      CHECK(std::abs(clean.data[i] - expect) < 1e-10);
    }
  }
}

TEST_CASE("responsibilities sum to 1 and survive extreme separation") {
  std::vector<LatentField> means;
  for (int k = 0; k < 5; ++k) means.push_back(random_latent(1, 6, 6, 10 + k, 1000.0));
  GaussianMixturePrior prior(std::vector<double>(5, 0.2), means, 0.5);
  NoiseSchedule s = linear_schedule(1000, 1e-4, 0.02);
  for (int t : {1, 400, 1000}) {
    LatentField z = random_latent(1, 6, 6, 20 + t, 1000.0);
    std::vector<double> r = prior.responsibilities(z, t, s);
    double sum = 0.0;
    for (double v : r) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("parallel posterior mean matches the serial reference") {
  std::vector<LatentField> means;
  for (int k = 0; k < 7; ++k) means.push_back(random_latent(2, 8, 8, 30 + k));
  std::vector<double> w{0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1};
  GaussianMixturePrior prior(w, means, 1.3);
  NoiseSchedule s = linear_schedule(1000, 1e-4, 0.02);
  LatentField z = random_latent(2, 8, 8, 40);
  for (int t : {1, 700}) {
    LatentField p = prior.posterior_mean(z, t, s);
    LatentField q = gmm_posterior_mean_serial(prior, z, t, s);
    CHECK(max_abs_diff(p, q) < 1e-12);
  }
}

TEST_CASE("full-Jacobian clean VJP matches finite differences") {
  std::vector<LatentField> means;
  for (int k = 0; k < 3; ++k) means.push_back(random_latent(1, 4, 4, 50 + k));
  GaussianMixturePrior prior({0.5, 0.3, 0.2}, means, 0.8);
  NoiseSchedule s = linear_schedule(1000, 1e-4, 0.02);
  LatentField z = random_latent(1, 4, 4, 60);
  int t = 600;

  LatentField u = random_latent(1, 4, 4, 61);   // direction
  LatentField w = random_latent(1, 4, 4, 62);   // cotangent
  LatentField vjp = prior.clean_vjp(z, t, s, w, /*full_jacobian=*/true);

  double h = 1e-6;
  LatentField zp = z, zm = z;
  for (size_t i = 0; i < z.data.size(); ++i) {
    zp.data[i] += h * u.data[i];
    zm.data[i] -= h * u.data[i];
  }
  // Clean map = posterior mean for the exact mixture denoiser.
  LatentField ep = prior.posterior_mean(zp, t, s);
  LatentField em = prior.posterior_mean(zm, t, s);
  double fd = 0.0;
  for (size_t i = 0; i < z.data.size(); ++i)
    fd += w.data[i] * (ep.data[i] - em.data[i]) / (2 * h);
  CHECK(dot(vjp, u) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("stop-gradient clean VJP is cotangent / sqrt(alpha_bar)") {
  GaussianMixturePrior prior({1.0}, {LatentField(1, 3, 3)}, 1.0);
  NoiseSchedule s = linear_schedule(100, 1e-4, 0.02);
  LatentField z = random_latent(1, 3, 3, 70);
  LatentField w = random_latent(1, 3, 3, 71);
  LatentField vjp = prior.clean_vjp(z, 40, s, w, false);
  double f = 1.0 / std::sqrt(s.alpha_bar[40]);
  for (size_t i = 0; i < w.data.size(); ++i)
    CHECK(vjp.data[i] == doctest::Approx(f * w.data[i]).epsilon(1e-12));
}

TEST_CASE("deterministic DDIM matches the closed-form affine recursion") {
  // With a single Gaussian component both eps_hat and the update are affine
  // in z, so the whole 1000-step loop collapses to scalars z0 = A z + B mu.
  LatentField mu = random_latent(1, 4, 4, 80);
  double var = 0.6;
  GaussianMixturePrior prior({1.0}, {mu}, var);
  NoiseSchedule s = linear_schedule(1000, 1e-4, 0.02);
  LatentField z = random_latent(1, 4, 4, 81, 2.0);
  LatentField z_lib = z;
  for (int t = 1000; t >= 1; --t) {
    EpsilonPrediction eps = prior.predict_eps(z_lib, t, s);
    z_lib = ddim_step(z_lib, t, ddim_predict_clean(z_lib, t, eps, s), eps, s);
  }
  double A = 1.0, B = 0.0;
  for (int t = 1000; t >= 1; --t) {
    double a = s.alpha_bar[t], ap = s.alpha_bar[t - 1];
    double sa = std::sqrt(a), s2 = a * var + (1 - a);
    double cz = sa * var / s2, cmu = (1 - a) / s2;            // E[x0|z] = cz z + cmu mu
    double ez = (1 - sa * cz) / std::sqrt(1 - a);             // eps = ez z + emu mu
    double emu = -sa * cmu / std::sqrt(1 - a);
    double step_z = std::sqrt(ap) * cz + std::sqrt(1 - ap) * ez;
    double step_mu = std::sqrt(ap) * cmu + std::sqrt(1 - ap) * emu;
    B = step_z * B + step_mu;
    A = step_z * A;
  }
  for (size_t i = 0; i < z.data.size(); ++i)
    CHECK(std::abs(z_lib.data[i] - (A * z.data[i] + B * mu.data[i])) < 1e-8);
}

TEST_CASE("ddim_step guidance is additive") {
  GaussianMixturePrior prior({1.0}, {LatentField(1, 4, 4)}, 1.0);
  NoiseSchedule s = linear_schedule(100, 1e-4, 0.02);
  LatentField z = random_latent(1, 4, 4, 90);
  EpsilonPrediction eps = prior.predict_eps(z, 50, s);
  LatentField clean = ddim_predict_clean(z, 50, eps, s);
  LatentField g = random_latent(1, 4, 4, 91);
  LatentField with = ddim_step(z, 50, clean, eps, s, &g);
  LatentField without = ddim_step(z, 50, clean, eps, s);
  for (size_t i = 0; i < z.data.size(); ++i)
    CHECK(with.data[i] == doctest::Approx(without.data[i] + g.data[i]).epsilon(1e-12));
}

TEST_CASE("timestep bounds are enforced") {
  GaussianMixturePrior prior({1.0}, {LatentField(1, 2, 2)}, 1.0);
  NoiseSchedule s = linear_schedule(10, 1e-4, 0.02);
  LatentField z(1, 2, 2);
  CHECK_THROWS_AS(prior.predict_eps(z, 0, s), std::invalid_argument);
  CHECK_THROWS_AS(prior.predict_eps(z, 11, s), std::invalid_argument);
}

TEST_CASE("shrinkage prior with zero threshold predicts zero noise") {
  ShrinkagePrior prior(0.0);
  NoiseSchedule s = linear_schedule(1000, 1e-4, 0.02);
  LatentField z = random_latent(1, 8, 8, 100);
  for (int t : {1, 500, 1000}) {
    LatentField eps = prior.predict_eps(z, t, s).eps_hat;
    CHECK(l2(eps) < 1e-10);
  }
}

TEST_CASE("shrinkage prior noise term is nonexpansive") {
  // sqrt(1-a) * eps_hat(z) = z - sqrt(a) x0(z) with x0 a proximal map in an
  // orthonormal basis, so it is 1-Lipschitz in z.
  ShrinkagePrior prior(0.8);
  NoiseSchedule s = linear_schedule(1000, 1e-4, 0.02);
  for (int t : {50, 400, 900}) {
    double f = std::sqrt(1.0 - s.alpha_bar[t]);
    for (uint64_t seed = 0; seed < 5; ++seed) {
      LatentField z1 = random_latent(1, 8, 8, 200 + seed);
      LatentField z2 = random_latent(1, 8, 8, 300 + seed);
      LatentField e1 = prior.predict_eps(z1, t, s).eps_hat;
      LatentField e2 = prior.predict_eps(z2, t, s).eps_hat;
      LatentField dz = z1, de = e1;
      for (size_t i = 0; i < dz.data.size(); ++i) {
        dz.data[i] -= z2.data[i];
        de.data[i] = f * (e1.data[i] - e2.data[i]);
      }
      CHECK(l2(de) <= l2(dz) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("orthonormal DCT matches the direct definition and round-trips") {
  LatentField x = random_latent(2, 6, 5, 400);
  LatentField k = dct2_ortho(x);
  LatentField oracle = naive_dct2(x);
  CHECK(max_abs_diff(k, oracle) < 1e-12);
  CHECK(std::abs(l2(k) - l2(x)) < 1e-12 * l2(x));  // isometry
  CHECK(max_abs_diff(idct2_ortho(k), x) < 1e-12);
}

}  // TEST_SUITE
