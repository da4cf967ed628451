#include "mrpd/prior.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "mrpd/parallel.hpp"

namespace mrpd {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_t(int t, const NoiseSchedule& s) {
  if (t < 1 || t > s.T) throw std::invalid_argument("timestep out of range: " + std::to_string(t));
}

void check_shape(const LatentField& a, const LatentField& b, const char* where) {
  if (a.channels != b.channels || a.height != b.height || a.width != b.width)
    throw std::invalid_argument(std::string(where) + ": latent shape mismatch");
}

struct R2rPlanCache {
  std::mutex mu;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  fftw_plan get(int h, int w, fftw_r2r_kind kind) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(h, w, static_cast<int>(kind));
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::vector<double> tmp(static_cast<size_t>(h) * w);
    fftw_plan p = fftw_plan_r2r_2d(h, w, tmp.data(), tmp.data(), kind, kind,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(key, p);
    return p;
  }
};

R2rPlanCache& r2r_cache() {
  static R2rPlanCache cache;
  return cache;
}

}  // namespace

ValidationResult validate(const NoiseSchedule& s) {
  if (s.T <= 0) return {false, "nonpositive T"};
  if (s.alpha_bar.size() != static_cast<size_t>(s.T) + 1)
    return {false, "alpha_bar length != T+1"};
  if (s.alpha_bar[0] != 1.0) return {false, "alpha_bar[0] != 1"};
  for (int t = 1; t <= s.T; ++t) {
    if (!(s.alpha_bar[t] > 0.0)) return {false, "alpha_bar nonpositive at t=" + std::to_string(t)};
    if (!(s.alpha_bar[t] < s.alpha_bar[t - 1]))
      return {false, "alpha_bar not strictly decreasing at t=" + std::to_string(t)};
  }
  return {};
}

NoiseSchedule linear_schedule(int T, double beta_start, double beta_end) {
  if (T <= 0) throw std::invalid_argument("linear_schedule: T must be positive");
  if (!(beta_start > 0.0) || beta_start > beta_end || beta_end >= 1.0)
    throw std::invalid_argument("linear_schedule: need 0 < beta_start <= beta_end < 1");
  NoiseSchedule s;
  s.T = T;
  s.alpha_bar.resize(T + 1);
  s.alpha_bar[0] = 1.0;
  double prod = 1.0;
  for (int t = 1; t <= T; ++t) {
    double beta = T == 1 ? beta_start
                         : beta_start + (beta_end - beta_start) * (t - 1) / (T - 1);
    prod *= 1.0 - beta;
    s.alpha_bar[t] = prod;
  }
  return s;
}

LatentField DenoisingPrior::clean_vjp(const LatentField& z_t, int t, const NoiseSchedule& schedule,
                                      const LatentField& cotangent, bool /*full_jacobian*/) const {
  check_t(t, schedule);
  check_shape(z_t, cotangent, "clean_vjp");
  double inv_sqrt_a = 1.0 / std::sqrt(schedule.alpha_bar[t]);
  LatentField out = cotangent;
  for (auto& v : out.data) v *= inv_sqrt_a;
  return out;
}

GaussianMixturePrior::GaussianMixturePrior(std::vector<double> weights,
                                           std::vector<LatentField> means, double var)
    : weights_(std::move(weights)), means_(std::move(means)), var_(var) {
  if (weights_.empty() || weights_.size() != means_.size())
    throw std::invalid_argument("GaussianMixturePrior: weights/means size mismatch");
  if (!(var_ > 0.0)) throw std::invalid_argument("GaussianMixturePrior: var must be positive");
  double sum = 0.0;
  for (double w : weights_) {
    if (w < 0.0) throw std::invalid_argument("GaussianMixturePrior: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("GaussianMixturePrior: weights must sum to 1");
  for (size_t k = 1; k < means_.size(); ++k) check_shape(means_[k], means_[0], "GaussianMixturePrior");
}

std::vector<double> GaussianMixturePrior::responsibilities(const LatentField& z_t, int t,
                                                           const NoiseSchedule& schedule) const {
  check_t(t, schedule);
  check_shape(z_t, means_[0], "responsibilities");
  double a = schedule.alpha_bar[t];
  double sqrt_a = std::sqrt(a);
  double s2 = a * var_ + (1.0 - a);  // marginal variance per coordinate
  size_t d = z_t.size();
  int K = this->K();

  std::vector<double> log_lik(K);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < K; ++k) {
    const double* mu = means_[k].data.data();
    const double* z = z_t.data.data();
    double ssq = deterministic_sum(d, [&](size_t i) {
      double diff = z[i] - sqrt_a * mu[i];
      return diff * diff;
    });
    log_lik[k] = std::log(weights_[k] > 0 ? weights_[k] : 1e-300) -
                 0.5 * ssq / s2 - 0.5 * d * (kLog2Pi + std::log(s2));
  }

  double mx = *std::max_element(log_lik.begin(), log_lik.end());
  double denom = 0.0;
  for (int k = 0; k < K; ++k) denom += std::exp(log_lik[k] - mx);
  std::vector<double> r(K);
  for (int k = 0; k < K; ++k) r[k] = std::exp(log_lik[k] - mx) / denom;
  return r;
}

LatentField GaussianMixturePrior::posterior_mean(const LatentField& z_t, int t,
                                                 const NoiseSchedule& schedule) const {
  std::vector<double> r = responsibilities(z_t, t, schedule);
  double a = schedule.alpha_bar[t];
  double sqrt_a = std::sqrt(a);
  double s2 = a * var_ + (1.0 - a);
  double cz = sqrt_a * var_ / s2;    // coefficient on z_t in each component mean
  double cm = (1.0 - a) / s2;        // coefficient on mu_k

  LatentField out(z_t.channels, z_t.height, z_t.width);
  size_t n = out.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    double acc = cz * z_t.data[i];
    double mu_mix = 0.0;
    for (int k = 0; k < K(); ++k) mu_mix += r[k] * means_[k].data[i];
    out.data[i] = acc + cm * mu_mix;
  }
  return out;
}

EpsilonPrediction GaussianMixturePrior::predict_eps(const LatentField& z_t, int t,
                                                    const NoiseSchedule& schedule) const {
  LatentField mean = posterior_mean(z_t, t, schedule);
  double a = schedule.alpha_bar[t];
  double sqrt_a = std::sqrt(a);
  double inv = 1.0 / std::sqrt(1.0 - a);
  EpsilonPrediction out{LatentField(z_t.channels, z_t.height, z_t.width)};
  for (size_t i = 0; i < z_t.size(); ++i)
    out.eps_hat.data[i] = (z_t.data[i] - sqrt_a * mean.data[i]) * inv;
  return out;
}

LatentField GaussianMixturePrior::clean_vjp(const LatentField& z_t, int t,
                                            const NoiseSchedule& schedule,
                                            const LatentField& cotangent,
                                            bool full_jacobian) const {
  if (!full_jacobian)
    return DenoisingPrior::clean_vjp(z_t, t, schedule, cotangent, false);
  check_t(t, schedule);
  check_shape(z_t, cotangent, "clean_vjp");

  // With the exact mixture denoiser, the clean map equals E[x0|z], so the
  // full VJP is J_E^T u with
  //   J_E = (sqrt(a) var / s^2) I + sum_k m_k (dr_k/dz)^T.
  std::vector<double> r = responsibilities(z_t, t, schedule);
  double a = schedule.alpha_bar[t];
  double sqrt_a = std::sqrt(a);
  double s2 = a * var_ + (1.0 - a);
  double cz = sqrt_a * var_ / s2;
  double cm = (1.0 - a) / s2;
  size_t n = z_t.size();
  int K = this->K();

  // m_k . u  for each component
  std::vector<double> mdotu(K);
  for (int k = 0; k < K; ++k) {
    const double* mu = means_[k].data.data();
    mdotu[k] = deterministic_sum(n, [&](size_t i) {
      double mk = cz * z_t.data[i] + cm * mu[i];
      return mk * cotangent.data[i];
    });
  }

  LatentField out(z_t.channels, z_t.height, z_t.width);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    double g = cz * cotangent.data[i];
    // dr_k/dz_i = r_k (g_k,i - sum_j r_j g_j,i), g_k,i = -(z_i - sqrt(a) mu_k,i)/s2
    double mean_score = 0.0;
    for (int k = 0; k < K; ++k)
      mean_score += r[k] * (-(z_t.data[i] - sqrt_a * means_[k].data[i]) / s2);
    for (int k = 0; k < K; ++k) {
      double score_k = -(z_t.data[i] - sqrt_a * means_[k].data[i]) / s2;
      g += mdotu[k] * r[k] * (score_k - mean_score);
    }
    out.data[i] = g;
  }
  return out;
}

ShrinkagePrior::ShrinkagePrior(double threshold_scale) : tau_(threshold_scale) {
  if (!(tau_ >= 0.0) || !std::isfinite(tau_))
    throw std::invalid_argument("ShrinkagePrior: threshold_scale must be finite and >= 0");
}

EpsilonPrediction ShrinkagePrior::predict_eps(const LatentField& z_t, int t,
                                              const NoiseSchedule& schedule) const {
  check_t(t, schedule);
  double a = schedule.alpha_bar[t];
  double sqrt_a = std::sqrt(a);
  double thr = tau_ * std::sqrt((1.0 - a) / a);

  LatentField scaled = z_t;
  for (auto& v : scaled.data) v /= sqrt_a;
  LatentField coef = dct2_ortho(scaled);
  for (auto& v : coef.data) {
    double mag = std::abs(v) - thr;
    v = mag > 0.0 ? (v > 0.0 ? mag : -mag) : 0.0;
  }
  LatentField x0 = idct2_ortho(coef);

  double inv = 1.0 / std::sqrt(1.0 - a);
  EpsilonPrediction out{LatentField(z_t.channels, z_t.height, z_t.width)};
  for (size_t i = 0; i < z_t.size(); ++i)
    out.eps_hat.data[i] = (z_t.data[i] - sqrt_a * x0.data[i]) * inv;
  return out;
}

LatentField ddim_predict_clean(const LatentField& z_t, int t, const EpsilonPrediction& eps_hat,
                               const NoiseSchedule& schedule) {
  check_t(t, schedule);
  check_shape(z_t, eps_hat.eps_hat, "ddim_predict_clean");
  double a = schedule.alpha_bar[t];
  double sqrt_a = std::sqrt(a);
  double sq1ma = std::sqrt(1.0 - a);
  LatentField out(z_t.channels, z_t.height, z_t.width);
  for (size_t i = 0; i < z_t.size(); ++i)
    out.data[i] = (z_t.data[i] - sq1ma * eps_hat.eps_hat.data[i]) / sqrt_a;
  return out;
}

LatentField ddim_step(const LatentField& z_t, int t, const LatentField& clean,
                      const EpsilonPrediction& eps_hat, const NoiseSchedule& schedule,
                      const LatentField* guidance) {
  check_t(t, schedule);
  check_shape(z_t, clean, "ddim_step");
  check_shape(z_t, eps_hat.eps_hat, "ddim_step");
  if (guidance) check_shape(z_t, *guidance, "ddim_step guidance");
  double a_prev = schedule.alpha_bar[t - 1];
  double sqrt_a = std::sqrt(a_prev);
  double sq1ma = std::sqrt(1.0 - a_prev);
  LatentField out(z_t.channels, z_t.height, z_t.width);
  for (size_t i = 0; i < z_t.size(); ++i) {
    double v = sqrt_a * clean.data[i] + sq1ma * eps_hat.eps_hat.data[i];
    if (guidance) v += guidance->data[i];
    out.data[i] = v;
  }
  return out;
}

namespace {

LatentField dct2_apply(const LatentField& x, bool forward) {
  LatentField out(x.channels, x.height, x.width);
  int h = x.height, w = x.width;
  fftw_plan plan = r2r_cache().get(h, w, forward ? FFTW_REDFT10 : FFTW_REDFT01);

  // Orthonormal scaling factors per 1D index.
  auto cvec = [](int n) {
    std::vector<double> c(n);
    c[0] = std::sqrt(1.0 / n);
    for (int k = 1; k < n; ++k) c[k] = std::sqrt(2.0 / n);
    return c;
  };
  std::vector<double> cr = cvec(h), cc = cvec(w);

  std::vector<double> buf(static_cast<size_t>(h) * w);
  for (int ch = 0; ch < x.channels; ++ch) {
    const double* src = x.data.data() + static_cast<size_t>(ch) * h * w;
    double* dst = out.data.data() + static_cast<size_t>(ch) * h * w;
    if (forward) {
      std::copy(src, src + static_cast<size_t>(h) * w, buf.begin());
      fftw_execute_r2r(plan, buf.data(), buf.data());
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          dst[static_cast<size_t>(r) * w + c] =
              buf[static_cast<size_t>(r) * w + c] * (cr[r] * 0.5) * (cc[c] * 0.5);
    } else {
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
          double s = (r == 0 ? cr[0] : cr[r] * 0.5) * (c == 0 ? cc[0] : cc[c] * 0.5);
          buf[static_cast<size_t>(r) * w + c] = src[static_cast<size_t>(r) * w + c] * s;
        }
      fftw_execute_r2r(plan, buf.data(), buf.data());
      std::copy(buf.begin(), buf.end(), dst);
    }
  }
  return out;
}

}  // namespace

LatentField dct2_ortho(const LatentField& x) { return dct2_apply(x, true); }

LatentField idct2_ortho(const LatentField& x) { return dct2_apply(x, false); }

LatentField gmm_posterior_mean_serial(const GaussianMixturePrior& prior, const LatentField& z_t,
                                      int t, const NoiseSchedule& schedule) {
  double a = schedule.alpha_bar[t];
  double sqrt_a = std::sqrt(a);
  double s2 = a * prior.var() + (1.0 - a);
  size_t d = z_t.size();
  int K = prior.K();

  std::vector<double> log_lik(K);
  for (int k = 0; k < K; ++k) {
    double ssq = 0.0;
    for (size_t i = 0; i < d; ++i) {
      double diff = z_t.data[i] - sqrt_a * prior.means()[k].data[i];
      ssq += diff * diff;
    }
    log_lik[k] = std::log(prior.weights()[k] > 0 ? prior.weights()[k] : 1e-300) -
                 0.5 * ssq / s2 - 0.5 * d * (kLog2Pi + std::log(s2));
  }
  double mx = *std::max_element(log_lik.begin(), log_lik.end());
  double denom = 0.0;
  for (int k = 0; k < K; ++k) denom += std::exp(log_lik[k] - mx);
  std::vector<double> r(K);
  for (int k = 0; k < K; ++k) r[k] = std::exp(log_lik[k] - mx) / denom;

  double cz = sqrt_a * prior.var() / s2;
  double cm = (1.0 - a) / s2;
  LatentField out(z_t.channels, z_t.height, z_t.width);
  for (size_t i = 0; i < d; ++i) {
    double mu_mix = 0.0;
    for (int k = 0; k < K; ++k) mu_mix += r[k] * prior.means()[k].data[i];
    out.data[i] = cz * z_t.data[i] + cm * mu_mix;
  }
  return out;
}

}  // namespace mrpd
