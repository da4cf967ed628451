#pragma once

#include <memory>
#include <vector>

#include "mrpd/types.hpp"

namespace mrpd {

/// Cumulative noise schedule: alpha_bar[0] = 1, strictly decreasing, T+1 entries.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> alpha_bar;
};

ValidationResult validate(const NoiseSchedule& s);

/// Standard DDPM schedule: beta linearly spaced, alpha_bar[t] = prod(1 - beta_s).
NoiseSchedule linear_schedule(int T, double beta_start, double beta_end);

struct EpsilonPrediction {
  LatentField eps_hat;
};

/// Epsilon-prediction interface standing in for a learned denoiser.
class DenoisingPrior {
 public:
  virtual ~DenoisingPrior() = default;

  virtual EpsilonPrediction predict_eps(const LatentField& z_t, int t,
                                        const NoiseSchedule& schedule) const = 0;

  /// Vector-Jacobian product of the clean-estimate map z_t -> x0_hat(z_t).
  /// Default treats eps_hat as constant in z_t (stop-gradient), giving
  /// cotangent / sqrt(alpha_bar[t]).
  virtual LatentField clean_vjp(const LatentField& z_t, int t, const NoiseSchedule& schedule,
                                const LatentField& cotangent, bool full_jacobian) const;
};

/// Isotropic Gaussian mixture over clean latents; predict_eps is the exact
/// Tweedie answer under the mixture, so it doubles as an analytic oracle.
class GaussianMixturePrior : public DenoisingPrior {
 public:
  GaussianMixturePrior(std::vector<double> weights, std::vector<LatentField> means, double var);

  EpsilonPrediction predict_eps(const LatentField& z_t, int t,
                                const NoiseSchedule& schedule) const override;
  LatentField clean_vjp(const LatentField& z_t, int t, const NoiseSchedule& schedule,
                        const LatentField& cotangent, bool full_jacobian) const override;

  /// E[x0 | z_t] under the mixture.
  LatentField posterior_mean(const LatentField& z_t, int t, const NoiseSchedule& schedule) const;
  /// Posterior responsibilities, computed in log-space.
  std::vector<double> responsibilities(const LatentField& z_t, int t,
                                       const NoiseSchedule& schedule) const;

  int K() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<LatentField>& means() const { return means_; }
  double var() const { return var_; }

 private:
  std::vector<double> weights_;
  std::vector<LatentField> means_;
  double var_;
};

/// Non-learned image-like prior: soft-thresholding in the orthonormal DCT
/// domain of the implied clean estimate.
class ShrinkagePrior : public DenoisingPrior {
 public:
  explicit ShrinkagePrior(double threshold_scale);

  EpsilonPrediction predict_eps(const LatentField& z_t, int t,
                                const NoiseSchedule& schedule) const override;

  double threshold_scale() const { return tau_; }

 private:
  double tau_;
};

/// Unscaled clean estimate (z_t - sqrt(1-a_t) eps_hat) / sqrt(a_t).
LatentField ddim_predict_clean(const LatentField& z_t, int t, const EpsilonPrediction& eps_hat,
                               const NoiseSchedule& schedule);

/// Deterministic DDIM update:
/// z_{t-1} = sqrt(a_{t-1}) clean + sqrt(1-a_{t-1}) eps_hat [+ guidance].
LatentField ddim_step(const LatentField& z_t, int t, const LatentField& clean,
                      const EpsilonPrediction& eps_hat, const NoiseSchedule& schedule,
                      const LatentField* guidance = nullptr);

/// Orthonormal 2D DCT-II per channel, and its inverse.
LatentField dct2_ortho(const LatentField& x);
LatentField idct2_ortho(const LatentField& x);

// Serial reference for the mixture posterior mean, kept for tests and the
// benchmark target.
LatentField gmm_posterior_mean_serial(const GaussianMixturePrior& prior, const LatentField& z_t,
                                      int t, const NoiseSchedule& schedule);

}  // namespace mrpd
