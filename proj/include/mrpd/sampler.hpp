#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mrpd/autocodec.hpp"
#include "mrpd/kspace.hpp"
#include "mrpd/phantom.hpp"
#include "mrpd/prior.hpp"
#include "mrpd/types.hpp"

namespace mrpd {

enum class GuidanceMode { HardOnly, SoftOnly, HardToSoft };

const char* to_string(GuidanceMode m);

struct SamplerConfig {
  double t0 = 0.4;      // start fraction of the schedule, in (0, 1]
  double t_ws = 0.3;    // watershed fraction, in [0, t0)
  double lambda = 1.0;  // random-phase mixing weight
  double gamma = 0.01;  // soft-guidance step size
  int T = 1000;
  int dc_every = 2;  // hard data-consistency cadence
  uint64_t noise_seed = 0;
  uint64_t phase_seed = 0;
  bool record_trajectory = false;

  // Soft-guidance variants; the defaults are the reference behavior.
  bool squared_objective = false;  // ||r||^2 instead of ||r||
  bool full_jacobian = false;      // differentiate through the prior where analytic

  // Debug observer called with the complex image right after each hard
  // data-consistency projection. Not part of the reproducible state.
  std::function<void(int t, const ComplexField& x_dc)> dc_observer;
};

ValidationResult validate(const SamplerConfig& cfg);

struct TrajectoryStep {
  int t = 0;
  std::optional<double> psnr_db;  // set when a reference is supplied
  double l2_residual = 0.0;       // ||M (k_rpm - F(x0_hat e^{i theta_hat}))||
  std::optional<RealField> clean_estimate;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;  // t strictly decreasing
};

struct ReconstructResult {
  RealField image;  // magnitude
  Trajectory trajectory;
};

/// Latent-diffusion posterior sampling with random phase modulation and
/// hard-to-soft measurement guidance. Deterministic given all inputs.
ReconstructResult reconstruct(const Measurement& meas, const DenoisingPrior& prior,
                              const Codec& codec, const NoiseSchedule& schedule,
                              const SamplerConfig& cfg, const RealField* reference = nullptr);

/// reconstruct with the guidance phase split overridden; rpm=false replaces
/// the randomized phase with the measured one (lambda = 0).
Trajectory guidance_mode_ablation(const Measurement& meas, const DenoisingPrior& prior,
                                  const Codec& codec, const NoiseSchedule& schedule,
                                  const SamplerConfig& cfg, GuidanceMode mode, bool rpm,
                                  const RealField* reference = nullptr);

struct ParetoPoint {
  double t0 = 0.0;
  double t_ws = 0.0;
  double mean_psnr_db = 0.0;
  double wall_time_s = 0.0;
  bool pareto_efficient = false;
};

/// Sweep (t0, t_ws) pairs over a measurement set and mark the Pareto frontier
/// of mean PSNR (higher better) versus wall time (lower better).
std::vector<ParetoPoint> pareto_sweep(const std::vector<Measurement>& meas,
                                      const std::vector<RealField>& references,
                                      const DenoisingPrior& prior, const Codec& codec,
                                      const NoiseSchedule& schedule, const SamplerConfig& base,
                                      const std::vector<std::pair<double, double>>& grid);

/// Soft conjugate-guidance objective L(z) = ||M (k_rpm - F(x0_hat(z) e^{i
/// theta_hat}))|| and its exact gradient through the linear decode/denorm
/// chain. z is the latent at level t_next; exposed for gradient checks.
struct SoftGuidance {
  double objective = 0.0;
  LatentField grad;
};

SoftGuidance soft_cg_gradient(const LatentField& z, int t_next, const DenoisingPrior& prior,
                              const Codec& codec, const NoiseSchedule& schedule,
                              const ComplexField& k_rpm, const PhaseField& theta_hat,
                              const SamplingMask& mask, const NormRange& range,
                              bool squared_objective, bool full_jacobian);

}  // namespace mrpd
