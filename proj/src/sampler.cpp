#include "mrpd/sampler.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mrpd/quality.hpp"
#include "mrpd/rng.hpp"

namespace mrpd {

namespace {

bool all_finite(const LatentField& z) {
  for (double v : z.data)
    if (!std::isfinite(v)) return false;
  return true;
}

// Pre-clamp magnitude estimate used wherever a gradient has to flow: the
// affine denormalization without the nonnegativity projection.
RealField linear_denorm(const RealField& unit, const NormRange& range) {
  RealField out(unit.height, unit.width, /*magnitude=*/false);
  for (size_t i = 0; i < unit.data.size(); ++i) out.data[i] = range.from_unit(unit.data[i]);
  return out;
}

ComplexField masked_residual(const ComplexField& k_rpm, const RealField& x0,
                             const PhaseField& theta_hat, const SamplingMask& mask) {
  ComplexField khat = fft2c(compose_polar(x0, theta_hat));
  ComplexField r(khat.height, khat.width, Domain::KSpace);
  for (size_t i = 0; i < r.data.size(); ++i)
    r.data[i] = mask.keep[i] ? (k_rpm.data[i] - khat.data[i]) : cplx(0.0, 0.0);
  return r;
}

double l2_norm(const ComplexField& f) {
  double s = 0.0;
  for (const cplx& v : f.data) s += std::norm(v);
  return std::sqrt(s);
}

struct RunContext {
  const Measurement& meas;
  const DenoisingPrior& prior;
  const Codec& codec;
  const NoiseSchedule& schedule;
  SamplerConfig cfg;
  GuidanceMode mode = GuidanceMode::HardToSoft;
  const RealField* reference = nullptr;
};

ReconstructResult run_sampler(const RunContext& ctx) {
  const SamplerConfig& cfg = ctx.cfg;
  ValidationResult vc = validate(cfg);
  if (!vc.ok) throw ConfigError(vc.message);
  ValidationResult vm = validate(ctx.meas);
  if (!vm.ok) throw std::invalid_argument(vm.message);
  if (cfg.T != ctx.schedule.T) throw ConfigError("sampler: cfg.T does not match schedule");

  const int h = ctx.meas.kdata.height, w = ctx.meas.kdata.width;
  if (ctx.reference && (ctx.reference->height != h || ctx.reference->width != w))
    throw std::invalid_argument("sampler: reference shape mismatch");

  // Zero-filled image, randomized phase, and the fixed normalization range.
  ComplexField y = ifft2c(ctx.meas.kdata);
  auto [k_rpm, theta_hat] = modulate_phase(y, cfg.lambda, cfg.phase_seed);
  RealField mag_y = magnitude(y);
  NormRange range = norm_range(mag_y);
  if (range.hi <= range.lo) throw NumericError("sampler: measurement has zero dynamic range");

  const int S = static_cast<int>(std::floor(cfg.t0 * cfg.T));
  const int W = static_cast<int>(std::floor(cfg.t_ws * cfg.T));
  if (S < 1) throw ConfigError("sampler: t0*T < 1 leaves no steps");

  // z_S = sqrt(a_S) encode(norm(|y|)) + sqrt(1 - a_S) eps, eps fixed per seed.
  LatentField z = encode(ctx.codec, normalize(mag_y, range));
  {
    Rng rng(derive_seed(cfg.noise_seed, 0x696e6974u));
    double sa = std::sqrt(ctx.schedule.alpha_bar[S]);
    double sb = std::sqrt(1.0 - ctx.schedule.alpha_bar[S]);
    for (double& v : z.data) v = sa * v + sb * rng.normal();
  }

  const bool record = cfg.record_trajectory || ctx.reference != nullptr;
  Trajectory traj;
  if (record) traj.steps.reserve(static_cast<size_t>(S));

  for (int t = S - 1; t >= 0; --t) {
    const int t_next = t + 1;
    EpsilonPrediction eps = ctx.prior.predict_eps(z, t_next, ctx.schedule);
    LatentField clean = ddim_predict_clean(z, t_next, eps, ctx.schedule);

    bool hard;
    switch (ctx.mode) {
      case GuidanceMode::HardOnly: hard = true; break;
      case GuidanceMode::SoftOnly: hard = false; break;
      default: hard = t > W; break;
    }

    LatentField guidance;
    bool have_guidance = false;
    if (hard) {
      if ((S - 1 - t) % cfg.dc_every == 0) {
        RealField x0 = denormalize(decode(ctx.codec, clean), range);
        ComplexField k_hat = fft2c(compose_polar(x0, theta_hat));
        ComplexField k_dc(h, w, Domain::KSpace);
        for (size_t i = 0; i < k_dc.data.size(); ++i)
          k_dc.data[i] = ctx.meas.mask.keep[i] ? k_rpm.data[i] : k_hat.data[i];
        ComplexField x_dc = ifft2c(k_dc);
        if (cfg.dc_observer) cfg.dc_observer(t, x_dc);
        clean = encode(ctx.codec, normalize(magnitude(x_dc), range));
      }
    } else {
      SoftGuidance sg = soft_cg_gradient(z, t_next, ctx.prior, ctx.codec, ctx.schedule, k_rpm,
                                         theta_hat, ctx.meas.mask, range, cfg.squared_objective,
                                         cfg.full_jacobian);
      guidance = std::move(sg.grad);
      for (double& v : guidance.data) v *= -cfg.gamma;
      have_guidance = true;
    }

    z = ddim_step(z, t_next, clean, eps, ctx.schedule, have_guidance ? &guidance : nullptr);
    if (!all_finite(z))
      throw NumericError("sampler: non-finite latent at step t=" + std::to_string(t));

    if (record) {
      TrajectoryStep step;
      step.t = t;
      RealField est = denormalize(decode(ctx.codec, clean), range);
      step.l2_residual = l2_norm(masked_residual(k_rpm, est, theta_hat, ctx.meas.mask));
      if (ctx.reference) step.psnr_db = psnr(est, *ctx.reference);
      if (cfg.record_trajectory) step.clean_estimate = std::move(est);
      traj.steps.push_back(std::move(step));
    }
  }

  ReconstructResult out;
  out.image = denormalize(decode(ctx.codec, z), range);
  out.trajectory = std::move(traj);
  return out;
}

}  // namespace

const char* to_string(GuidanceMode m) {
  switch (m) {
    case GuidanceMode::HardOnly: return "hard";
    case GuidanceMode::SoftOnly: return "soft";
    default: return "hard-to-soft";
  }
}

ValidationResult validate(const SamplerConfig& cfg) {
  if (!(cfg.t0 > 0.0 && cfg.t0 <= 1.0)) return {false, "cfg.t0 must lie in (0, 1]"};
  if (!(cfg.t_ws >= 0.0 && cfg.t_ws < cfg.t0)) return {false, "cfg.t_ws must lie in [0, t0)"};
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) return {false, "cfg.lambda must lie in [0, 1]"};
  if (!(cfg.gamma >= 0.0)) return {false, "cfg.gamma must be >= 0"};
  if (cfg.T < 1) return {false, "cfg.T must be positive"};
  if (cfg.dc_every < 1) return {false, "cfg.dc_every must be >= 1"};
  return {};
}

SoftGuidance soft_cg_gradient(const LatentField& z, int t_next, const DenoisingPrior& prior,
                              const Codec& codec, const NoiseSchedule& schedule,
                              const ComplexField& k_rpm, const PhaseField& theta_hat,
                              const SamplingMask& mask, const NormRange& range,
                              bool squared_objective, bool full_jacobian) {
  EpsilonPrediction eps = prior.predict_eps(z, t_next, schedule);
  LatentField clean = ddim_predict_clean(z, t_next, eps, schedule);
  RealField x0 = linear_denorm(decode(codec, clean, /*clamp=*/false), range);

  ComplexField r = masked_residual(k_rpm, x0, theta_hat, mask);
  double nrm = l2_norm(r);

  SoftGuidance out;
  out.objective = squared_objective ? nrm * nrm : nrm;
  out.grad = LatentField(z.channels, z.height, z.width);
  if (nrm == 0.0) return out;  // gradient of ||r|| at r = 0 defined as 0

  // dL/dk_hat pulled back through the unitary FFT: w = ifft2c(scale * r).
  double scale = squared_objective ? 2.0 : 1.0 / nrm;
  ComplexField rs(r.height, r.width, Domain::KSpace);
  for (size_t i = 0; i < r.data.size(); ++i) rs.data[i] = scale * r.data[i];
  ComplexField wfield = ifft2c(rs);

  // Through the phase-conjugate multiply, real part, and denorm scale.
  RealField cot_img(x0.height, x0.width);
  double denorm_scale = (range.hi - range.lo) * 0.5;
  for (int rr = 0; rr < x0.height; ++rr)
    for (int cc = 0; cc < x0.width; ++cc) {
      cplx e = std::polar(1.0, theta_hat.at(rr, cc));
      cot_img.at(rr, cc) = -std::real(std::conj(wfield.at(rr, cc)) * e) * denorm_scale;
    }

  LatentField cot_clean = decode_adjoint(codec, cot_img);
  out.grad = prior.clean_vjp(z, t_next, schedule, cot_clean, full_jacobian);
  return out;
}

ReconstructResult reconstruct(const Measurement& meas, const DenoisingPrior& prior,
                              const Codec& codec, const NoiseSchedule& schedule,
                              const SamplerConfig& cfg, const RealField* reference) {
  RunContext ctx{meas, prior, codec, schedule, cfg, GuidanceMode::HardToSoft, reference};
  return run_sampler(ctx);
}

Trajectory guidance_mode_ablation(const Measurement& meas, const DenoisingPrior& prior,
                                  const Codec& codec, const NoiseSchedule& schedule,
                                  const SamplerConfig& cfg, GuidanceMode mode, bool rpm,
                                  const RealField* reference) {
  RunContext ctx{meas, prior, codec, schedule, cfg, mode, reference};
  if (!rpm) ctx.cfg.lambda = 0.0;
  return run_sampler(ctx).trajectory;
}

std::vector<ParetoPoint> pareto_sweep(const std::vector<Measurement>& meas,
                                      const std::vector<RealField>& references,
                                      const DenoisingPrior& prior, const Codec& codec,
                                      const NoiseSchedule& schedule, const SamplerConfig& base,
                                      const std::vector<std::pair<double, double>>& grid) {
  if (meas.empty()) throw std::invalid_argument("pareto_sweep: empty measurement set");
  if (references.size() != meas.size())
    throw std::invalid_argument("pareto_sweep: references must match measurements");

  std::vector<ParetoPoint> table;
  table.reserve(grid.size());
  for (const auto& [t0, t_ws] : grid) {
    SamplerConfig cfg = base;
    cfg.t0 = t0;
    cfg.t_ws = t_ws;
    ValidationResult v = validate(cfg);
    if (!v.ok) throw ConfigError("pareto_sweep: " + v.message);

    auto start = std::chrono::steady_clock::now();
    double sum_psnr = 0.0;
    for (size_t i = 0; i < meas.size(); ++i) {
      ReconstructResult r = reconstruct(meas[i], prior, codec, schedule, cfg);
      sum_psnr += psnr(r.image, references[i]);
    }
    auto stop = std::chrono::steady_clock::now();

    ParetoPoint p;
    p.t0 = t0;
    p.t_ws = t_ws;
    p.mean_psnr_db = sum_psnr / static_cast<double>(meas.size());
    p.wall_time_s = std::chrono::duration<double>(stop - start).count();
    table.push_back(p);
  }

  // Brute-force dominance: efficient unless some point is at least as fast
  // and at least as accurate, strictly better in one.
  for (size_t i = 0; i < table.size(); ++i) {
    bool dominated = false;
    for (size_t j = 0; j < table.size() && !dominated; ++j) {
      if (j == i) continue;
      bool ge = table[j].mean_psnr_db >= table[i].mean_psnr_db &&
                table[j].wall_time_s <= table[i].wall_time_s;
      bool strict = table[j].mean_psnr_db > table[i].mean_psnr_db ||
                    table[j].wall_time_s < table[i].wall_time_s;
      dominated = ge && strict;
    }
    table[i].pareto_efficient = !dominated;
  }
  return table;
}

}  // namespace mrpd
