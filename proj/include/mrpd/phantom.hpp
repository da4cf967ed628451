#pragma once

#include <memory>
#include <vector>

#include "mrpd/autocodec.hpp"
#include "mrpd/prior.hpp"
#include "mrpd/types.hpp"

namespace mrpd {

/// Classical 10-ellipse head phantom, values clamped to [0,1].
RealField shepp_logan_reference(int h, int w);

/// Seed-jittered variant: ellipse centers/axes/angles/intensities perturbed
/// by up to 5%. Deterministic per seed.
RealField shepp_logan(int h, int w, uint64_t variant_seed);

/// Low-order 2D polynomial phase surface before wrapping; coefficients are
/// drawn from seed and scaled by smoothness.
RealField synth_phase_poly(int h, int w, double smoothness, uint64_t seed);

/// synth_phase_poly wrapped into [-pi, pi).
PhaseField synth_phase(int h, int w, double smoothness, uint64_t seed);

/// Ground-truth complex image: jittered phantom magnitude with a smooth
/// synthetic phase.
ComplexField phantom_complex(int h, int w, uint64_t variant_seed, double phase_smoothness,
                             uint64_t phase_seed);

/// Gaussian mixture whose means are encoded phantom latents (one component
/// per seed), uniform weights, shared variance from intra-set spread.
GaussianMixturePrior build_prior_from_phantoms(int h, int w, const Codec& codec,
                                               const std::vector<uint64_t>& seeds);

/// Affine map of a magnitude image onto [-1,1] using its own min/max, plus
/// the inverse; the range is captured once and reused for a whole run.
struct NormRange {
  double lo = 0.0;
  double hi = 1.0;
  double to_unit(double v) const;
  double from_unit(double v) const;
};

NormRange norm_range(const RealField& mag);
RealField normalize(const RealField& mag, const NormRange& r);
RealField denormalize(const RealField& unit, const NormRange& r, bool as_magnitude = true);

}  // namespace mrpd
