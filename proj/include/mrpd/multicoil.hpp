#pragma once

#include <vector>

#include "mrpd/kspace.hpp"
#include "mrpd/sampler.hpp"
#include "mrpd/types.hpp"

namespace mrpd {

/// c smooth complex sensitivity maps: Gaussian-bump magnitudes centered on a
/// ring with linear phase ramps, normalized so sum_c |S_c(p)|^2 = 1 at every
/// pixel. Deterministic per seed.
CoilSet simulate_sensitivities(int h, int w, int c, uint64_t seed);

/// Per-coil measurement of S_c .* x with a shared mask and independent noise
/// streams derived from seed.
std::vector<Measurement> measure_multicoil(const ComplexField& x, const CoilSet& sens,
                                           const SamplingMask& mask, double noise_sigma,
                                           uint64_t seed);

/// Coil-by-coil reconstruction combined as the square root of the sum of
/// squared magnitudes (SSOS). Each coil runs with phase seed
/// cfg.phase_seed + coil index, so the result is invariant to coil order.
RealField reconstruct_ssos(const std::vector<Measurement>& meas, const DenoisingPrior& prior,
                           const Codec& codec, const NoiseSchedule& schedule,
                           const SamplerConfig& cfg);

/// Pure SSOS reduction of magnitude images.
RealField ssos_combine(const std::vector<RealField>& mags);

}  // namespace mrpd
