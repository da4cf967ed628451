#pragma once

#include "mrpd/types.hpp"

namespace mrpd {

/// Central ACS columns plus evenly spaced extra columns; seed sets the grid
/// offset. Fully sampled along the readout (row) axis.
SamplingMask uniform1d(int h, int w, double r, double acs_fraction, uint64_t seed);

/// ACS columns plus non-ACS columns drawn without replacement with weight
/// exp(-d^2 / 2 sigma^2), d = distance from the center column.
SamplingMask gaussian1d(int h, int w, double r, double acs_fraction, uint64_t seed);

/// Central ACS square plus i.i.d. Bernoulli cells with a radially Gaussian
/// keep probability; sigma calibrated by bisection to hit the target rate.
SamplingMask gaussian2d(int h, int w, double r, double acs_fraction, uint64_t seed);

/// Variable-density Poisson disk via dart throwing: minimum spacing grows
/// linearly with radius from center; base radius calibrated by bisection.
SamplingMask vd_poisson_disk(int h, int w, double r, double acs_fraction, uint64_t seed);

SamplingMask generate_mask(MaskPattern pattern, int h, int w, double r, double acs_fraction,
                           uint64_t seed);

/// Spacing floor used by vd_poisson_disk at distance d from center:
/// r0 * (1 + d / d_max). Exposed so tests can check the pairwise property.
double vd_radius(double r0, double d, double d_max);

}  // namespace mrpd
