#pragma once

#include "mrpd/types.hpp"

namespace mrpd {

/// Peak signal-to-noise ratio in dB, peak = max(ref). Zero MSE reports the
/// capped sentinel 99.99 dB; values above the cap are clipped to it.
double psnr(const RealField& test, const RealField& ref);

/// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
/// dynamic range taken from ref. Requires min side >= 11 and nonzero range.
double ssim(const RealField& test, const RealField& ref);

/// Local SSIM map over valid window centers; serial reference kept for
/// testing and the benchmark target.
RealField ssim_map(const RealField& test, const RealField& ref);
RealField ssim_map_serial(const RealField& test, const RealField& ref);

}  // namespace mrpd
