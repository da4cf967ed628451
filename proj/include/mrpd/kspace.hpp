#pragma once

#include <utility>

#include "mrpd/types.hpp"

namespace mrpd {

/// Undersampled k-space data. kdata is zero-filled outside the mask.
struct Measurement {
  ComplexField kdata;  // Domain::KSpace, centered layout
  SamplingMask mask;
  double noise_sigma = 0.0;
};

ValidationResult validate(const Measurement& m);

/// Centered unitary 2D DFT: fftshift(FFT(ifftshift(x))) / sqrt(H*W).
ComplexField fft2c(const ComplexField& img);

/// Inverse of fft2c, same unitary normalization.
ComplexField ifft2c(const ComplexField& k);

/// Forward model k = M .* (F x + eta), eta complex Gaussian with std
/// noise_sigma per sample, deterministic given seed.
Measurement measure(const ComplexField& x, const SamplingMask& mask, double noise_sigma,
                    uint64_t seed);

/// Random phase modulation: mixes arg(y) with an i.i.d. uniform phase field
/// (theta_hat = wrap(lambda*theta_r + (1-lambda)*theta_y)) and returns the
/// modulated k-space F(|y| e^{i theta_hat}) together with theta_hat.
std::pair<ComplexField, PhaseField> modulate_phase(const ComplexField& y, double lambda,
                                                   uint64_t seed);

/// Elementwise magnitude, |0| = 0.
RealField magnitude(const ComplexField& f);

/// Elementwise phase, arg(0) = 0.
PhaseField phase_of(const ComplexField& f);

/// mag(r,c) * e^{i phase(r,c)} as an image-domain field.
ComplexField compose_polar(const RealField& mag, const PhaseField& phase);

}  // namespace mrpd
