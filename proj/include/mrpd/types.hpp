#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrpd {

using cplx = std::complex<double>;

enum class Domain { Image, KSpace };

enum class MaskPattern { Uniform1D, Gaussian1D, Gaussian2D, VDPoissonDisk, Full };

const char* to_string(MaskPattern p);
MaskPattern mask_pattern_from_string(const std::string& s);

/// 2D complex-valued signal, row-major. Carries whether it lives in image
/// or (centered) k-space coordinates.
struct ComplexField {
  int height = 0;
  int width = 0;
  Domain domain = Domain::Image;
  std::vector<cplx> data;

  ComplexField() = default;
  ComplexField(int h, int w, Domain d);

  cplx& at(int r, int c) { return data[static_cast<size_t>(r) * width + c]; }
  const cplx& at(int r, int c) const { return data[static_cast<size_t>(r) * width + c]; }
  size_t size() const { return data.size(); }
};

/// 2D real array. `magnitude` marks fields required to be nonnegative.
struct RealField {
  int height = 0;
  int width = 0;
  bool magnitude = false;
  std::vector<double> data;

  RealField() = default;
  RealField(int h, int w, bool mag = false);

  double& at(int r, int c) { return data[static_cast<size_t>(r) * width + c]; }
  const double& at(int r, int c) const { return data[static_cast<size_t>(r) * width + c]; }
  size_t size() const { return data.size(); }
};

/// Binary Cartesian undersampling mask, center-of-k-space at array center.
struct SamplingMask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> keep;  // 0/1 per k-space cell, row-major
  double accel_nominal = 1.0;
  double acs_fraction = 0.0;
  MaskPattern pattern = MaskPattern::Full;

  SamplingMask() = default;
  SamplingMask(int h, int w, MaskPattern p);

  uint8_t& at(int r, int c) { return keep[static_cast<size_t>(r) * width + c]; }
  uint8_t at(int r, int c) const { return keep[static_cast<size_t>(r) * width + c]; }
  size_t kept_count() const;
  double achieved_accel() const;
};

SamplingMask full_mask(int h, int w);

/// Multichannel real latent grid, row-major within each channel.
struct LatentField {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  LatentField() = default;
  LatentField(int c, int h, int w);

  double& at(int c, int r, int col) {
    return data[(static_cast<size_t>(c) * height + r) * width + col];
  }
  const double& at(int c, int r, int col) const {
    return data[(static_cast<size_t>(c) * height + r) * width + col];
  }
  size_t size() const { return data.size(); }
};

/// Per-pixel phase in [-pi, pi).
struct PhaseField {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  PhaseField() = default;
  PhaseField(int h, int w);

  double& at(int r, int c) { return data[static_cast<size_t>(r) * width + c]; }
  const double& at(int r, int c) const { return data[static_cast<size_t>(r) * width + c]; }
};

/// Per-coil images plus optional sensitivity maps (pointwise SSQ-normalized).
struct CoilSet {
  std::vector<ComplexField> images;
  std::vector<ComplexField> sensitivities;

  int n_coils() const { return static_cast<int>(images.size()); }
};

struct ValidationResult {
  bool ok = true;
  std::string message;  // first violated invariant with location, empty if ok
};

ValidationResult validate(const ComplexField& f);
ValidationResult validate(const RealField& f);
ValidationResult validate(const SamplingMask& m);
ValidationResult validate(const LatentField& f);
ValidationResult validate(const PhaseField& f);
ValidationResult validate(const CoilSet& c);

/// Wrap an angle into [-pi, pi).
double wrap_angle(double theta);

// Errors carry a category the CLI maps onto exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mrpd
