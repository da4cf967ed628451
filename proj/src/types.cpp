#include "mrpd/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrpd {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

bool finite(double v) { return std::isfinite(v); }
bool finite(const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

std::string loc(int r, int c) {
  return "(" + std::to_string(r) + "," + std::to_string(c) + ")";
}
}  // namespace

const char* to_string(MaskPattern p) {
  switch (p) {
    case MaskPattern::Uniform1D: return "uniform1d";
    case MaskPattern::Gaussian1D: return "gaussian1d";
    case MaskPattern::Gaussian2D: return "gaussian2d";
    case MaskPattern::VDPoissonDisk: return "vd_poisson_disk";
    case MaskPattern::Full: return "full";
  }
  return "full";
}

MaskPattern mask_pattern_from_string(const std::string& s) {
  if (s == "uniform1d") return MaskPattern::Uniform1D;
  if (s == "gaussian1d") return MaskPattern::Gaussian1D;
  if (s == "gaussian2d") return MaskPattern::Gaussian2D;
  if (s == "vd_poisson_disk") return MaskPattern::VDPoissonDisk;
  if (s == "full") return MaskPattern::Full;
  throw ConfigError("unknown mask pattern: " + s);
}

ComplexField::ComplexField(int h, int w, Domain d)
    : height(h), width(w), domain(d), data(static_cast<size_t>(h) * w) {
  if (h <= 0 || w <= 0) throw std::invalid_argument("ComplexField: nonpositive dims");
}

RealField::RealField(int h, int w, bool mag)
    : height(h), width(w), magnitude(mag), data(static_cast<size_t>(h) * w) {
  if (h <= 0 || w <= 0) throw std::invalid_argument("RealField: nonpositive dims");
}

SamplingMask::SamplingMask(int h, int w, MaskPattern p)
    : height(h), width(w), keep(static_cast<size_t>(h) * w, 0), pattern(p) {
  if (h <= 0 || w <= 0) throw std::invalid_argument("SamplingMask: nonpositive dims");
}

size_t SamplingMask::kept_count() const {
  size_t n = 0;
  for (uint8_t k : keep) n += k ? 1 : 0;
  return n;
}

double SamplingMask::achieved_accel() const {
  size_t kept = kept_count();
  if (kept == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(keep.size()) / static_cast<double>(kept);
}

SamplingMask full_mask(int h, int w) {
  SamplingMask m(h, w, MaskPattern::Full);
  m.keep.assign(m.keep.size(), 1);
  m.accel_nominal = 1.0;
  m.acs_fraction = 1.0;
  return m;
}

LatentField::LatentField(int c, int h, int w)
    : channels(c), height(h), width(w), data(static_cast<size_t>(c) * h * w) {
  if (c <= 0 || h <= 0 || w <= 0) throw std::invalid_argument("LatentField: nonpositive dims");
}

PhaseField::PhaseField(int h, int w)
    : height(h), width(w), data(static_cast<size_t>(h) * w) {
  if (h <= 0 || w <= 0) throw std::invalid_argument("PhaseField: nonpositive dims");
}

ValidationResult validate(const ComplexField& f) {
  if (f.height <= 0 || f.width <= 0) return {false, "nonpositive dimensions"};
  if (f.data.size() != static_cast<size_t>(f.height) * f.width)
    return {false, "data length does not equal height*width"};
  for (int r = 0; r < f.height; ++r)
    for (int c = 0; c < f.width; ++c)
      if (!finite(f.at(r, c))) return {false, "non-finite value at " + loc(r, c)};
  return {};
}

ValidationResult validate(const RealField& f) {
  if (f.height <= 0 || f.width <= 0) return {false, "nonpositive dimensions"};
  if (f.data.size() != static_cast<size_t>(f.height) * f.width)
    return {false, "data length does not equal height*width"};
  for (int r = 0; r < f.height; ++r)
    for (int c = 0; c < f.width; ++c) {
      double v = f.at(r, c);
      if (!finite(v)) return {false, "non-finite value at " + loc(r, c)};
      if (f.magnitude && v < 0.0) return {false, "negative magnitude at " + loc(r, c)};
    }
  return {};
}

ValidationResult validate(const SamplingMask& m) {
  if (m.height <= 0 || m.width <= 0) return {false, "nonpositive dimensions"};
  if (m.keep.size() != static_cast<size_t>(m.height) * m.width)
    return {false, "keep length does not equal height*width"};
  if (m.accel_nominal < 1.0) return {false, "accel_nominal below 1"};
  if (m.acs_fraction < 0.0 || m.acs_fraction > 1.0) return {false, "acs_fraction outside [0,1]"};

  if (m.pattern == MaskPattern::Full) {
    for (int r = 0; r < m.height; ++r)
      for (int c = 0; c < m.width; ++c)
        if (!m.at(r, c)) return {false, "Full mask has dropped cell at " + loc(r, c)};
    return {};
  }

  double achieved = m.achieved_accel();
  if (std::abs(achieved - m.accel_nominal) > 0.15 * m.accel_nominal)
    return {false, "achieved acceleration " + std::to_string(achieved) +
                       " outside 15% of nominal " + std::to_string(m.accel_nominal)};

  bool oned = m.pattern == MaskPattern::Uniform1D || m.pattern == MaskPattern::Gaussian1D;
  if (oned) {
    for (int c = 0; c < m.width; ++c)
      for (int r = 1; r < m.height; ++r)
        if (m.at(r, c) != m.at(0, c))
          return {false, "1D mask varies along readout axis at " + loc(r, c)};
    int acs_cols = static_cast<int>(std::ceil(m.acs_fraction * m.width));
    int c0 = (m.width - acs_cols) / 2;
    for (int c = c0; c < c0 + acs_cols; ++c)
      if (!m.at(0, c)) return {false, "ACS block not kept at column " + std::to_string(c)};
  } else {
    int side = static_cast<int>(std::ceil(std::sqrt(m.acs_fraction) * std::min(m.height, m.width)));
    int r0 = (m.height - side) / 2, c0 = (m.width - side) / 2;
    for (int r = r0; r < r0 + side; ++r)
      for (int c = c0; c < c0 + side; ++c)
        if (!m.at(r, c)) return {false, "ACS block not kept at " + loc(r, c)};
  }
  return {};
}

ValidationResult validate(const LatentField& f) {
  if (f.channels <= 0 || f.height <= 0 || f.width <= 0) return {false, "nonpositive dimensions"};
  if (f.data.size() != static_cast<size_t>(f.channels) * f.height * f.width)
    return {false, "data length does not equal channels*height*width"};
  for (size_t i = 0; i < f.data.size(); ++i)
    if (!finite(f.data[i])) return {false, "non-finite value at flat index " + std::to_string(i)};
  return {};
}

ValidationResult validate(const PhaseField& f) {
  if (f.height <= 0 || f.width <= 0) return {false, "nonpositive dimensions"};
  if (f.data.size() != static_cast<size_t>(f.height) * f.width)
    return {false, "data length does not equal height*width"};
  for (int r = 0; r < f.height; ++r)
    for (int c = 0; c < f.width; ++c) {
      double v = f.at(r, c);
      if (!finite(v)) return {false, "non-finite phase at " + loc(r, c)};
      if (v < -kPi || v >= kPi) return {false, "phase outside [-pi,pi) at " + loc(r, c)};
    }
  return {};
}

ValidationResult validate(const CoilSet& cs) {
  if (cs.images.empty()) return {false, "empty coil set"};
  int h = cs.images[0].height, w = cs.images[0].width;
  for (size_t i = 0; i < cs.images.size(); ++i) {
    if (cs.images[i].height != h || cs.images[i].width != w)
      return {false, "coil " + std::to_string(i) + " image shape differs"};
    auto v = validate(cs.images[i]);
    if (!v.ok) return {false, "coil " + std::to_string(i) + " image: " + v.message};
  }
  if (!cs.sensitivities.empty()) {
    if (cs.sensitivities.size() != cs.images.size())
      return {false, "sensitivity count differs from coil count"};
    for (size_t i = 0; i < cs.sensitivities.size(); ++i)
      if (cs.sensitivities[i].height != h || cs.sensitivities[i].width != w)
        return {false, "coil " + std::to_string(i) + " sensitivity shape differs"};
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        double ssq = 0.0;
        for (const auto& s : cs.sensitivities) ssq += std::norm(s.at(r, c));
        if (std::abs(ssq - 1.0) > 1e-6)
          return {false, "sensitivity SSQ " + std::to_string(ssq) + " != 1 at " + loc(r, c)};
      }
  }
  return {};
}

double wrap_angle(double theta) {
  double t = std::fmod(theta + kPi, 2.0 * kPi);
  if (t < 0) t += 2.0 * kPi;
  return t - kPi;
}

}  // namespace mrpd
