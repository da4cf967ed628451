#include "mrpd/kspace.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

#include "mrpd/rng.hpp"

namespace mrpd {

namespace {

// FFTW planning is not thread-safe; plans are cached per (h, w, sign) and
// executed via the new-array interface, which is safe concurrently.
struct PlanCache {
  std::mutex mu;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  fftw_plan get(int h, int w, int sign) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(h, w, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::vector<cplx> tmp(static_cast<size_t>(h) * w);
    fftw_plan p = fftw_plan_dft_2d(h, w, reinterpret_cast<fftw_complex*>(tmp.data()),
                                   reinterpret_cast<fftw_complex*>(tmp.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// Moves the array center to index 0 (inverse shift) or back (forward shift).
ComplexField shifted(const ComplexField& f, bool inverse) {
  ComplexField out(f.height, f.width, f.domain);
  int sr = inverse ? f.height / 2 : (f.height + 1) / 2;
  int sc = inverse ? f.width / 2 : (f.width + 1) / 2;
  for (int r = 0; r < f.height; ++r) {
    int rr = (r + sr) % f.height;
    for (int c = 0; c < f.width; ++c) out.at(r, c) = f.at(rr, (c + sc) % f.width);
  }
  return out;
}

ComplexField transform(const ComplexField& in, int sign, Domain out_domain) {
  ComplexField buf = shifted(in, true);
  fftw_plan p = plan_cache().get(in.height, in.width, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(buf.data.data()),
                   reinterpret_cast<fftw_complex*>(buf.data.data()));
  double scale = 1.0 / std::sqrt(static_cast<double>(in.height) * in.width);
  for (auto& v : buf.data) v *= scale;
  ComplexField out = shifted(buf, false);
  out.domain = out_domain;
  return out;
}

}  // namespace

ValidationResult validate(const Measurement& m) {
  if (m.noise_sigma < 0.0) return {false, "negative noise_sigma"};
  auto v = validate(m.kdata);
  if (!v.ok) return {false, "kdata: " + v.message};
  auto vm = validate(m.mask);
  if (!vm.ok) return {false, "mask: " + vm.message};
  if (m.kdata.height != m.mask.height || m.kdata.width != m.mask.width)
    return {false, "kdata/mask shape mismatch"};
  for (int r = 0; r < m.kdata.height; ++r)
    for (int c = 0; c < m.kdata.width; ++c)
      if (!m.mask.at(r, c) && m.kdata.at(r, c) != cplx(0.0, 0.0))
        return {false, "nonzero kdata outside mask at (" + std::to_string(r) + "," +
                           std::to_string(c) + ")"};
  return {};
}

ComplexField fft2c(const ComplexField& img) { return transform(img, FFTW_FORWARD, Domain::KSpace); }

ComplexField ifft2c(const ComplexField& k) { return transform(k, FFTW_BACKWARD, Domain::Image); }

Measurement measure(const ComplexField& x, const SamplingMask& mask, double noise_sigma,
                    uint64_t seed) {
  if (x.height != mask.height || x.width != mask.width)
    throw std::invalid_argument("measure: image/mask shape mismatch");
  Measurement m;
  m.mask = mask;
  m.noise_sigma = noise_sigma;
  m.kdata = fft2c(x);
  Rng rng(seed);
  for (int r = 0; r < x.height; ++r)
    for (int c = 0; c < x.width; ++c) {
      if (noise_sigma > 0.0)
        m.kdata.at(r, c) += cplx(noise_sigma * rng.normal(), noise_sigma * rng.normal());
      if (!mask.at(r, c)) m.kdata.at(r, c) = cplx(0.0, 0.0);
    }
  return m;
}

std::pair<ComplexField, PhaseField> modulate_phase(const ComplexField& y, double lambda,
                                                   uint64_t seed) {
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("modulate_phase: lambda outside [0,1]");
  constexpr double kPi = 3.141592653589793238462643383279502884;
  PhaseField theta_hat(y.height, y.width);
  Rng rng(seed);
  ComplexField modulated(y.height, y.width, Domain::Image);
  for (int r = 0; r < y.height; ++r)
    for (int c = 0; c < y.width; ++c) {
      cplx v = y.at(r, c);
      double theta_y = (v == cplx(0.0, 0.0)) ? 0.0 : std::arg(v);
      double theta_r = rng.uniform(-kPi, kPi);
      double th = wrap_angle(lambda * theta_r + (1.0 - lambda) * theta_y);
      theta_hat.at(r, c) = th;
      modulated.at(r, c) = std::abs(v) * cplx(std::cos(th), std::sin(th));
    }
  return {fft2c(modulated), std::move(theta_hat)};
}

RealField magnitude(const ComplexField& f) {
  RealField out(f.height, f.width, true);
  for (size_t i = 0; i < f.data.size(); ++i) out.data[i] = std::abs(f.data[i]);
  return out;
}

PhaseField phase_of(const ComplexField& f) {
  PhaseField out(f.height, f.width);
  for (size_t i = 0; i < f.data.size(); ++i) {
    cplx v = f.data[i];
    out.data[i] = (v == cplx(0.0, 0.0)) ? 0.0 : wrap_angle(std::arg(v));
  }
  return out;
}

ComplexField compose_polar(const RealField& mag, const PhaseField& phase) {
  if (mag.height != phase.height || mag.width != phase.width)
    throw std::invalid_argument("compose_polar: shape mismatch");
  ComplexField out(mag.height, mag.width, Domain::Image);
  for (size_t i = 0; i < mag.data.size(); ++i)
    out.data[i] = mag.data[i] * cplx(std::cos(phase.data[i]), std::sin(phase.data[i]));
  return out;
}

}  // namespace mrpd
