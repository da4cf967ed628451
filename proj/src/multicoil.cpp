#include "mrpd/multicoil.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mrpd/rng.hpp"

namespace mrpd {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

CoilSet simulate_sensitivities(int h, int w, int c, uint64_t seed) {
  if (h < 1 || w < 1 || c < 1)
    throw std::invalid_argument("simulate_sensitivities: bad dimensions");
  Rng rng(derive_seed(seed, 0x636f696cu));

  double ring_r = 0.55 * (1.0 + 0.1 * rng.uniform(-1.0, 1.0));
  double phase0 = rng.uniform(0.0, 2.0 * kPi);
  double sigma = 0.9;  // bump width in [-1,1] coordinates

  CoilSet out;
  out.sensitivities.reserve(static_cast<size_t>(c));
  std::vector<double> cx(c), cy(c), ramp_x(c), ramp_y(c), ramp_0(c);
  for (int i = 0; i < c; ++i) {
    double ang = phase0 + 2.0 * kPi * i / c;
    cx[i] = ring_r * std::cos(ang);
    cy[i] = ring_r * std::sin(ang);
    ramp_x[i] = rng.uniform(-kPi, kPi);
    ramp_y[i] = rng.uniform(-kPi, kPi);
    ramp_0[i] = rng.uniform(-kPi, kPi);
  }

  for (int i = 0; i < c; ++i) out.sensitivities.emplace_back(h, w, Domain::Image);
  for (int r = 0; r < h; ++r) {
    double y = -1.0 + 2.0 * (r + 0.5) / h;
    for (int col = 0; col < w; ++col) {
      double x = -1.0 + 2.0 * (col + 0.5) / w;
      double ssq = 0.0;
      for (int i = 0; i < c; ++i) {
        double dx = x - cx[i], dy = y - cy[i];
        double mag = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        double ph = ramp_0[i] + ramp_x[i] * x + ramp_y[i] * y;
        out.sensitivities[static_cast<size_t>(i)].at(r, col) = std::polar(mag, ph);
        ssq += mag * mag;
      }
      double inv = 1.0 / std::sqrt(ssq);
      for (int i = 0; i < c; ++i) out.sensitivities[static_cast<size_t>(i)].at(r, col) *= inv;
    }
  }
  return out;
}

std::vector<Measurement> measure_multicoil(const ComplexField& x, const CoilSet& sens,
                                           const SamplingMask& mask, double noise_sigma,
                                           uint64_t seed) {
  if (sens.sensitivities.empty())
    throw std::invalid_argument("measure_multicoil: no sensitivity maps");
  std::vector<Measurement> out;
  out.reserve(sens.sensitivities.size());
  for (size_t i = 0; i < sens.sensitivities.size(); ++i) {
    const ComplexField& s = sens.sensitivities[i];
    if (s.height != x.height || s.width != x.width)
      throw std::invalid_argument("measure_multicoil: sensitivity shape mismatch");
    ComplexField coil_img(x.height, x.width, Domain::Image);
    for (size_t p = 0; p < x.data.size(); ++p) coil_img.data[p] = s.data[p] * x.data[p];
    out.push_back(measure(coil_img, mask, noise_sigma, derive_seed(seed, i)));
  }
  return out;
}

RealField ssos_combine(const std::vector<RealField>& mags) {
  if (mags.empty()) throw std::invalid_argument("ssos_combine: empty coil set");
  RealField out(mags.front().height, mags.front().width, /*magnitude=*/true);
  for (const RealField& m : mags) {
    if (m.height != out.height || m.width != out.width)
      throw std::invalid_argument("ssos_combine: shape mismatch");
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += m.data[i] * m.data[i];
  }
  for (double& v : out.data) v = std::sqrt(v);
  return out;
}

RealField reconstruct_ssos(const std::vector<Measurement>& meas, const DenoisingPrior& prior,
                           const Codec& codec, const NoiseSchedule& schedule,
                           const SamplerConfig& cfg) {
  if (meas.empty()) throw std::invalid_argument("reconstruct_ssos: empty measurement list");
  const int n = static_cast<int>(meas.size());
  std::vector<RealField> images(static_cast<size_t>(n));
  std::vector<std::string> errors(static_cast<size_t>(n));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      SamplerConfig coil_cfg = cfg;
      coil_cfg.phase_seed = cfg.phase_seed + static_cast<uint64_t>(i);
      images[static_cast<size_t>(i)] =
          reconstruct(meas[static_cast<size_t>(i)], prior, codec, schedule, coil_cfg).image;
    } catch (const std::exception& e) {
      errors[static_cast<size_t>(i)] = e.what();
    }
  }
  for (int i = 0; i < n; ++i)
    if (!errors[static_cast<size_t>(i)].empty())
      throw NumericError("coil " + std::to_string(i) + ": " + errors[static_cast<size_t>(i)]);

  return ssos_combine(images);
}

}  // namespace mrpd
