#include "mrpd/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mrpd/rng.hpp"

namespace mrpd {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Ellipse {
  double value;  // additive intensity
  double a, b;   // semi-axes (x, y) in [-1, 1] coordinates
  double x0, y0; // center
  double phi;    // rotation, radians (counter-clockwise)
};

// Modified Shepp-Logan table (Toft contrast values).
const Ellipse kSheppLogan[10] = {
    {1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
    {-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
    {-0.20, 0.1100, 0.3100, 0.22, 0.0000, -18.0 * kPi / 180.0},
    {-0.20, 0.1600, 0.4100, -0.22, 0.0000, 18.0 * kPi / 180.0},
    {0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
    {0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
    {0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
    {0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
    {0.10, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
    {0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
};

void check_dims(int h, int w) {
  if (h < 32 || w < 32) throw std::invalid_argument("phantom: dimensions must be >= 32");
}

RealField render(int h, int w, const Ellipse (&ell)[10]) {
  RealField img(h, w, /*magnitude=*/true);
  for (int r = 0; r < h; ++r) {
    // Image row 0 maps to y = +1 so the phantom is upright.
    double y = 1.0 - 2.0 * (r + 0.5) / h;
    for (int c = 0; c < w; ++c) {
      double x = -1.0 + 2.0 * (c + 0.5) / w;
      double v = 0.0;
      for (const Ellipse& e : ell) {
        double cs = std::cos(e.phi), sn = std::sin(e.phi);
        double dx = x - e.x0, dy = y - e.y0;
        double u = (cs * dx + sn * dy) / e.a;
        double t = (-sn * dx + cs * dy) / e.b;
        if (u * u + t * t <= 1.0) v += e.value;
      }
      img.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace

RealField shepp_logan_reference(int h, int w) {
  check_dims(h, w);
  return render(h, w, kSheppLogan);
}

RealField shepp_logan(int h, int w, uint64_t variant_seed) {
  check_dims(h, w);
  Rng rng(derive_seed(variant_seed, 0x70686d74u));
  Ellipse jittered[10];
  for (int i = 0; i < 10; ++i) {
    const Ellipse& e = kSheppLogan[i];
    Ellipse j = e;
    j.value = e.value * (1.0 + 0.05 * rng.uniform(-1.0, 1.0));
    j.a = e.a * (1.0 + 0.05 * rng.uniform(-1.0, 1.0));
    j.b = e.b * (1.0 + 0.05 * rng.uniform(-1.0, 1.0));
    // Centers move by up to 5% of the matching semi-axis so small features
    // stay near their anatomical position.
    j.x0 = e.x0 + 0.05 * e.a * rng.uniform(-1.0, 1.0);
    j.y0 = e.y0 + 0.05 * e.b * rng.uniform(-1.0, 1.0);
    j.phi = e.phi + 0.05 * (kPi / 4.0) * rng.uniform(-1.0, 1.0);
    jittered[i] = j;
  }
  return render(h, w, jittered);
}

RealField synth_phase_poly(int h, int w, double smoothness, uint64_t seed) {
  check_dims(h, w);
  if (smoothness < 0.0) throw std::invalid_argument("synth_phase: smoothness must be >= 0");
  Rng rng(derive_seed(seed, 0x70686173u));
  double c0 = rng.uniform(-1.0, 1.0), cx = rng.uniform(-1.0, 1.0), cy = rng.uniform(-1.0, 1.0);
  double cxy = rng.uniform(-1.0, 1.0), cxx = rng.uniform(-1.0, 1.0), cyy = rng.uniform(-1.0, 1.0);
  RealField p(h, w, /*magnitude=*/false);
  for (int r = 0; r < h; ++r) {
    double y = -1.0 + 2.0 * (r + 0.5) / h;
    for (int c = 0; c < w; ++c) {
      double x = -1.0 + 2.0 * (c + 0.5) / w;
      p.at(r, c) = smoothness * (c0 + cx * x + cy * y + cxy * x * y + cxx * x * x + cyy * y * y);
    }
  }
  return p;
}

PhaseField synth_phase(int h, int w, double smoothness, uint64_t seed) {
  RealField raw = synth_phase_poly(h, w, smoothness, seed);
  PhaseField phi(h, w);
  for (size_t i = 0; i < raw.data.size(); ++i) phi.data[i] = wrap_angle(raw.data[i]);
  return phi;
}

ComplexField phantom_complex(int h, int w, uint64_t variant_seed, double phase_smoothness,
                             uint64_t phase_seed) {
  RealField mag = shepp_logan(h, w, variant_seed);
  PhaseField phi = synth_phase(h, w, phase_smoothness, phase_seed);
  ComplexField x(h, w, Domain::Image);
  for (size_t i = 0; i < mag.data.size(); ++i)
    x.data[i] = std::polar(mag.data[i], phi.data[i]);
  return x;
}

GaussianMixturePrior build_prior_from_phantoms(int h, int w, const Codec& codec,
                                               const std::vector<uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("build_prior_from_phantoms: empty seed set");
  std::vector<LatentField> means;
  means.reserve(seeds.size());
  for (uint64_t s : seeds) {
    RealField mag = shepp_logan(h, w, s);
    NormRange r = norm_range(mag);
    means.push_back(encode(codec, normalize(mag, r)));
  }
  size_t dim = means.front().data.size();
  double var = 0.0;
  if (means.size() > 1) {
    size_t npairs = 0;
    for (size_t i = 0; i < means.size(); ++i)
      for (size_t j = i + 1; j < means.size(); ++j) {
        double d2 = 0.0;
        for (size_t k = 0; k < dim; ++k) {
          double d = means[i].data[k] - means[j].data[k];
          d2 += d * d;
        }
        var += d2 / static_cast<double>(dim);
        ++npairs;
      }
    var /= static_cast<double>(npairs);
  }
  if (var <= 0.0) var = 1e-2;  // single component or coincident means
  std::vector<double> weights(means.size(), 1.0 / static_cast<double>(means.size()));
  return GaussianMixturePrior(weights, means, var);
}

double NormRange::to_unit(double v) const {
  if (hi <= lo) return 0.0;
  return 2.0 * (v - lo) / (hi - lo) - 1.0;
}

double NormRange::from_unit(double v) const { return lo + (v + 1.0) * 0.5 * (hi - lo); }

NormRange norm_range(const RealField& mag) {
  NormRange r;
  r.lo = *std::min_element(mag.data.begin(), mag.data.end());
  r.hi = *std::max_element(mag.data.begin(), mag.data.end());
  return r;
}

RealField normalize(const RealField& mag, const NormRange& r) {
  RealField out(mag.height, mag.width, /*magnitude=*/false);
  for (size_t i = 0; i < mag.data.size(); ++i) out.data[i] = r.to_unit(mag.data[i]);
  return out;
}

RealField denormalize(const RealField& unit, const NormRange& r, bool as_magnitude) {
  RealField out(unit.height, unit.width, as_magnitude);
  for (size_t i = 0; i < unit.data.size(); ++i) {
    double v = r.from_unit(unit.data[i]);
    out.data[i] = as_magnitude ? std::max(0.0, v) : v;
  }
  return out;
}

}  // namespace mrpd
