#include "mrpd/masks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrpd/rng.hpp"

namespace mrpd {

namespace {

constexpr double kTol = 0.15;  // acceleration-rate tolerance

int acs_columns(double acs_fraction, int w) {
  return std::min(w, static_cast<int>(std::ceil(acs_fraction * w)));
}

void fill_columns(SamplingMask& m, const std::vector<int>& cols) {
  for (int c : cols)
    for (int r = 0; r < m.height; ++r) m.at(r, c) = 1;
}

void check_rate(const SamplingMask& m, double r) {
  double achieved = m.achieved_accel();
  if (std::abs(achieved - r) > kTol * r)
    throw NumericError("mask generation infeasible: achieved R " + std::to_string(achieved) +
                       " vs nominal " + std::to_string(r));
}

std::vector<int> non_acs_columns(int w, int n_acs) {
  int c0 = (w - n_acs) / 2;
  std::vector<int> cols;
  cols.reserve(w - n_acs);
  for (int c = 0; c < w; ++c)
    if (c < c0 || c >= c0 + n_acs) cols.push_back(c);
  return cols;
}

void validate_args(int h, int w, double r, double acs_fraction) {
  if (h <= 0 || w <= 0) throw std::invalid_argument("mask: nonpositive dims");
  if (r < 1.0) throw std::invalid_argument("mask: R below 1");
  if (acs_fraction < 0.0 || acs_fraction >= 1.0)
    throw std::invalid_argument("mask: acs_fraction outside [0,1)");
}

struct AcsSquare {
  int r0, c0, side;
  bool contains(int r, int c) const {
    return r >= r0 && r < r0 + side && c >= c0 && c < c0 + side;
  }
};

AcsSquare acs_square(int h, int w, double acs_fraction) {
  int side = static_cast<int>(std::ceil(std::sqrt(acs_fraction) * std::min(h, w)));
  return {(h - side) / 2, (w - side) / 2, side};
}

}  // namespace

double vd_radius(double r0, double d, double d_max) { return r0 * (1.0 + d / d_max); }

SamplingMask uniform1d(int h, int w, double r, double acs_fraction, uint64_t seed) {
  validate_args(h, w, r, acs_fraction);
  SamplingMask m(h, w, MaskPattern::Uniform1D);
  m.accel_nominal = r;
  m.acs_fraction = acs_fraction;
  if (r == 1.0) {
    m.keep.assign(m.keep.size(), 1);
    return m;
  }

  int n_acs = acs_columns(acs_fraction, w);
  int target = std::max(1, static_cast<int>(std::lround(w / r)));
  std::vector<int> cols;
  int c0 = (w - n_acs) / 2;
  for (int c = c0; c < c0 + n_acs; ++c) cols.push_back(c);

  int extra = target - n_acs;
  if (extra > 0) {
    std::vector<int> pool = non_acs_columns(w, n_acs);
    if (extra > static_cast<int>(pool.size())) extra = static_cast<int>(pool.size());
    double stride = static_cast<double>(pool.size()) / extra;
    double offset = static_cast<double>(seed % 997) / 997.0 * stride;
    for (int i = 0; i < extra; ++i) {
      int idx = static_cast<int>(offset + i * stride);
      idx = std::min(idx, static_cast<int>(pool.size()) - 1);
      cols.push_back(pool[idx]);
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  }
  fill_columns(m, cols);
  check_rate(m, r);
  return m;
}

SamplingMask gaussian1d(int h, int w, double r, double acs_fraction, uint64_t seed) {
  validate_args(h, w, r, acs_fraction);
  SamplingMask m(h, w, MaskPattern::Gaussian1D);
  m.accel_nominal = r;
  m.acs_fraction = acs_fraction;
  if (r == 1.0) {
    m.keep.assign(m.keep.size(), 1);
    return m;
  }

  int n_acs = acs_columns(acs_fraction, w);
  int target = std::max(1, static_cast<int>(std::lround(w / r)));
  std::vector<int> cols;
  int c0 = (w - n_acs) / 2;
  for (int c = c0; c < c0 + n_acs; ++c) cols.push_back(c);

  int extra = target - n_acs;
  if (extra > 0) {
    // Weighted sampling without replacement (Efraimidis-Spirakis keys).
    std::vector<int> pool = non_acs_columns(w, n_acs);
    double sigma = w / 6.0;
    double center = (w - 1) / 2.0;
    Rng rng(seed);
    std::vector<std::pair<double, int>> keyed;
    keyed.reserve(pool.size());
    for (int c : pool) {
      double d = c - center;
      double weight = std::exp(-d * d / (2.0 * sigma * sigma));
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      keyed.emplace_back(std::pow(u, 1.0 / weight), c);
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (int i = 0; i < extra && i < static_cast<int>(keyed.size()); ++i)
      cols.push_back(keyed[i].second);
  }
  fill_columns(m, cols);
  check_rate(m, r);
  return m;
}

SamplingMask gaussian2d(int h, int w, double r, double acs_fraction, uint64_t seed) {
  validate_args(h, w, r, acs_fraction);
  SamplingMask m(h, w, MaskPattern::Gaussian2D);
  m.accel_nominal = r;
  m.acs_fraction = acs_fraction;
  if (r == 1.0) {
    m.keep.assign(m.keep.size(), 1);
    return m;
  }

  AcsSquare acs = acs_square(h, w, acs_fraction);
  for (int rr = acs.r0; rr < acs.r0 + acs.side; ++rr)
    for (int cc = acs.c0; cc < acs.c0 + acs.side; ++cc) m.at(rr, cc) = 1;

  long total = static_cast<long>(h) * w;
  long target = std::lround(total / r);
  long extra = target - static_cast<long>(acs.side) * acs.side;
  if (extra <= 0) {
    check_rate(m, r);
    return m;
  }

  double rc = (h - 1) / 2.0, cc0 = (w - 1) / 2.0;
  auto expected = [&](double sigma) {
    double e = 0.0;
    for (int rr = 0; rr < h; ++rr)
      for (int cc = 0; cc < w; ++cc) {
        if (acs.contains(rr, cc)) continue;
        double d2 = (rr - rc) * (rr - rc) + (cc - cc0) * (cc - cc0);
        e += std::exp(-d2 / (2.0 * sigma * sigma));
      }
    return e;
  };

  double lo = 1e-3, hi = 8.0 * std::max(h, w);
  if (expected(hi) < extra)
    throw NumericError("gaussian2d: target density unreachable");
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (expected(mid) < extra) lo = mid; else hi = mid;
  }
  double sigma = 0.5 * (lo + hi);

  // A couple of derived substreams absorb unlucky Bernoulli draws.
  for (int attempt = 0; attempt < 4; ++attempt) {
    SamplingMask trial = m;
    Rng rng(derive_seed(seed, attempt));
    for (int rr = 0; rr < h; ++rr)
      for (int cc = 0; cc < w; ++cc) {
        if (acs.contains(rr, cc)) continue;
        double d2 = (rr - rc) * (rr - rc) + (cc - cc0) * (cc - cc0);
        if (rng.uniform() < std::exp(-d2 / (2.0 * sigma * sigma))) trial.at(rr, cc) = 1;
      }
    if (std::abs(trial.achieved_accel() - r) <= kTol * r) return trial;
  }
  throw NumericError("gaussian2d: calibration failed to hit rate tolerance");
}

SamplingMask vd_poisson_disk(int h, int w, double r, double acs_fraction, uint64_t seed) {
  validate_args(h, w, r, acs_fraction);
  SamplingMask m(h, w, MaskPattern::VDPoissonDisk);
  m.accel_nominal = r;
  m.acs_fraction = acs_fraction;
  if (r == 1.0) {
    m.keep.assign(m.keep.size(), 1);
    return m;
  }

  AcsSquare acs = acs_square(h, w, acs_fraction);
  for (int rr = acs.r0; rr < acs.r0 + acs.side; ++rr)
    for (int cc = acs.c0; cc < acs.c0 + acs.side; ++cc) m.at(rr, cc) = 1;

  long total = static_cast<long>(h) * w;
  long target_extra = std::lround(total / r) - static_cast<long>(acs.side) * acs.side;
  if (target_extra <= 0) {
    check_rate(m, r);
    return m;
  }

  double rc = (h - 1) / 2.0, cc0 = (w - 1) / 2.0;
  double d_max = std::sqrt(rc * rc + cc0 * cc0);

  std::vector<std::pair<int, int>> candidates;
  candidates.reserve(total);
  for (int rr = 0; rr < h; ++rr)
    for (int cc = 0; cc < w; ++cc)
      if (!acs.contains(rr, cc)) candidates.emplace_back(rr, cc);
  Rng rng(seed);
  for (size_t i = candidates.size(); i > 1; --i)
    std::swap(candidates[i - 1], candidates[rng.below(i)]);

  auto throw_darts = [&](double r0, std::vector<std::pair<int, int>>* out) -> long {
    double bin = std::max(1.0, 2.0 * r0);
    int nbr = static_cast<int>(std::ceil(static_cast<double>(h) / bin));
    int nbc = static_cast<int>(std::ceil(static_cast<double>(w) / bin));
    std::vector<std::vector<std::pair<int, int>>> grid(static_cast<size_t>(nbr) * nbc);
    long accepted = 0;
    for (const auto& [pr, pc] : candidates) {
      double dc = std::sqrt((pr - rc) * (pr - rc) + (pc - cc0) * (pc - cc0));
      double rad_c = vd_radius(r0, dc, d_max);
      int br = static_cast<int>(pr / bin), bc = static_cast<int>(pc / bin);
      bool ok = true;
      int reach = static_cast<int>(std::ceil(rad_c / bin));
      for (int gr = std::max(0, br - reach); ok && gr <= std::min(nbr - 1, br + reach); ++gr)
        for (int gc = std::max(0, bc - reach); ok && gc <= std::min(nbc - 1, bc + reach); ++gc)
          for (const auto& [ar, ac] : grid[static_cast<size_t>(gr) * nbc + gc]) {
            double dist = std::hypot(pr - ar, pc - ac);
            double da = std::sqrt((ar - rc) * (ar - rc) + (ac - cc0) * (ac - cc0));
            if (dist < std::min(rad_c, vd_radius(r0, da, d_max))) {
              ok = false;
              break;
            }
          }
      if (ok) {
        grid[static_cast<size_t>(br) * nbc + bc].emplace_back(pr, pc);
        ++accepted;
        if (out) out->emplace_back(pr, pc);
      }
    }
    return accepted;
  };

  // Larger r0 -> fewer accepted darts; bisect to the target count.
  double lo = 0.25, hi = std::max(h, w) * 1.0;
  for (int it = 0; it < 40; ++it) {
    double mid = 0.5 * (lo + hi);
    if (throw_darts(mid, nullptr) > target_extra) lo = mid; else hi = mid;
  }
  std::vector<std::pair<int, int>> points;
  throw_darts(0.5 * (lo + hi), &points);
  for (const auto& [pr, pc] : points) m.at(pr, pc) = 1;
  double achieved = m.achieved_accel();
  if (std::abs(achieved - r) > kTol * r)
    throw NumericError("vd_poisson_disk: calibration failed, achieved R = " +
                       std::to_string(achieved));
  return m;
}

SamplingMask generate_mask(MaskPattern pattern, int h, int w, double r, double acs_fraction,
                           uint64_t seed) {
  switch (pattern) {
    case MaskPattern::Uniform1D: return uniform1d(h, w, r, acs_fraction, seed);
    case MaskPattern::Gaussian1D: return gaussian1d(h, w, r, acs_fraction, seed);
    case MaskPattern::Gaussian2D: return gaussian2d(h, w, r, acs_fraction, seed);
    case MaskPattern::VDPoissonDisk: return vd_poisson_disk(h, w, r, acs_fraction, seed);
    case MaskPattern::Full: return full_mask(h, w);
  }
  throw std::invalid_argument("generate_mask: bad pattern");
}

}  // namespace mrpd
