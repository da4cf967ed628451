#include "mrpd/quality.hpp"

#include <algorithm>
#include <cmath>

#include "mrpd/parallel.hpp"

namespace mrpd {

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;
constexpr double kPsnrCap = 99.99;

void check_shapes(const RealField& a, const RealField& b) {
  if (a.height != b.height || a.width != b.width)
    throw std::invalid_argument("quality: shape mismatch");
}

std::vector<double> gaussian_window() {
  std::vector<double> w(static_cast<size_t>(kWin) * kWin);
  double sum = 0.0;
  int half = kWin / 2;
  for (int r = 0; r < kWin; ++r)
    for (int c = 0; c < kWin; ++c) {
      double d2 = (r - half) * (r - half) + (c - half) * (c - half);
      double v = std::exp(-d2 / (2.0 * kSigma * kSigma));
      w[static_cast<size_t>(r) * kWin + c] = v;
      sum += v;
    }
  for (auto& v : w) v /= sum;
  return w;
}

double local_ssim(const RealField& test, const RealField& ref, const std::vector<double>& win,
                  int r0, int c0, double c1, double c2) {
  double mx = 0, my = 0;
  for (int r = 0; r < kWin; ++r)
    for (int c = 0; c < kWin; ++c) {
      double w = win[static_cast<size_t>(r) * kWin + c];
      mx += w * test.at(r0 + r, c0 + c);
      my += w * ref.at(r0 + r, c0 + c);
    }
  double vx = 0, vy = 0, cov = 0;
  for (int r = 0; r < kWin; ++r)
    for (int c = 0; c < kWin; ++c) {
      double w = win[static_cast<size_t>(r) * kWin + c];
      double dx = test.at(r0 + r, c0 + c) - mx;
      double dy = ref.at(r0 + r, c0 + c) - my;
      vx += w * dx * dx;
      vy += w * dy * dy;
      cov += w * dx * dy;
    }
  return ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

RealField ssim_map_impl(const RealField& test, const RealField& ref, bool parallel) {
  check_shapes(test, ref);
  if (std::min(test.height, test.width) < kWin)
    throw std::invalid_argument("ssim: image smaller than 11x11 window");
  double lo = *std::min_element(ref.data.begin(), ref.data.end());
  double hi = *std::max_element(ref.data.begin(), ref.data.end());
  double range = hi - lo;
  if (range == 0.0) throw std::invalid_argument("ssim: reference has zero dynamic range");
  double c1 = (kK1 * range) * (kK1 * range);
  double c2 = (kK2 * range) * (kK2 * range);

  static const std::vector<double> win = gaussian_window();
  int oh = test.height - kWin + 1, ow = test.width - kWin + 1;
  RealField map(oh, ow);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (int r = 0; r < oh; ++r)
    for (int c = 0; c < ow; ++c) map.at(r, c) = local_ssim(test, ref, win, r, c, c1, c2);
  (void)parallel;
  return map;
}

}  // namespace

double psnr(const RealField& test, const RealField& ref) {
  check_shapes(test, ref);
  double peak = *std::max_element(ref.data.begin(), ref.data.end());
  double mse = deterministic_sum(ref.data.size(), [&](size_t i) {
                 double d = test.data[i] - ref.data[i];
                 return d * d;
               }) /
               static_cast<double>(ref.data.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

RealField ssim_map(const RealField& test, const RealField& ref) {
  return ssim_map_impl(test, ref, true);
}

RealField ssim_map_serial(const RealField& test, const RealField& ref) {
  return ssim_map_impl(test, ref, false);
}

double ssim(const RealField& test, const RealField& ref) {
  RealField map = ssim_map(test, ref);
  double sum = deterministic_sum(map.data.size(), [&](size_t i) { return map.data[i]; });
  return sum / static_cast<double>(map.data.size());
}

}  // namespace mrpd
