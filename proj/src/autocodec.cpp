#include "mrpd/autocodec.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "mrpd/rng.hpp"

namespace mrpd {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int pow_int(int base, int e) {
  int v = 1;
  for (int i = 0; i < e; ++i) v *= base;
  return v;
}

// One orthonormal 2D Haar level: (C,H,W) -> (4C,H/2,W/2).
LatentField haar_down(const LatentField& x) {
  LatentField out(x.channels * 4, x.height / 2, x.width / 2);
  for (int ch = 0; ch < x.channels; ++ch)
    for (int r = 0; r < out.height; ++r)
      for (int c = 0; c < out.width; ++c) {
        double p00 = x.at(ch, 2 * r, 2 * c), p01 = x.at(ch, 2 * r, 2 * c + 1);
        double p10 = x.at(ch, 2 * r + 1, 2 * c), p11 = x.at(ch, 2 * r + 1, 2 * c + 1);
        out.at(4 * ch + 0, r, c) = (p00 + p01 + p10 + p11) * 0.5;
        out.at(4 * ch + 1, r, c) = (p00 - p01 + p10 - p11) * 0.5;
        out.at(4 * ch + 2, r, c) = (p00 + p01 - p10 - p11) * 0.5;
        out.at(4 * ch + 3, r, c) = (p00 - p01 - p10 + p11) * 0.5;
      }
  return out;
}

LatentField haar_up(const LatentField& x) {
  LatentField out(x.channels / 4, x.height * 2, x.width * 2);
  for (int ch = 0; ch < out.channels; ++ch)
    for (int r = 0; r < x.height; ++r)
      for (int c = 0; c < x.width; ++c) {
        double ll = x.at(4 * ch + 0, r, c), lh = x.at(4 * ch + 1, r, c);
        double hl = x.at(4 * ch + 2, r, c), hh = x.at(4 * ch + 3, r, c);
        out.at(ch, 2 * r, 2 * c) = (ll + lh + hl + hh) * 0.5;
        out.at(ch, 2 * r, 2 * c + 1) = (ll - lh + hl - hh) * 0.5;
        out.at(ch, 2 * r + 1, 2 * c) = (ll + lh - hl - hh) * 0.5;
        out.at(ch, 2 * r + 1, 2 * c + 1) = (ll - lh - hl + hh) * 0.5;
      }
  return out;
}

MatrixXd as_matrix(const std::vector<double>& data, int rows, int cols) {
  MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = data[static_cast<size_t>(r) * cols + c];
  return m;
}

std::vector<double> as_vector(const MatrixXd& m) {
  std::vector<double> v(static_cast<size_t>(m.rows()) * m.cols());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) v[static_cast<size_t>(r) * m.cols() + c] = m(r, c);
  return v;
}

MatrixXd core_collapsed(const Codec& c) {
  MatrixXd core = MatrixXd::Identity(c.m, c.m);
  for (const auto& layer : c.core_layers) core = as_matrix(layer, c.m, c.m) * core;
  return core;
}

// Sum of per-channel blocks of in_map, scaled so encode(x) = A^T x
// on a single-channel patch vector x (replication uses a 1/sqrt(c) scale
// to keep encode a contraction).
MatrixXd in_sum(const Codec& c) {
  int p2 = c.patch * c.patch;
  MatrixXd in = as_matrix(c.in_map, p2 * c.c_in, c.m);
  MatrixXd a = MatrixXd::Zero(p2, c.m);
  for (int ch = 0; ch < c.c_in; ++ch) a += in.block(ch * p2, 0, p2, c.m);
  return a / std::sqrt(static_cast<double>(c.c_in));
}

// Per-pixel column sums of out_map so decode y = O^T u per patch.
MatrixXd out_sum(const Codec& c) {
  int p2 = c.patch * c.patch;
  MatrixXd out = as_matrix(c.out_map, c.m, p2 * c.c_in);
  MatrixXd o = MatrixXd::Zero(c.m, p2);
  for (int ch = 0; ch < c.c_in; ++ch) o += out.block(0, ch * p2, c.m, p2);
  return o / std::sqrt(static_cast<double>(c.c_in));
}

void check_patch_dims(const Codec& c, int h, int w) {
  if (h % c.patch != 0 || w % c.patch != 0)
    throw std::invalid_argument("encode: dims not divisible by patch size");
}

VectorXd extract_patch(const RealField& img, int pr, int pc, int p) {
  VectorXd v(p * p);
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c) v[r * p + c] = img.at(pr * p + r, pc * p + c);
  return v;
}

}  // namespace

int Codec::latent_channels() const {
  return variant == CodecVariant::Orthonormal ? pow_int(4, levels) : m;
}

int Codec::downsample_factor() const {
  return variant == CodecVariant::Orthonormal ? pow_int(2, levels) : patch;
}

size_t Codec::boundary_parameters() const { return in_map.size() + out_map.size(); }

size_t Codec::total_parameters() const {
  size_t total = boundary_parameters();
  for (const auto& layer : core_layers) total += layer.size();
  return total;
}

ValidationResult validate(const Codec& c) {
  if (c.variant == CodecVariant::Orthonormal) {
    if (c.levels < 0) return {false, "negative Haar levels"};
    return {};
  }
  int p2 = c.patch * c.patch;
  if (c.patch <= 0 || c.c_in <= 0 || c.m <= 0) return {false, "nonpositive PatchLinear dims"};
  if (c.in_map.size() != static_cast<size_t>(p2) * c.c_in * c.m)
    return {false, "in_map size mismatch"};
  if (c.out_map.size() != static_cast<size_t>(p2) * c.c_in * c.m)
    return {false, "out_map size mismatch"};
  for (const auto& layer : c.core_layers)
    if (layer.size() != static_cast<size_t>(c.m) * c.m) return {false, "core layer size mismatch"};
  // decode(encode(.)) acts patchwise; bound its spectral norm.
  MatrixXd roundtrip = out_sum(c).transpose() * core_collapsed(c) * in_sum(c).transpose();
  double norm = roundtrip.jacobiSvd().singularValues()(0);
  if (norm > 1.05)
    return {false, "decode*encode operator norm " + std::to_string(norm) + " exceeds 1.05"};
  return {};
}

Codec make_identity_codec() { return make_haar_codec(0); }

Codec make_haar_codec(int levels) {
  if (levels < 0) throw std::invalid_argument("make_haar_codec: negative levels");
  Codec c;
  c.variant = CodecVariant::Orthonormal;
  c.levels = levels;
  return c;
}

Codec make_patch_linear_codec(int patch, int m, int c_in, int core_depth, uint64_t seed) {
  int p2 = patch * patch;
  if (patch <= 0 || c_in <= 0 || m <= 0 || m > p2)
    throw std::invalid_argument("make_patch_linear_codec: need 0 < m <= patch^2");
  Codec c;
  c.variant = CodecVariant::PatchLinear;
  c.patch = patch;
  c.c_in = c_in;
  c.m = m;

  // Orthonormal basis in the channel-summed patch space, replicated across
  // channels with a 1/sqrt(c) scale so in_map keeps orthonormal columns and
  // decode(encode(.)) starts out as the orthogonal projection A A^T.
  Rng rng(seed);
  MatrixXd g(p2, m);
  for (int r = 0; r < p2; ++r)
    for (int col = 0; col < m; ++col) g(r, col) = rng.normal();
  MatrixXd a = Eigen::HouseholderQR<MatrixXd>(g).householderQ() * MatrixXd::Identity(p2, m);

  c.core_layers.reserve(core_depth);
  for (int layer = 0; layer < core_depth; ++layer) {
    MatrixXd gm(m, m);
    for (int r = 0; r < m; ++r)
      for (int col = 0; col < m; ++col) gm(r, col) = rng.normal();
    MatrixXd ql = Eigen::HouseholderQR<MatrixXd>(gm).householderQ();
    c.core_layers.push_back(as_vector(ql));
  }

  double inv_sqrt_c = 1.0 / std::sqrt(static_cast<double>(c_in));
  MatrixXd in(p2 * c_in, m);
  for (int ch = 0; ch < c_in; ++ch) in.block(ch * p2, 0, p2, m) = a * inv_sqrt_c;
  c.in_map = as_vector(in);

  MatrixXd core = core_collapsed(c);
  MatrixXd out_block = core * a.transpose() * inv_sqrt_c;  // m x p^2 per channel
  MatrixXd out(m, p2 * c_in);
  for (int ch = 0; ch < c_in; ++ch) out.block(0, ch * p2, m, p2) = out_block;
  c.out_map = as_vector(out);
  return c;
}

LatentField encode(const Codec& c, const RealField& img) {
  if (c.variant == CodecVariant::Orthonormal) {
    int f = c.downsample_factor();
    if (img.height % f != 0 || img.width % f != 0)
      throw std::invalid_argument("encode: dims not divisible by 2^levels");
    LatentField z(1, img.height, img.width);
    std::copy(img.data.begin(), img.data.end(), z.data.begin());
    for (int l = 0; l < c.levels; ++l) z = haar_down(z);
    return z;
  }

  check_patch_dims(c, img.height, img.width);
  int p = c.patch, ph = img.height / p, pw = img.width / p;
  MatrixXd a = in_sum(c);  // p^2 x m
  LatentField z(c.m, ph, pw);
  for (int pr = 0; pr < ph; ++pr)
    for (int pc = 0; pc < pw; ++pc) {
      VectorXd lat = a.transpose() * extract_patch(img, pr, pc, p);
      for (int k = 0; k < c.m; ++k) z.at(k, pr, pc) = lat[k];
    }
  return z;
}

RealField decode(const Codec& c, const LatentField& z, bool clamp) {
  RealField out;
  if (c.variant == CodecVariant::Orthonormal) {
    if (z.channels != c.latent_channels())
      throw std::invalid_argument("decode: latent channel count mismatch");
    LatentField cur = z;
    for (int l = 0; l < c.levels; ++l) cur = haar_up(cur);
    out = RealField(cur.height, cur.width);
    std::copy(cur.data.begin(), cur.data.end(), out.data.begin());
  } else {
    if (z.channels != c.m) throw std::invalid_argument("decode: latent channel count mismatch");
    int p = c.patch;
    MatrixXd o = out_sum(c);           // m x p^2
    MatrixXd core = core_collapsed(c);  // m x m
    out = RealField(z.height * p, z.width * p);
    for (int pr = 0; pr < z.height; ++pr)
      for (int pc = 0; pc < z.width; ++pc) {
        VectorXd lat(c.m);
        for (int k = 0; k < c.m; ++k) lat[k] = z.at(k, pr, pc);
        VectorXd y = o.transpose() * (core * lat);
        for (int r = 0; r < p; ++r)
          for (int col = 0; col < p; ++col) out.at(pr * p + r, pc * p + col) = y[r * p + col];
      }
  }
  if (clamp)
    for (auto& v : out.data) v = std::clamp(v, -1.0, 1.0);
  return out;
}

LatentField decode_adjoint(const Codec& c, const RealField& cotangent) {
  if (c.variant == CodecVariant::Orthonormal) {
    // Orthonormal transform: the adjoint of decode is encode.
    RealField tmp = cotangent;
    tmp.magnitude = false;
    return encode(c, tmp);
  }
  check_patch_dims(c, cotangent.height, cotangent.width);
  int p = c.patch, ph = cotangent.height / p, pw = cotangent.width / p;
  MatrixXd o = out_sum(c);
  MatrixXd core = core_collapsed(c);
  MatrixXd back = core.transpose() * o;  // m x p^2
  LatentField z(c.m, ph, pw);
  for (int pr = 0; pr < ph; ++pr)
    for (int pc = 0; pc < pw; ++pc) {
      VectorXd g = back * extract_patch(cotangent, pr, pc, p);
      for (int k = 0; k < c.m; ++k) z.at(k, pr, pc) = g[k];
    }
  return z;
}

double codec_reconstruction_error(const Codec& c, const std::vector<RealField>& images) {
  double total = 0.0;
  size_t n = 0;
  for (const auto& img : images) {
    RealField rec = decode(c, encode(c, img), false);
    for (size_t i = 0; i < img.data.size(); ++i) {
      double d = rec.data[i] - img.data[i];
      total += d * d;
    }
    n += img.data.size();
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

namespace {

// Solve (S + ridge I) x = rhs in the eigenbasis of symmetric S, keeping the
// current solution's component along (near-)null directions so an already
// optimal map is a fixed point.
VectorXd regularized_solve(const Eigen::SelfAdjointEigenSolver<MatrixXd>& es, double ridge,
                           const VectorXd& rhs, const VectorXd& current) {
  const VectorXd& lam = es.eigenvalues();
  double tol = std::max(1e-12 * lam.cwiseAbs().maxCoeff(), 1e-300);
  VectorXd rhs_t = es.eigenvectors().transpose() * rhs;
  VectorXd cur_t = es.eigenvectors().transpose() * current;
  VectorXd sol_t(rhs.size());
  for (int i = 0; i < rhs.size(); ++i) {
    double denom = lam[i] + ridge;
    sol_t[i] = denom > tol ? rhs_t[i] / denom : cur_t[i];
  }
  return es.eigenvectors() * sol_t;
}

}  // namespace

Codec adapt_boundary(const Codec& c, const std::vector<RealField>& images, double ridge) {
  if (c.variant != CodecVariant::PatchLinear)
    throw std::invalid_argument("adapt_boundary: PatchLinear codec required");
  if (images.empty()) throw std::invalid_argument("adapt_boundary: empty training set");
  if (ridge < 0.0) throw std::invalid_argument("adapt_boundary: negative ridge");

  int p = c.patch, p2 = p * p;
  size_t n_patches = 0;
  for (const auto& img : images) {
    check_patch_dims(c, img.height, img.width);
    n_patches += static_cast<size_t>(img.height / p) * (img.width / p);
  }
  MatrixXd X(p2, n_patches);
  size_t col = 0;
  for (const auto& img : images)
    for (int pr = 0; pr < img.height / p; ++pr)
      for (int pc = 0; pc < img.width / p; ++pc) X.col(col++) = extract_patch(img, pr, pc, p);
  if (X.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("adapt_boundary: degenerate all-zero training set");

  MatrixXd core = core_collapsed(c);
  MatrixXd sxx = X * X.transpose();
  double sqrt_c = std::sqrt(static_cast<double>(c.c_in));

  Codec cur = c;
  Codec best = c;
  double best_err = codec_reconstruction_error(c, images);

  for (int sweep = 0; sweep < 10; ++sweep) {
    // Out step: per output pixel j, ridge regression of x_j on u = C A^T x.
    {
      MatrixXd a = in_sum(cur);
      MatrixXd u = core * a.transpose() * X;  // m x N
      MatrixXd o = out_sum(cur);              // m x p^2
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(MatrixXd(u * u.transpose()));
      MatrixXd o_new(c.m, p2);
      for (int j = 0; j < p2; ++j)
        o_new.col(j) = regularized_solve(es, ridge, u * X.row(j).transpose(), o.col(j));
      // Sum-space delta sqrt(c)*(o_new - o) spread evenly over channels.
      MatrixXd delta = (o_new - o) / sqrt_c;
      MatrixXd out = as_matrix(cur.out_map, c.m, p2 * c.c_in);
      for (int ch = 0; ch < c.c_in; ++ch) out.block(0, ch * p2, c.m, p2) += delta;
      cur.out_map = as_vector(out);
    }
    // In step: normal equations G^T G M Sxx + ridge M = G^T Sxx, G = O^T C.
    {
      MatrixXd o = out_sum(cur);
      MatrixXd g = o.transpose() * core;  // p^2 x m
      MatrixXd a = in_sum(cur);
      MatrixXd m_cur = a.transpose();  // m x p^2
      Eigen::SelfAdjointEigenSolver<MatrixXd> es1(MatrixXd(g.transpose() * g));
      Eigen::SelfAdjointEigenSolver<MatrixXd> es2(sxx);
      const VectorXd& lam1 = es1.eigenvalues();
      const VectorXd& lam2 = es2.eigenvalues();
      double tol = std::max(1e-12 * std::abs(lam1.cwiseAbs().maxCoeff() * lam2.cwiseAbs().maxCoeff()),
                            1e-300);
      MatrixXd rhs_t = es1.eigenvectors().transpose() * (g.transpose() * sxx) * es2.eigenvectors();
      MatrixXd cur_t = es1.eigenvectors().transpose() * m_cur * es2.eigenvectors();
      MatrixXd sol_t(c.m, p2);
      for (int i = 0; i < c.m; ++i)
        for (int j = 0; j < p2; ++j) {
          double denom = lam1[i] * lam2[j] + ridge;
          sol_t(i, j) = denom > tol ? rhs_t(i, j) / denom : cur_t(i, j);
        }
      MatrixXd m_new = es1.eigenvectors() * sol_t * es2.eigenvectors().transpose();
      MatrixXd delta = (m_new.transpose() - a) / sqrt_c;
      MatrixXd in = as_matrix(cur.in_map, p2 * c.c_in, c.m);
      for (int ch = 0; ch < c.c_in; ++ch) in.block(ch * p2, 0, p2, c.m) += delta;
      cur.in_map = as_vector(in);
    }

    double err = codec_reconstruction_error(cur, images);
    if (err <= best_err) {
      best_err = err;
      best = cur;
    }
  }
  return best;
}

}  // namespace mrpd
