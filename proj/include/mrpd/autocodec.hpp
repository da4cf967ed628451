#pragma once

#include <vector>

#include "mrpd/types.hpp"

namespace mrpd {

enum class CodecVariant { Orthonormal, PatchLinear };

/// Linear encoder/decoder pair standing in for a learned autoencoder.
///
/// Orthonormal: `levels` of a 2D Haar transform (level 0 is the identity);
/// lossless and an isometry. PatchLinear: per-patch linear maps with a deep
/// frozen core; the boundary matrices in_map/out_map are the only adaptable
/// parameters. All maps are row-major.
struct Codec {
  CodecVariant variant = CodecVariant::Orthonormal;

  // Orthonormal
  int levels = 0;

  // PatchLinear
  int patch = 0;
  int c_in = 1;
  int m = 0;
  std::vector<double> in_map;                     // (patch^2 * c_in) x m
  std::vector<double> out_map;                    // m x (patch^2 * c_in)
  std::vector<std::vector<double>> core_layers;   // frozen m x m layers

  int latent_channels() const;
  int downsample_factor() const;
  size_t boundary_parameters() const;
  size_t total_parameters() const;
};

ValidationResult validate(const Codec& c);

Codec make_identity_codec();
Codec make_haar_codec(int levels);

/// PatchLinear codec with orthonormal in_map columns, a core made of
/// `core_depth` frozen random rotations, and out_map set so decode(encode(x))
/// is an orthogonal projection.
Codec make_patch_linear_codec(int patch, int m, int c_in, int core_depth, uint64_t seed);

/// img is a single-channel field already normalized to [-1, 1]; replication
/// to c_in channels happens internally.
LatentField encode(const Codec& c, const RealField& img);

/// Inverse/approximate-inverse of encode, reduced to a single channel.
/// Clamps to [-1, 1] unless clamp == false (used by linearity tests and
/// gradient code, which need the pre-clamp map).
RealField decode(const Codec& c, const LatentField& z, bool clamp = true);

/// Exact vector-Jacobian product of the pre-clamp decode map.
LatentField decode_adjoint(const Codec& c, const RealField& cotangent);

/// Refit in_map/out_map by alternating ridge least squares (10 sweeps) to
/// minimize reconstruction error on `images`; the core stays frozen.
Codec adapt_boundary(const Codec& c, const std::vector<RealField>& images, double ridge);

/// Mean of ||decode(encode(x)) - x||^2 / npixels over the set.
double codec_reconstruction_error(const Codec& c, const std::vector<RealField>& images);

}  // namespace mrpd
