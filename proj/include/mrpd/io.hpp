#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "mrpd/autocodec.hpp"
#include "mrpd/types.hpp"

namespace mrpd {

// --- FLD binary container -------------------------------------------------
// Layout: magic "MRPD", u16 format version, u8 dtype (1 = f64, 2 = c128,
// 3 = u8 bitmask), u8 ndim, ndim u32 little-endian dims, raw row-major
// payload. Round-trips are bit-exact.

void write_fld(const std::string& path, const RealField& f);
void write_fld(const std::string& path, const ComplexField& f);
void write_fld(const std::string& path, const LatentField& f);
// Mask payload is the u8 keep grid; rate/ACS/pattern metadata goes to a
// JSON sidecar at path + ".json".
void write_fld(const std::string& path, const SamplingMask& m);

RealField read_fld_real(const std::string& path, bool magnitude = false);
ComplexField read_fld_complex(const std::string& path, Domain domain);
LatentField read_fld_latent(const std::string& path);
SamplingMask read_fld_mask(const std::string& path);

// Codec serialization: JSON header (variant, dims) plus matrices inline.
void write_codec(const std::string& path, const Codec& c);
Codec read_codec(const std::string& path);

// 8-bit min-max windowed PGM preview; never a data path.
void write_pgm(const std::string& path, const RealField& img);

// --- Config ----------------------------------------------------------------
// Flat `key = value` lines with dotted namespaces; '#' starts a comment.
// Unknown keys are configuration errors.
class Config {
 public:
  Config() = default;

  static Config load(const std::string& path, const std::set<std::string>& known_keys);
  static Config parse(const std::string& text, const std::set<std::string>& known_keys,
                      const std::string& origin = "<config>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  uint64_t get_seed(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& values() const { return values_; }
  /// FNV-1a over the sorted key=value pairs; stable across runs.
  uint64_t hash() const;

 private:
  std::map<std::string, std::string> values_;
};

// Atomic text write (write-then-rename).
void write_text_atomic(const std::string& path, const std::string& content);

uint64_t fnv1a(const std::string& s);

}  // namespace mrpd
