#include "mrpd/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mrpd {

namespace {

constexpr char kMagic[4] = {'M', 'R', 'P', 'D'};
constexpr uint16_t kVersion = 1;
enum Dtype : uint8_t { kF64 = 1, kC128 = 2, kU8 = 3 };

void put_u16(std::string& b, uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::string header(uint8_t dtype, const std::vector<uint32_t>& dims) {
  std::string b(kMagic, 4);
  put_u16(b, kVersion);
  b.push_back(static_cast<char>(dtype));
  b.push_back(static_cast<char>(dims.size()));
  for (uint32_t d : dims) put_u32(b, d);
  return b;
}

void write_binary_atomic(const std::string& path, const std::string& bytes) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path + ": " + ec.message());
}

struct FldData {
  uint8_t dtype = 0;
  std::vector<uint32_t> dims;
  std::string payload;
};

FldData read_fld(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || bytes.compare(0, 4, kMagic, 4) != 0)
    throw IoError("not an FLD file: " + path);
  auto u8 = [&](size_t i) { return static_cast<uint8_t>(bytes[i]); };
  uint16_t version = static_cast<uint16_t>(u8(4) | (u8(5) << 8));
  if (version != kVersion) throw IoError("unsupported FLD version in " + path);
  FldData f;
  f.dtype = u8(6);
  uint8_t ndim = u8(7);
  size_t off = 8;
  if (bytes.size() < off + 4u * ndim) throw IoError("truncated FLD header: " + path);
  size_t count = 1;
  for (int i = 0; i < ndim; ++i) {
    uint32_t d = 0;
    for (int b = 0; b < 4; ++b) d |= static_cast<uint32_t>(u8(off + b)) << (8 * b);
    off += 4;
    f.dims.push_back(d);
    count *= d;
  }
  size_t elem = f.dtype == kF64 ? 8 : f.dtype == kC128 ? 16 : 1;
  if (bytes.size() - off != count * elem) throw IoError("payload size mismatch: " + path);
  f.payload = bytes.substr(off);
  return f;
}

template <typename T>
void append_raw(std::string& b, const std::vector<T>& v) {
  b.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
}

template <typename T>
std::vector<T> from_raw(const std::string& payload) {
  std::vector<T> v(payload.size() / sizeof(T));
  std::copy(payload.begin(), payload.end(), reinterpret_cast<char*>(v.data()));
  return v;
}

nlohmann::json matrix_json(const std::vector<double>& m) { return nlohmann::json(m); }

}  // namespace

void write_fld(const std::string& path, const RealField& f) {
  std::string b = header(kF64, {static_cast<uint32_t>(f.height), static_cast<uint32_t>(f.width)});
  append_raw(b, f.data);
  write_binary_atomic(path, b);
}

void write_fld(const std::string& path, const ComplexField& f) {
  std::string b = header(kC128, {static_cast<uint32_t>(f.height), static_cast<uint32_t>(f.width)});
  append_raw(b, f.data);
  write_binary_atomic(path, b);
}

void write_fld(const std::string& path, const LatentField& f) {
  std::string b = header(kF64, {static_cast<uint32_t>(f.channels), static_cast<uint32_t>(f.height),
                                static_cast<uint32_t>(f.width)});
  append_raw(b, f.data);
  write_binary_atomic(path, b);
}

void write_fld(const std::string& path, const SamplingMask& m) {
  std::string b = header(kU8, {static_cast<uint32_t>(m.height), static_cast<uint32_t>(m.width)});
  append_raw(b, m.keep);
  write_binary_atomic(path, b);
  nlohmann::json meta;
  meta["accel_nominal"] = m.accel_nominal;
  meta["acs_fraction"] = m.acs_fraction;
  meta["pattern"] = to_string(m.pattern);
  write_text_atomic(path + ".json", meta.dump(2) + "\n");
}

RealField read_fld_real(const std::string& path, bool magnitude) {
  FldData f = read_fld(path);
  if (f.dtype != kF64 || f.dims.size() != 2) throw IoError("not a 2D real FLD: " + path);
  RealField out(static_cast<int>(f.dims[0]), static_cast<int>(f.dims[1]), magnitude);
  out.data = from_raw<double>(f.payload);
  return out;
}

ComplexField read_fld_complex(const std::string& path, Domain domain) {
  FldData f = read_fld(path);
  if (f.dtype != kC128 || f.dims.size() != 2) throw IoError("not a 2D complex FLD: " + path);
  ComplexField out(static_cast<int>(f.dims[0]), static_cast<int>(f.dims[1]), domain);
  out.data = from_raw<cplx>(f.payload);
  return out;
}

LatentField read_fld_latent(const std::string& path) {
  FldData f = read_fld(path);
  if (f.dtype != kF64 || f.dims.size() != 3) throw IoError("not a 3D latent FLD: " + path);
  LatentField out(static_cast<int>(f.dims[0]), static_cast<int>(f.dims[1]),
                  static_cast<int>(f.dims[2]));
  out.data = from_raw<double>(f.payload);
  return out;
}

SamplingMask read_fld_mask(const std::string& path) {
  FldData f = read_fld(path);
  if (f.dtype != kU8 || f.dims.size() != 2) throw IoError("not a mask FLD: " + path);
  SamplingMask m(static_cast<int>(f.dims[0]), static_cast<int>(f.dims[1]), MaskPattern::Full);
  m.keep.assign(f.payload.begin(), f.payload.end());
  std::ifstream meta(path + ".json");
  if (meta) {
    nlohmann::json j = nlohmann::json::parse(meta, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw IoError("corrupt mask metadata: " + path + ".json");
    m.accel_nominal = j.value("accel_nominal", 1.0);
    m.acs_fraction = j.value("acs_fraction", 0.0);
    m.pattern = mask_pattern_from_string(j.value("pattern", "full"));
  }
  return m;
}

void write_codec(const std::string& path, const Codec& c) {
  nlohmann::json j;
  j["format"] = "mrpd-codec";
  j["version"] = 1;
  j["variant"] = c.variant == CodecVariant::Orthonormal ? "orthonormal" : "patch_linear";
  j["levels"] = c.levels;
  j["patch"] = c.patch;
  j["c_in"] = c.c_in;
  j["m"] = c.m;
  j["in_map"] = matrix_json(c.in_map);
  j["out_map"] = matrix_json(c.out_map);
  j["core_layers"] = nlohmann::json::array();
  for (const auto& layer : c.core_layers) j["core_layers"].push_back(matrix_json(layer));
  write_text_atomic(path, j.dump() + "\n");
}

Codec read_codec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || j.value("format", "") != "mrpd-codec")
    throw IoError("not a codec file: " + path);
  Codec c;
  std::string variant = j.value("variant", "orthonormal");
  c.variant = variant == "patch_linear" ? CodecVariant::PatchLinear : CodecVariant::Orthonormal;
  c.levels = j.value("levels", 0);
  c.patch = j.value("patch", 0);
  c.c_in = j.value("c_in", 1);
  c.m = j.value("m", 0);
  c.in_map = j.value("in_map", std::vector<double>{});
  c.out_map = j.value("out_map", std::vector<double>{});
  for (const auto& layer : j.value("core_layers", nlohmann::json::array()))
    c.core_layers.push_back(layer.get<std::vector<double>>());
  ValidationResult v = validate(c);
  if (!v.ok) throw IoError("invalid codec in " + path + ": " + v.message);
  return c;
}

void write_pgm(const std::string& path, const RealField& img) {
  double lo = *std::min_element(img.data.begin(), img.data.end());
  double hi = *std::max_element(img.data.begin(), img.data.end());
  double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::ostringstream out;
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (double v : img.data)
    out.put(static_cast<char>(static_cast<int>(std::clamp((v - lo) * scale, 0.0, 255.0))));
  write_binary_atomic(path, out.str());
}

Config Config::load(const std::string& path, const std::set<std::string>& known_keys) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), known_keys, path);
}

Config Config::parse(const std::string& text, const std::set<std::string>& known_keys,
                     const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty config key");
    if (!known_keys.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown config key '" + key +
                        "'");
    if (cfg.values_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate config key '" + key +
                        "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: " + it->second);
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t used = 0;
    int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer: " + it->second);
  }
}

uint64_t Config::get_seed(const std::string& key, uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t used = 0;
    uint64_t v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a seed: " + it->second);
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: " + it->second);
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

uint64_t Config::hash() const {
  std::string joined;
  for (const auto& [k, v] : values_) joined += k + "=" + v + "\n";
  return fnv1a(joined);
}

void write_text_atomic(const std::string& path, const std::string& content) {
  write_binary_atomic(path, content);
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace mrpd
