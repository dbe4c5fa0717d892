#include "gocor/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace gocor {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void magic(const char* m) { bytes_.insert(bytes_.end(), m, m + 4); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void values(std::span<const double> x, Precision p) {
    for (double v : x) {
      if (p == Precision::F64) {
        f64(v);
      } else {
        f32(static_cast<float>(v));
      }
    }
  }
  Bytes take() { return std::move(bytes_); }

 private:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  Bytes bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void magic(const char* m, const char* format) {
    need(4, format);
    if (std::memcmp(bytes_.data(), m, 4) != 0) throw FormatError(std::string(format) + ": bad magic", 0);
    pos_ += 4;
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }
  std::uint32_t u32(const char* what) { return read<std::uint32_t>(what); }
  float f32(const char* what) { return read<float>(what); }
  double f64(const char* what) { return read<double>(what); }

  Precision precision(const char* format) {
    const std::size_t at = pos_;
    const std::uint8_t d = u8(format);
    if (d > 1) throw FormatError(std::string(format) + ": unknown dtype " + std::to_string(d), at);
    return static_cast<Precision>(d);
  }

  // Reads `count` values, checking the payload length first so a truncated
  // file reports the offset where the payload starts.
  std::vector<double> values(std::size_t count, Precision p, const char* format) {
    const std::size_t width = p == Precision::F64 ? 8 : 4;
    if (count > remaining() / width) {
      throw FormatError(std::string(format) + ": payload truncated, expected " + std::to_string(count * width) +
                            " bytes, found " + std::to_string(remaining()),
                        pos_);
    }
    std::vector<double> out(count);
    for (double& v : out) v = p == Precision::F64 ? f64(format) : static_cast<double>(f32(format));
    return out;
  }

  void end(const char* format) const {
    if (remaining() != 0) {
      throw FormatError(std::string(format) + ": " + std::to_string(remaining()) + " trailing bytes", pos_);
    }
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw FormatError(std::string("unexpected end of data reading ") + what, pos_);
  }
  template <typename T>
  T read(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t positive_dim(Reader& r, const char* format, const char* name) {
  const std::size_t at = r.offset();
  const std::uint32_t v = r.u32(name);
  if (v == 0 || v > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
    throw FormatError(std::string(format) + ": invalid " + name + " = " + std::to_string(v), at);
  }
  return v;
}

void version(Reader& r, const char* format) {
  const std::size_t at = r.offset();
  const std::uint32_t v = r.u32("version");
  if (v != kVersion) throw FormatError(std::string(format) + ": unsupported version " + std::to_string(v), at);
}

void check_probe(const CorrespondenceVolume& v, int i, int j) {
  const VolumeShape& s = v.shape();
  if (i < 0 || i >= s.height || j < 0 || j >= s.width) {
    throw ValidationError("probe (" + std::to_string(i) + ", " + std::to_string(j) + ") outside the " +
                          std::to_string(s.height) + "x" + std::to_string(s.width) + " grid");
  }
}

}  // namespace

Bytes encode_fmap(const FeatureMap& f, Precision precision) {
  Writer w;
  w.magic("FMAP");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(f.height()));
  w.u32(static_cast<std::uint32_t>(f.width()));
  w.u32(static_cast<std::uint32_t>(f.depth()));
  w.u8(static_cast<std::uint8_t>(precision));
  w.values(f.data(), precision);
  return w.take();
}

FeatureMap decode_fmap(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.magic("FMAP", "FMAP");
  version(r, "FMAP");
  const auto h = positive_dim(r, "FMAP", "H");
  const auto w = positive_dim(r, "FMAP", "W");
  const auto d = positive_dim(r, "FMAP", "D");
  const Precision p = r.precision("FMAP");
  std::vector<double> data = r.values(static_cast<std::size_t>(h) * w * d, p, "FMAP");
  r.end("FMAP");
  return FeatureMap(static_cast<int>(h), static_cast<int>(w), static_cast<int>(d), std::move(data));
}

Bytes encode_flow(const FlowField& flow) {
  flow.validate();
  Writer w;
  w.magic("FLOW");
  w.u32(static_cast<std::uint32_t>(flow.height));
  w.u32(static_cast<std::uint32_t>(flow.width));
  for (float v : flow.uv) w.f32(v);
  for (std::uint8_t m : flow.mask) w.u8(m);
  return w.take();
}

FlowField decode_flow(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.magic("FLOW", "FLOW");
  const auto h = positive_dim(r, "FLOW", "H");
  const auto w = positive_dim(r, "FLOW", "W");
  FlowField flow(static_cast<int>(h), static_cast<int>(w));
  const std::size_t pixels = static_cast<std::size_t>(h) * w;
  if (r.remaining() / 8 < pixels) {
    throw FormatError("FLOW: payload truncated, expected " + std::to_string(pixels * 8) + " bytes", r.offset());
  }
  for (float& v : flow.uv) v = r.f32("FLOW");
  if (r.remaining() == pixels) {
    flow.mask.resize(pixels);
    for (std::uint8_t& m : flow.mask) m = r.u8("FLOW mask");
  }
  if (r.remaining() != 0) {
    throw FormatError("FLOW: " + std::to_string(r.remaining()) + " trailing bytes (mask plane must hold H*W bytes)",
                      r.offset());
  }
  return flow;
}

Bytes encode_cvol(const CorrespondenceVolume& v, Precision precision) {
  const VolumeShape& s = v.shape();
  Writer w;
  w.magic("CVOL");
  w.u32(kVersion);
  w.u8(static_cast<std::uint8_t>(s.kind));
  w.u32(static_cast<std::uint32_t>(s.height));
  w.u32(static_cast<std::uint32_t>(s.width));
  w.u32(static_cast<std::uint32_t>(s.radius));
  w.u8(static_cast<std::uint8_t>(precision));
  w.values(v.data(), precision);
  return w.take();
}

CorrespondenceVolume decode_cvol(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.magic("CVOL", "CVOL");
  version(r, "CVOL");
  const std::size_t kind_at = r.offset();
  const std::uint8_t kind = r.u8("kind");
  if (kind > 1) throw FormatError("CVOL: unknown volume kind " + std::to_string(kind), kind_at);
  VolumeShape s;
  s.kind = static_cast<VolumeKind>(kind);
  s.height = static_cast<int>(positive_dim(r, "CVOL", "H"));
  s.width = static_cast<int>(positive_dim(r, "CVOL", "W"));
  const std::size_t radius_at = r.offset();
  const std::uint32_t radius = r.u32("R");
  if (radius > 1u << 15 || (s.kind == VolumeKind::Global && radius != 0)) {
    throw FormatError("CVOL: invalid radius " + std::to_string(radius), radius_at);
  }
  s.radius = static_cast<int>(radius);
  const Precision p = r.precision("CVOL");
  std::vector<double> data = r.values(s.size(), p, "CVOL");
  r.end("CVOL");
  return CorrespondenceVolume(s, std::move(data));
}

Bytes encode_heatmap_pgm(const CorrespondenceVolume& v, int i, int j) {
  check_probe(v, i, j);
  const auto slice = v.slice(i, j);
  const auto [lo, hi] = std::minmax_element(slice.begin(), slice.end());
  const double min = *lo;
  const double range = *hi - *lo;
  const std::string header = "P5\n" + std::to_string(v.shape().slice_width()) + " " +
                             std::to_string(v.shape().slice_height()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + slice.size());
  for (double x : slice) {
    if (!(range > 0.0) || !std::isfinite(range)) {
      out.push_back(0);
      continue;
    }
    const double t = std::clamp((x - min) / range, 0.0, 1.0);
    out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * t)));
  }
  return out;
}

std::string slice_csv(const CorrespondenceVolume& v, int i, int j) {
  check_probe(v, i, j);
  const auto slice = v.slice(i, j);
  const int sw = v.shape().slice_width();
  std::string out;
  char buf[32];
  for (std::size_t n = 0; n < slice.size(); ++n) {
    std::snprintf(buf, sizeof buf, "%.17g", slice[n]);
    out += buf;
    out += (static_cast<int>(n % sw) == sw - 1) ? '\n' : ',';
  }
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("error reading " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("error writing " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

FeatureMap load_fmap(const std::filesystem::path& path) { return decode_fmap(read_file(path)); }
void save_fmap(const std::filesystem::path& path, const FeatureMap& f, Precision precision) {
  write_file(path, encode_fmap(f, precision));
}
FlowField load_flow(const std::filesystem::path& path) { return decode_flow(read_file(path)); }
void save_flow(const std::filesystem::path& path, const FlowField& flow) { write_file(path, encode_flow(flow)); }
CorrespondenceVolume load_cvol(const std::filesystem::path& path) { return decode_cvol(read_file(path)); }
void save_cvol(const std::filesystem::path& path, const CorrespondenceVolume& v, Precision precision) {
  write_file(path, encode_cvol(v, precision));
}

}  // namespace gocor
