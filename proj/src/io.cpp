#include "evmesh/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <type_traits>

#include "evmesh/error.hpp"

namespace evmesh {
namespace {

class Writer {
 public:
  explicit Writer(std::string_view magic, std::size_t reserve = 0) {
    out_.reserve(reserve + magic.size());
    out_.append(magic);
  }

  template <typename T>
  void put(T value) {
    using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>,
                                                      std::conditional_t<sizeof(T) == 4, std::int32_t, std::int64_t>, T>>;
    U bits;
    std::memcpy(&bits, &value, sizeof(T));
    for (std::size_t b = 0; b < sizeof(T); ++b) out_.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }

  void pad(std::size_t n) { out_.append(n, '\0'); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view bytes, std::string_view magic, const char* stage) : bytes_(bytes), stage_(stage) {
    if (bytes.size() < magic.size() || bytes.substr(0, magic.size()) != magic) {
      throw ParseError(stage_, "bad magic, expected " + std::string(magic));
    }
    pos_ = magic.size();
  }

  template <typename T>
  T get() {
    need(sizeof(T));
    using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>,
                                                      std::conditional_t<sizeof(T) == 4, std::int32_t, std::int64_t>, T>>;
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    }
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, &bits, sizeof(T));
    return value;
  }

  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

  // Checks that exactly `n` payload bytes remain.
  void expect_remaining(std::uint64_t n) const {
    const std::uint64_t left = bytes_.size() - pos_;
    if (left < n) throw ParseError(stage_, "file is truncated");
    if (left > n) throw ParseError(stage_, "unexpected trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ParseError(stage_, "file is truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
  const char* stage_;
};

constexpr std::size_t kEventRecord = 16;

}  // namespace

std::string encode_evt1(const EventStream& stream) {
  if (stream.width < 0 || stream.width > 0xFFFF || stream.height < 0 || stream.height > 0xFFFF) {
    throw ParameterError("write_evt1", "sensor size does not fit in 16 bits");
  }
  Writer w("EVT1", 12 + stream.size() * kEventRecord);
  w.put(static_cast<std::uint16_t>(stream.width));
  w.put(static_cast<std::uint16_t>(stream.height));
  w.put(static_cast<std::uint64_t>(stream.size()));
  for (const Event& e : stream.events) {
    w.put(e.x);
    w.put(e.y);
    w.put(e.t);
    w.put(e.p);
    w.pad(3);
  }
  return w.take();
}

EventStream decode_evt1(std::string_view bytes) {
  Reader r(bytes, "EVT1", "read_evt1");
  EventStream s;
  s.width = r.get<std::uint16_t>();
  s.height = r.get<std::uint16_t>();
  const auto count = r.get<std::uint64_t>();
  if (count > bytes.size() / kEventRecord) throw ParseError("read_evt1", "file is truncated");
  r.expect_remaining(count * kEventRecord);
  s.events.resize(count);
  for (Event& e : s.events) {
    e.x = r.get<std::uint16_t>();
    e.y = r.get<std::uint16_t>();
    e.t = r.get<std::int64_t>();
    e.p = r.get<std::int8_t>();
    r.skip(3);
  }
  if (!s.events.empty()) {
    s.t_start = s.events.front().t;
    s.t_end = s.events.back().t;
  }
  try {
    validate_stream(s);
  } catch (const DataError& e) {
    throw ParseError("read_evt1", e.what());
  }
  return s;
}

std::string encode_vox1(const VoxelGrid& grid) {
  Writer w("VOX1", 12 + grid.values.size() * 4);
  w.put(static_cast<std::uint32_t>(grid.bins));
  w.put(static_cast<std::uint32_t>(grid.height));
  w.put(static_cast<std::uint32_t>(grid.width));
  for (float v : grid.values) w.put(v);
  return w.take();
}

VoxelGrid decode_vox1(std::string_view bytes) {
  Reader r(bytes, "VOX1", "read_vox1");
  const auto b = r.get<std::uint32_t>();
  const auto h = r.get<std::uint32_t>();
  const auto w = r.get<std::uint32_t>();
  r.expect_remaining(static_cast<std::uint64_t>(b) * h * w * 4);
  VoxelGrid g(static_cast<int>(b), static_cast<int>(h), static_cast<int>(w));
  for (float& v : g.values) v = r.get<float>();
  return g;
}

VoxelGrid cost_volume_as_grid(const CostVolume& volume) {
  VoxelGrid g(static_cast<int>(volume.offsets.size()), volume.height, volume.width);
  g.values = volume.values;
  return g;
}

std::string encode_flo1(const DenseFlow& flow) {
  Writer w("FLO1", 8 + flow.size() * 8);
  w.put(static_cast<std::uint32_t>(flow.width));
  w.put(static_cast<std::uint32_t>(flow.height));
  for (std::size_t i = 0; i < flow.size(); ++i) {
    w.put(flow.u[i]);
    w.put(flow.v[i]);
  }
  return w.take();
}

DenseFlow decode_flo1(std::string_view bytes) {
  Reader r(bytes, "FLO1", "read_flo1");
  const auto w = r.get<std::uint32_t>();
  const auto h = r.get<std::uint32_t>();
  r.expect_remaining(static_cast<std::uint64_t>(w) * h * 8);
  DenseFlow f(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.u[i] = r.get<float>();
    f.v[i] = r.get<float>();
  }
  return f;
}

std::string encode_msh1(const MeshFlow& mesh) {
  Writer w("MSH1", 8 + mesh.u.size() * 8);
  w.put(static_cast<std::uint32_t>(mesh.spec.cells_x));
  w.put(static_cast<std::uint32_t>(mesh.spec.cells_y));
  for (std::size_t i = 0; i < mesh.u.size(); ++i) {
    w.put(mesh.u[i]);
    w.put(mesh.v[i]);
  }
  return w.take();
}

MeshFlow decode_msh1(std::string_view bytes) {
  Reader r(bytes, "MSH1", "read_msh1");
  const auto cx = r.get<std::uint32_t>();
  const auto cy = r.get<std::uint32_t>();
  if (cx == 0 || cy == 0 || cx > 1u << 20 || cy > 1u << 20) throw ParseError("read_msh1", "bad cell counts");
  r.expect_remaining((static_cast<std::uint64_t>(cx) + 1) * (cy + 1) * 8);
  MeshFlow m(MeshGridSpec{static_cast<int>(cx), static_cast<int>(cy)});
  for (std::size_t i = 0; i < m.u.size(); ++i) {
    m.u[i] = r.get<float>();
    m.v[i] = r.get<float>();
  }
  return m;
}

std::string events_csv(const EventStream& stream) {
  std::string out = "x,y,t,p\n";
  out.reserve(out.size() + stream.size() * 20);
  for (const Event& e : stream.events) {
    out += std::to_string(e.x);
    out += ',';
    out += std::to_string(e.y);
    out += ',';
    out += std::to_string(e.t);
    out += ',';
    out += std::to_string(static_cast<int>(e.p));
    out += '\n';
  }
  return out;
}

std::string encode_pgm(const ImageF& image, double lo, double hi) {
  if (!(hi > lo)) throw ParameterError("write_pgm", "scale range must be increasing");
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n65535\n";
  out.reserve(out.size() + image.size() * 2);
  for (float v : image.values) {
    double s = (static_cast<double>(v) - lo) / (hi - lo);
    if (!(s >= 0.0)) s = 0.0;
    const auto q = static_cast<std::uint16_t>(std::nearbyint(std::min(s, 1.0) * 65535.0));
    out.push_back(static_cast<char>(q >> 8));
    out.push_back(static_cast<char>(q & 0xFF));
  }
  return out;
}

ImageF decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  const auto token = [&]() -> std::string {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw ParseError("read_pgm", "header is truncated");
    return std::string(bytes.substr(start, pos - start));
  };
  const auto number = [&]() {
    const std::string t = token();
    if (t.empty() || t.size() > 9 || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw ParseError("read_pgm", "bad header field '" + t + "'");
    }
    return std::stoi(t);
  };
  if (token() != "P5") throw ParseError("read_pgm", "bad magic, expected P5");
  const int w = number();
  const int h = number();
  const int maxval = number();
  if (maxval < 1 || maxval > 65535) throw ParseError("read_pgm", "maxval out of range");
  if (pos >= bytes.size()) throw ParseError("read_pgm", "file is truncated");
  ++pos;  // single whitespace before the raster
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(w) * h * bpp;
  if (bytes.size() - pos < need) throw ParseError("read_pgm", "file is truncated");
  ImageF img(w, h);
  for (std::size_t i = 0; i < img.size(); ++i) {
    unsigned v = static_cast<unsigned char>(bytes[pos + i * bpp]);
    if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(bytes[pos + i * bpp + 1]);
    img.values[i] = static_cast<float>(static_cast<double>(v) / maxval);
  }
  return img;
}

namespace {

// Middlebury color wheel: RY, YG, GC, CB, BM, MR segments.
std::vector<std::array<double, 3>> color_wheel() {
  constexpr int kRY = 15, kYG = 6, kGC = 4, kCB = 11, kBM = 13, kMR = 6;
  std::vector<std::array<double, 3>> wheel;
  for (int i = 0; i < kRY; ++i) wheel.push_back({255, 255.0 * i / kRY, 0});
  for (int i = 0; i < kYG; ++i) wheel.push_back({255 - 255.0 * i / kYG, 255, 0});
  for (int i = 0; i < kGC; ++i) wheel.push_back({0, 255, 255.0 * i / kGC});
  for (int i = 0; i < kCB; ++i) wheel.push_back({0, 255 - 255.0 * i / kCB, 255});
  for (int i = 0; i < kBM; ++i) wheel.push_back({255.0 * i / kBM, 0, 255});
  for (int i = 0; i < kMR; ++i) wheel.push_back({255, 0, 255 - 255.0 * i / kMR});
  return wheel;
}

}  // namespace

std::string encode_flow_ppm(const DenseFlow& flow, double max_radius) {
  if (max_radius <= 0.0) {
    for (std::size_t i = 0; i < flow.size(); ++i) {
      const double r = std::hypot(static_cast<double>(flow.u[i]), static_cast<double>(flow.v[i]));
      if (std::isfinite(r)) max_radius = std::max(max_radius, r);
    }
  }
  if (max_radius <= 0.0) max_radius = 1.0;
  const auto wheel = color_wheel();
  const auto ncols = static_cast<double>(wheel.size());

  std::string out = "P6\n" + std::to_string(flow.width) + " " + std::to_string(flow.height) + "\n255\n";
  out.reserve(out.size() + flow.size() * 3);
  for (std::size_t i = 0; i < flow.size(); ++i) {
    const double u = flow.u[i] / max_radius;
    const double v = flow.v[i] / max_radius;
    if (!std::isfinite(u) || !std::isfinite(v)) {
      out.append(3, '\0');
      continue;
    }
    const double rad = std::hypot(u, v);
    const double a = std::atan2(-v, -u) / std::numbers::pi;
    const double fk = (a + 1.0) / 2.0 * (ncols - 1.0);
    const auto k0 = static_cast<std::size_t>(std::floor(fk));
    const std::size_t k1 = (k0 + 1) % wheel.size();
    const double f = fk - static_cast<double>(k0);
    for (int c = 0; c < 3; ++c) {
      double col = ((1.0 - f) * wheel[k0][c] + f * wheel[k1][c]) / 255.0;
      col = rad <= 1.0 ? 1.0 - rad * (1.0 - col) : col * 0.75;
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::nearbyint(255.0 * col))));
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read", "failed reading " + path.string());
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write", "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("write", "failed writing " + path.string());
}

}  // namespace evmesh
