#include "gtp/feature_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "gtp/errors.hpp"

namespace gtp {
namespace io {

void write_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

void write_f32(std::ostream& out, float v) { write_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t read_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (!in) {
    throw DataError("", "unexpected end of file");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float read_f32(std::istream& in) { return std::bit_cast<float>(read_u32(in)); }

void write_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  write_u32(out, static_cast<std::uint32_t>(bits & 0xffffffffu));
  write_u32(out, static_cast<std::uint32_t>(bits >> 32));
}

double read_f64(std::istream& in) {
  const std::uint64_t lo = read_u32(in);
  const std::uint64_t hi = read_u32(in);
  return std::bit_cast<double>(lo | (hi << 32));
}

}  // namespace io

namespace {
constexpr char kMagic[4] = {'G', 'T', 'P', 'F'};
}

Tensor read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("", "cannot open feature file " + path.string());
  }
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("", "bad magic in feature file " + path.string());
  }
  try {
    const std::uint32_t rows = io::read_u32(in);
    const std::uint32_t cols = io::read_u32(in);
    Tensor t(rows, cols);
    for (double& v : t.values()) {
      v = io::read_f32(in);
      if (!std::isfinite(v)) {
        throw DataError("", "non-finite value in feature file " + path.string());
      }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
      throw DataError("", "trailing bytes in feature file " + path.string());
    }
    return t;
  } catch (const DataError& e) {
    throw DataError("", std::string(e.what()) + " (" + path.string() + ")");
  }
}

void write_feature_file(const std::filesystem::path& path, const Tensor& values) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("", "cannot write feature file " + path.string());
  }
  out.write(kMagic, 4);
  io::write_u32(out, static_cast<std::uint32_t>(values.rows()));
  io::write_u32(out, static_cast<std::uint32_t>(values.cols()));
  for (double v : values.values()) {
    io::write_f32(out, static_cast<float>(v));
  }
}

}  // namespace gtp
