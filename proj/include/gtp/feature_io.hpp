#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "gtp/tensor.hpp"

namespace gtp {

/// Feature container: magic "GTPF", u32 rows, u32 cols, then rows·cols
/// little-endian float32 values, row-major. Used for clip features (T×d_v)
/// and word embeddings (N×d_w).
Tensor read_feature_file(const std::filesystem::path& path);
void write_feature_file(const std::filesystem::path& path, const Tensor& values);

namespace io {

void write_u32(std::ostream& out, std::uint32_t v);
void write_f32(std::ostream& out, float v);
void write_f64(std::ostream& out, double v);
std::uint32_t read_u32(std::istream& in);
float read_f32(std::istream& in);
double read_f64(std::istream& in);

}  // namespace io

}  // namespace gtp
