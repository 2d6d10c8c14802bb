#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "c3/numkern.hpp"

namespace c3::io {

/// Binary matrix file: "C3MM", u32 version, u64 rows, u64 cols, then
/// rows * cols little-endian IEEE-754 doubles in row-major order.
inline constexpr char kMatrixMagic[4] = {'C', '3', 'M', 'M'};
inline constexpr std::uint32_t kMatrixVersion = 1;

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

std::vector<unsigned char> encode_matrix(const Matrix& m);
Matrix decode_matrix(const std::vector<unsigned char>& bytes);

/// Shortest decimal form that round-trips the double.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

void ensure_directory(const std::filesystem::path& dir);

}  // namespace c3::io
