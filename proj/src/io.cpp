#include "c3/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "c3/errors.hpp"

namespace c3::io {
namespace {

static_assert(std::numeric_limits<double>::is_iec559);

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

template <typename T>
T get_le(const std::vector<unsigned char>& in, std::size_t& off) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  if (off + sizeof(U) > in.size()) throw IoError("matrix file truncated");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(in[off + i]) << (8 * i);
  off += sizeof(U);
  return std::bit_cast<T>(bits);
}

}  // namespace

std::vector<unsigned char> encode_matrix(const Matrix& m) {
  std::vector<unsigned char> out;
  out.reserve(24 + static_cast<std::size_t>(m.size()) * 8);
  out.insert(out.end(), std::begin(kMatrixMagic), std::end(kMatrixMagic));
  put_le<std::uint32_t>(out, kMatrixVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.size(); ++i) put_le<double>(out, m.data()[i]);
  return out;
}

Matrix decode_matrix(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMatrixMagic, 4) != 0)
    throw IoError("not a C3MM matrix file (bad magic)");
  std::size_t off = 4;
  const auto version = get_le<std::uint32_t>(bytes, off);
  if (version != kMatrixVersion) throw IoError("unsupported C3MM version " + std::to_string(version));
  const auto rows = get_le<std::uint64_t>(bytes, off);
  const auto cols = get_le<std::uint64_t>(bytes, off);
  if (rows != 0 && cols > (bytes.size() - off) / 8 / rows) throw IoError("matrix file truncated");
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = get_le<double>(bytes, off);
  if (off != bytes.size()) throw IoError("trailing bytes after matrix payload");
  return m;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  const auto bytes = encode_matrix(m);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return decode_matrix(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create directory " + dir.string() + (ec ? ": " + ec.message() : ""));
}

}  // namespace c3::io
