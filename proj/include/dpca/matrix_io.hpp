#pragma once

#include "dpca/matrix.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dpca {

/// CSV: a header row of column names, then one row per observation.
/// Lines starting with '#' are ignored on read.
DataMatrix read_matrix_csv(std::istream& in);
DataMatrix read_matrix_csv_file(const std::string& path);
void write_matrix_csv(std::ostream& out, const DataMatrix& dm);

/// Binary: little-endian u64 m, u64 n, then m*n float64 row-major.
std::vector<std::uint8_t> encode_matrix_binary(const Matrix& m);
Matrix decode_matrix_binary(std::span<const std::uint8_t> bytes);
Matrix read_matrix_binary_file(const std::string& path);
void write_matrix_binary_file(const std::string& path, const Matrix& m);

/// Loads by extension: ".bin" is binary, anything else is CSV.
DataMatrix load_matrix(const std::string& path);

/// Little-endian byte buffer used by the binary formats and the summary
/// wire formats.
class ByteWriter {
 public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);

  const std::vector<std::uint8_t>& bytes() const& { return buf_; }
  std::vector<std::uint8_t> bytes() && { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();

  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(size_t n) const;

  std::span<const std::uint8_t> bytes_;
  size_t pos_ = 0;
};

}  // namespace dpca
