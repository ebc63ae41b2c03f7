#include "dpca/matrix_io.hpp"

#include "dpca/error.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace dpca {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_double(const std::string& s, size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw_data("matrix CSV line " + std::to_string(line_no) +
               ": cannot parse '" + s + "'");
  }
  return v;
}

template <typename T>
void put_le(std::vector<std::uint8_t>& buf, T v) {
  static_assert(std::endian::native == std::endian::little ||
                std::endian::native == std::endian::big);
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < sizeof(T); ++i) buf.push_back(raw[sizeof(T) - 1 - i]);
  } else {
    buf.insert(buf.end(), raw, raw + sizeof(T));
  }
}

template <typename T>
T get_le(const std::uint8_t* p) {
  std::uint8_t raw[sizeof(T)];
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < sizeof(T); ++i) raw[i] = p[sizeof(T) - 1 - i];
  } else {
    std::memcpy(raw, p, sizeof(T));
  }
  T v;
  std::memcpy(&v, raw, sizeof(T));
  return v;
}

}  // namespace

void ByteWriter::u32(std::uint32_t v) { put_le(buf_, v); }
void ByteWriter::u64(std::uint64_t v) { put_le(buf_, v); }
void ByteWriter::f64(double v) { put_le(buf_, v); }

void ByteReader::need(size_t n) const {
  if (remaining() < n) throw_data("truncated binary payload");
}

std::uint32_t ByteReader::u32() {
  need(4);
  auto v = get_le<std::uint32_t>(bytes_.data() + pos_);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  auto v = get_le<std::uint64_t>(bytes_.data() + pos_);
  pos_ += 8;
  return v;
}

double ByteReader::f64() {
  need(8);
  auto v = get_le<double>(bytes_.data() + pos_);
  pos_ += 8;
  return v;
}

DataMatrix read_matrix_csv(std::istream& in) {
  DataMatrix dm;
  std::string line;
  size_t line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv(line);
    if (!have_header) {
      dm.col_names = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != dm.col_names.size()) {
      throw_data("matrix CSV line " + std::to_string(line_no) + ": expected " +
                 std::to_string(dm.col_names.size()) + " fields, got " +
                 std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, line_no));
    rows.push_back(std::move(row));
  }
  if (!have_header || rows.empty()) throw_data("matrix CSV has no data rows");
  dm.values.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(dm.col_names.size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) dm.values(i, j) = rows[i][j];
  validate_data(dm);
  return dm;
}

DataMatrix read_matrix_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_data("cannot open " + path);
  return read_matrix_csv(in);
}

void write_matrix_csv(std::ostream& out, const DataMatrix& dm) {
  validate_data(dm);
  const auto n = dm.values.cols();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j) out << ',';
    if (dm.col_names.empty()) {
      out << 'c' << j;
    } else {
      out << dm.col_names[j];
    }
  }
  out << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < dm.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j) out << ',';
      out << dm.values(i, j);
    }
    out << '\n';
  }
}

std::vector<std::uint8_t> encode_matrix_binary(const Matrix& m) {
  ByteWriter w;
  w.u64(static_cast<std::uint64_t>(m.rows()));
  w.u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
  return std::move(w).bytes();
}

Matrix decode_matrix_binary(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto rows = r.u64();
  const auto cols = r.u64();
  if (rows == 0 || cols == 0) throw_data("binary matrix has zero dimension");
  if (r.remaining() / 8 / cols < rows || r.remaining() != rows * cols * 8)
    throw_data("binary matrix payload size does not match header");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
  validate_matrix(m);
  return m;
}

Matrix read_matrix_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_matrix_binary(bytes);
}

void write_matrix_binary_file(const std::string& path, const Matrix& m) {
  auto bytes = encode_matrix_binary(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

DataMatrix load_matrix(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0)
    return DataMatrix{read_matrix_binary_file(path), {}};
  return read_matrix_csv_file(path);
}

}  // namespace dpca
