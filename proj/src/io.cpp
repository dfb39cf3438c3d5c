#include "nke/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nke/error.hpp"

namespace nke {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Header "<magic> n1 n2 ...\n" followed by raw doubles.
std::vector<std::size_t> parse_header(const std::string& bytes, const std::string& magic, std::size_t count,
                                      std::size_t& offset, const std::string& path) {
  const std::size_t nl = bytes.find('\n');
  if (nl == std::string::npos) fail(ErrorCode::Parse, path + ": missing header line");
  std::istringstream hs(bytes.substr(0, nl));
  std::string tag;
  hs >> tag;
  if (tag != magic) fail(ErrorCode::Parse, path + ": expected " + magic + " header");
  std::vector<std::size_t> dims(count);
  for (auto& d : dims)
    if (!(hs >> d)) fail(ErrorCode::Parse, path + ": malformed " + magic + " header");
  offset = nl + 1;
  return dims;
}

void read_doubles(const std::string& bytes, std::size_t offset, std::size_t count, double* dst,
                  const std::string& path) {
  if (bytes.size() - offset != count * sizeof(double))
    fail(ErrorCode::Parse, path + ": payload size does not match header");
  std::memcpy(dst, bytes.data() + offset, count * sizeof(double));
  for (std::size_t i = 0; i < count; ++i)
    if (std::isnan(dst[i])) fail(ErrorCode::Parse, path + ": NaN entry at position " + std::to_string(i));
}

void write_bytes(const std::string& path, const std::string& header, const double* data, std::size_t count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << header;
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

Eigen::MatrixXd parse_csv(const std::string& text, const std::string& path) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0, width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size(); ++k) numeric = numeric && parse_double(fields[k], row[k]);
    if (!numeric) {
      if (rows.empty() && width == 0) {
        width = fields.size();  // header row
        continue;
      }
      fail(ErrorCode::Parse, path + ": non-numeric value on line " + std::to_string(lineno));
    }
    for (double v : row)
      if (std::isnan(v)) fail(ErrorCode::Parse, path + ": NaN on line " + std::to_string(lineno));
    if (width == 0) width = row.size();
    if (row.size() != width)
      fail(ErrorCode::Parse, path + ": line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                                 " fields, expected " + std::to_string(width));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::Parse, path + ": no data rows");
  Eigen::MatrixXd M(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) M(i, j) = rows[i][j];
  return M;
}

}  // namespace

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::string bytes = read_all(path);
  if (bytes.rfind("NKE1", 0) == 0) {
    std::size_t off = 0;
    auto dims = parse_header(bytes, "NKE1", 2, off, path);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> M(dims[0], dims[1]);
    read_doubles(bytes, off, dims[0] * dims[1], M.data(), path);
    return M;
  }
  return parse_csv(bytes, path);
}

void write_csv(const std::string& path, const Eigen::MatrixXd& M) {
  std::string text;
  char buf[64];
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) text += ',';
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, M(i, j));
      text.append(buf, ptr);
    }
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

void write_binary(const std::string& path, const Eigen::MatrixXd& M) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R = M;
  write_bytes(path, "NKE1 " + std::to_string(M.rows()) + " " + std::to_string(M.cols()) + "\n", R.data(), R.size());
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& M) {
  if (static_cast<std::size_t>(M.size()) > kBinaryThreshold)
    write_binary(path, M);
  else
    write_csv(path, M);
}

ImageTensor read_image(const std::string& path) {
  std::string bytes = read_all(path);
  if (bytes.rfind("NKE-IMG", 0) == 0) {
    std::size_t off = 0;
    auto dims = parse_header(bytes, "NKE-IMG", 3, off, path);
    if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) fail(ErrorCode::Parse, path + ": empty image dimension");
    ImageTensor img(dims[0], dims[1], dims[2]);
    read_doubles(bytes, off, img.data.size(), img.data.data(), path);
    return img;
  }
  Eigen::MatrixXd M = parse_csv(bytes, path);
  ImageTensor img(M.rows(), M.cols(), 1);
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) img.at(i, j, 0) = M(i, j);
  return img;
}

void write_image(const std::string& path, const ImageTensor& img) {
  write_bytes(path,
              "NKE-IMG " + std::to_string(img.d1) + " " + std::to_string(img.d2) + " " + std::to_string(img.c) + "\n",
              img.data.data(), img.data.size());
}

}  // namespace nke
