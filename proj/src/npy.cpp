#include "l1prune/npy.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>
#include <vector>

namespace l1prune {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read and written as little-endian float64");

namespace {

constexpr std::string_view kMagic = "\x93NUMPY";
constexpr std::size_t kPreambleV1 = 10;  // magic + version + uint16 length
constexpr std::size_t kAlign = 64;

std::size_t parse_dim(std::string_view text, std::size_t offset) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("npy: bad shape entry '" + std::string(text) + "'", offset);
  }
  return value;
}

}  // namespace

std::string encode_npy(const MatrixD& m) {
  std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                     std::to_string(m.rows()) + ", " + std::to_string(m.cols()) + "), }";
  const std::size_t unpadded = kPreambleV1 + dict.size() + 1;
  const std::size_t padded = (unpadded + kAlign - 1) / kAlign * kAlign;
  dict.append(padded - unpadded, ' ');
  dict.push_back('\n');
  if (dict.size() > 0xFFFF) throw FormatError("npy: header too long for v1.0", 8);

  std::string out;
  out.reserve(padded + static_cast<std::size_t>(m.size()) * sizeof(double));
  out.append(kMagic);
  out.push_back('\x01');
  out.push_back('\x00');
  const auto len = static_cast<std::uint16_t>(dict.size());
  out.push_back(static_cast<char>(len & 0xFF));
  out.push_back(static_cast<char>(len >> 8));
  out.append(dict);
  const auto payload = static_cast<std::size_t>(m.size()) * sizeof(double);
  out.append(reinterpret_cast<const char*>(m.data()), payload);
  return out;
}

MatrixD decode_npy(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw FormatError("npy: missing magic string", 0);
  }
  if (bytes.size() < 8) throw FormatError("npy: truncated version field", bytes.size());
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t header_start = 0;
  if (major == 1) {
    if (bytes.size() < 10) throw FormatError("npy: truncated header length", bytes.size());
    header_len = static_cast<unsigned char>(bytes[8]) |
                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    header_start = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw FormatError("npy: truncated header length", bytes.size());
    for (int i = 3; i >= 0; --i) {
      header_len = (header_len << 8) | static_cast<unsigned char>(bytes[8 + i]);
    }
    header_start = 12;
  } else {
    throw FormatError("npy: unsupported format version " + std::to_string(major), 6);
  }
  if (bytes.size() < header_start + header_len) {
    throw FormatError("npy: header extends past end of data", bytes.size());
  }
  const std::string header(bytes.substr(header_start, header_len));

  static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
  static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
  std::smatch match;
  if (!std::regex_search(header, match, descr_re)) {
    throw FormatError("npy: header lacks 'descr'", header_start);
  }
  if (match[1] != "<f8") {
    throw FormatError("npy: dtype '" + match[1].str() + "' is not little-endian float64",
                      header_start + static_cast<std::size_t>(match.position(1)));
  }
  if (!std::regex_search(header, match, order_re)) {
    throw FormatError("npy: header lacks 'fortran_order'", header_start);
  }
  const bool fortran = match[1] == "True";
  if (!std::regex_search(header, match, shape_re)) {
    throw FormatError("npy: header lacks 'shape'", header_start);
  }
  const std::size_t shape_offset = header_start + static_cast<std::size_t>(match.position(1));
  std::vector<std::size_t> dims;
  std::string_view shape_text(header.data() + match.position(1),
                              static_cast<std::size_t>(match.length(1)));
  while (!shape_text.empty()) {
    const auto comma = shape_text.find(',');
    const auto part = shape_text.substr(0, comma);
    if (part.find_first_not_of(' ') != std::string_view::npos) {
      dims.push_back(parse_dim(part, shape_offset));
    }
    if (comma == std::string_view::npos) break;
    shape_text.remove_prefix(comma + 1);
  }
  if (dims.size() != 2) {
    throw ShapeError("npy: expected a 2-D array, got " + std::to_string(dims.size()) +
                     " dimensions");
  }
  if (dims[0] == 0 || dims[1] == 0) {
    throw ShapeError("npy: array has an empty dimension (" + std::to_string(dims[0]) + "x" +
                     std::to_string(dims[1]) + ")");
  }

  const std::size_t data_start = header_start + header_len;
  const std::size_t expected = dims[0] * dims[1] * sizeof(double);
  if (bytes.size() - data_start != expected) {
    throw FormatError("npy: payload holds " + std::to_string(bytes.size() - data_start) +
                          " bytes, expected " + std::to_string(expected),
                      bytes.size() < data_start + expected ? bytes.size() : data_start + expected);
  }
  const auto rows = static_cast<Eigen::Index>(dims[0]);
  const auto cols = static_cast<Eigen::Index>(dims[1]);
  MatrixD out(rows, cols);
  if (fortran) {
    Eigen::MatrixXd col_major(rows, cols);
    std::memcpy(col_major.data(), bytes.data() + data_start, expected);
    out = col_major;
  } else {
    std::memcpy(out.data(), bytes.data() + data_start, expected);
  }
  if (!out.allFinite()) throw ParameterError("npy: array contains non-finite values");
  return out;
}

MatrixD load_array(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_npy(bytes);
  } catch (const FormatError& err) {
    throw FormatError(path.string() + ": " + err.detail(), err.offset());
  }
}

void save_array(const std::filesystem::path& path, const MatrixD& m) {
  require_valid(m, "save_array");
  const std::string bytes = encode_npy(m);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace l1prune
