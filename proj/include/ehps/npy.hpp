#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ehps/errors.hpp"

namespace ehps {

enum class Dtype { f32, f64, i32, i64, u8, boolean };

inline std::size_t dtype_size(Dtype d) {
  switch (d) {
    case Dtype::f32: return 4;
    case Dtype::f64: return 8;
    case Dtype::i32: return 4;
    case Dtype::i64: return 8;
    case Dtype::u8: return 1;
    case Dtype::boolean: return 1;
  }
  return 0;
}

inline const char* dtype_descr(Dtype d) {
  switch (d) {
    case Dtype::f32: return "<f4";
    case Dtype::f64: return "<f8";
    case Dtype::i32: return "<i4";
    case Dtype::i64: return "<i8";
    case Dtype::u8: return "|u1";
    case Dtype::boolean: return "|b1";
  }
  return "?";
}

inline const char* dtype_name(Dtype d) {
  switch (d) {
    case Dtype::f32: return "f32";
    case Dtype::f64: return "f64";
    case Dtype::i32: return "i32";
    case Dtype::i64: return "i64";
    case Dtype::u8: return "u8";
    case Dtype::boolean: return "bool";
  }
  return "?";
}

// Row-major n-dimensional array with a small closed dtype set. Data is held
// in host byte order; the container I/O below converts to/from the
// little-endian on-disk layout explicitly, so files are portable regardless
// of host.
struct ArrayRecord {
  Dtype dtype = Dtype::f64;
  std::vector<std::uint64_t> shape;
  std::vector<unsigned char> data;

  std::uint64_t element_count() const {
    std::uint64_t n = 1;
    for (std::uint64_t d : shape) n *= d;
    return n;
  }

  void validate() const {
    require(data.size() == element_count() * dtype_size(dtype), errc::length_mismatch,
            "array byte length does not match shape");
  }

  bool same_shape(const std::vector<std::uint64_t>& s) const { return shape == s; }

  template <class T>
  T element(std::uint64_t i) const {
    T v;
    std::memcpy(&v, data.data() + i * sizeof(T), sizeof(T));
    return v;
  }

  // Lossless numeric view as doubles (f32/f64/i32/i64/u8/bool all fit).
  std::vector<double> to_doubles() const {
    validate();
    const std::uint64_t n = element_count();
    std::vector<double> out(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      switch (dtype) {
        case Dtype::f32: out[i] = element<float>(i); break;
        case Dtype::f64: out[i] = element<double>(i); break;
        case Dtype::i32: out[i] = element<std::int32_t>(i); break;
        case Dtype::i64: out[i] = static_cast<double>(element<std::int64_t>(i)); break;
        case Dtype::u8: out[i] = data[i]; break;
        case Dtype::boolean: out[i] = data[i] ? 1.0 : 0.0; break;
      }
    }
    return out;
  }

  static ArrayRecord from_doubles(const std::vector<std::uint64_t>& shape,
                                  const std::vector<double>& values) {
    ArrayRecord r;
    r.dtype = Dtype::f64;
    r.shape = shape;
    r.data.resize(values.size() * sizeof(double));
    std::memcpy(r.data.data(), values.data(), r.data.size());
    r.validate();
    return r;
  }

  static ArrayRecord from_floats(const std::vector<std::uint64_t>& shape,
                                 const std::vector<float>& values) {
    ArrayRecord r;
    r.dtype = Dtype::f32;
    r.shape = shape;
    r.data.resize(values.size() * sizeof(float));
    std::memcpy(r.data.data(), values.data(), r.data.size());
    r.validate();
    return r;
  }

  static ArrayRecord from_bytes(const std::vector<std::uint64_t>& shape,
                                const std::vector<unsigned char>& values) {
    ArrayRecord r;
    r.dtype = Dtype::u8;
    r.shape = shape;
    r.data = values;
    r.validate();
    return r;
  }

  static ArrayRecord from_string(const std::string& s) {
    std::vector<unsigned char> bytes(s.begin(), s.end());
    return from_bytes({static_cast<std::uint64_t>(bytes.size())}, bytes);
  }

  std::string as_string() const {
    require(dtype == Dtype::u8, errc::unsupported_dtype, "string view needs a u8 array");
    return std::string(data.begin(), data.end());
  }
};

namespace npy_detail {

inline constexpr unsigned char kMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};

inline bool decode_descr(const std::string& s, Dtype& out) {
  if (s == "<f4") out = Dtype::f32;
  else if (s == "<f8") out = Dtype::f64;
  else if (s == "<i4") out = Dtype::i32;
  else if (s == "<i8") out = Dtype::i64;
  else if (s == "|u1" || s == "<u1") out = Dtype::u8;
  else if (s == "|b1" || s == "<b1") out = Dtype::boolean;
  else return false;
  return true;
}

// Minimal parser for the header's Python mapping literal:
// {'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), }
struct HeaderFields {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::uint64_t> shape;
};

class HeaderParser {
 public:
  explicit HeaderParser(const std::string& text) : s_(text) {}

  HeaderFields parse() {
    HeaderFields f;
    bool saw_descr = false, saw_order = false, saw_shape = false;
    ws();
    expect('{');
    ws();
    while (peek() != '}') {
      const std::string key = string_lit();
      ws();
      expect(':');
      ws();
      if (key == "descr") {
        f.descr = string_lit();
        saw_descr = true;
      } else if (key == "fortran_order") {
        f.fortran_order = bool_lit();
        saw_order = true;
      } else if (key == "shape") {
        f.shape = shape_tuple();
        saw_shape = true;
      } else {
        fail(errc::bad_header, "npy header has unexpected key '" + key + "'");
      }
      ws();
      if (peek() == ',') {
        ++at_;
        ws();
      } else {
        break;
      }
    }
    expect('}');
    // Only padding may follow.
    while (at_ < s_.size()) {
      const char c = s_[at_++];
      require(c == ' ' || c == '\n' || c == '\t' || c == '\r', errc::bad_header,
              "npy header has trailing garbage");
    }
    require(saw_descr && saw_order && saw_shape, errc::bad_header,
            "npy header is missing a required key");
    return f;
  }

 private:
  void ws() {
    while (at_ < s_.size() && (s_[at_] == ' ' || s_[at_] == '\t' || s_[at_] == '\n')) ++at_;
  }
  char peek() {
    require(at_ < s_.size(), errc::bad_header, "npy header ended unexpectedly");
    return s_[at_];
  }
  void expect(char c) {
    require(peek() == c, errc::bad_header,
            std::string("npy header: expected '") + c + "'");
    ++at_;
  }
  std::string string_lit() {
    const char q = peek();
    require(q == '\'' || q == '"', errc::bad_header, "npy header: expected a string literal");
    ++at_;
    std::string out;
    while (peek() != q) out.push_back(s_[at_++]);
    ++at_;
    return out;
  }
  bool bool_lit() {
    if (s_.compare(at_, 4, "True") == 0) {
      at_ += 4;
      return true;
    }
    if (s_.compare(at_, 5, "False") == 0) {
      at_ += 5;
      return false;
    }
    fail(errc::bad_header, "npy header: expected True or False");
  }
  std::vector<std::uint64_t> shape_tuple() {
    expect('(');
    ws();
    std::vector<std::uint64_t> dims;
    while (peek() != ')') {
      require(peek() >= '0' && peek() <= '9', errc::bad_header,
              "npy header: shape entries must be non-negative integers");
      std::uint64_t v = 0;
      while (at_ < s_.size() && s_[at_] >= '0' && s_[at_] <= '9') {
        v = v * 10 + static_cast<std::uint64_t>(s_[at_++] - '0');
      }
      if (at_ < s_.size() && s_[at_] == 'L') ++at_;  // legacy long suffix
      dims.push_back(v);
      ws();
      if (peek() == ',') {
        ++at_;
        ws();
      } else {
        break;
      }
    }
    expect(')');
    return dims;
  }

  const std::string& s_;
  std::size_t at_ = 0;
};

// Element-wise little-endian <-> host conversion. No-ops into memcpy on
// little-endian hosts but keeps big-endian hosts correct.
inline void le_to_host(unsigned char* dst, const unsigned char* src, std::uint64_t count,
                       std::size_t width) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst, src, count * width);
  } else {
    for (std::uint64_t i = 0; i < count; ++i) {
      for (std::size_t b = 0; b < width; ++b) {
        dst[i * width + b] = src[i * width + (width - 1 - b)];
      }
    }
  }
}

}  // namespace npy_detail

// Parse one .npy (format version 1.0) byte buffer.
inline ArrayRecord read_npy(const unsigned char* bytes, std::size_t size) {
  using namespace npy_detail;
  require(size >= 6 && std::memcmp(bytes, kMagic, 6) == 0, errc::bad_magic,
          "not an npy file (bad magic)");
  require(size >= 8, errc::truncated_payload, "npy file ends inside the version field");
  const unsigned major = bytes[6];
  require(major == 1, errc::unsupported_version,
          "unsupported npy format version " + std::to_string(major));
  require(size >= 10, errc::truncated_payload, "npy file ends inside the header length");
  const std::size_t header_len = static_cast<std::size_t>(bytes[8]) |
                                 (static_cast<std::size_t>(bytes[9]) << 8);
  require(size >= 10 + header_len, errc::truncated_payload, "npy file ends inside the header");
  const std::string header(reinterpret_cast<const char*>(bytes) + 10, header_len);

  const HeaderFields f = HeaderParser(header).parse();
  ArrayRecord rec;
  require(decode_descr(f.descr, rec.dtype), errc::unsupported_dtype,
          "unsupported npy dtype '" + f.descr + "'");
  rec.shape = f.shape;
  // Fortran order only matters beyond one dimension.
  require(!f.fortran_order || f.shape.size() <= 1, errc::unsupported_layout,
          "fortran-ordered npy arrays are not supported");

  std::uint64_t count = 1;
  for (std::uint64_t d : rec.shape) {
    require(d == 0 || count <= ~0ull / d, errc::bad_header, "npy shape overflows");
    count *= d;
  }
  const std::uint64_t expected = count * dtype_size(rec.dtype);
  const std::size_t have = size - 10 - header_len;
  require(have >= expected, errc::truncated_payload, "npy payload is truncated");
  require(have == expected, errc::truncated_payload, "npy payload size does not match the header");
  rec.data.resize(expected);
  le_to_host(rec.data.data(), bytes + 10 + header_len, rec.element_count(),
             dtype_size(rec.dtype));
  return rec;
}

inline ArrayRecord read_npy(const std::vector<unsigned char>& bytes) {
  return read_npy(bytes.data(), bytes.size());
}

// Serialize as .npy v1.0: canonical numpy-style header, padded with spaces so
// the payload starts on a 64-byte boundary, terminated by a newline.
inline std::vector<unsigned char> write_npy(const ArrayRecord& rec) {
  using namespace npy_detail;
  rec.validate();
  std::string dict = "{'descr': '";
  dict += dtype_descr(rec.dtype);
  dict += "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < rec.shape.size(); ++i) {
    dict += std::to_string(rec.shape[i]);
    if (rec.shape.size() == 1) dict += ",";
    else if (i + 1 < rec.shape.size()) dict += ", ";
  }
  dict += "), }";
  std::size_t total = 6 + 2 + 2 + dict.size() + 1;  // + newline
  const std::size_t padded = (total + 63) / 64 * 64;
  dict.append(padded - total, ' ');
  dict.push_back('\n');
  require(dict.size() <= 0xFFFF, errc::invalid_argument, "npy header too large for version 1.0");

  std::vector<unsigned char> out;
  out.reserve(padded + rec.data.size());
  out.insert(out.end(), kMagic, kMagic + 6);
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<unsigned char>(dict.size() & 0xFF));
  out.push_back(static_cast<unsigned char>((dict.size() >> 8) & 0xFF));
  out.insert(out.end(), dict.begin(), dict.end());

  const std::size_t payload_at = out.size();
  out.resize(payload_at + rec.data.size());
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data() + payload_at, rec.data.data(), rec.data.size());
  } else {
    const std::size_t width = dtype_size(rec.dtype);
    for (std::uint64_t i = 0; i < rec.element_count(); ++i) {
      for (std::size_t b = 0; b < width; ++b) {
        out[payload_at + i * width + b] = rec.data[i * width + (width - 1 - b)];
      }
    }
  }
  return out;
}

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io(errc::file_open_failed, "cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) fail_io(errc::file_open_failed, "read failed for '" + path + "'");
  return bytes;
}

inline void write_file_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_io(errc::file_write_failed, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail_io(errc::file_write_failed, "write failed for '" + path + "'");
}

inline ArrayRecord load_npy(const std::string& path) { return read_npy(read_file_bytes(path)); }

inline void save_npy(const std::string& path, const ArrayRecord& rec) {
  write_file_bytes(path, write_npy(rec));
}

}  // namespace ehps
