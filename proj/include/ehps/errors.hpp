#pragma once

#include <stdexcept>
#include <string>

namespace ehps {

// Machine-readable failure codes. Tests and callers branch on these, never on
// message text.
enum class errc {
  // validation
  invalid_argument,
  dimension_mismatch,
  degenerate_input,
  out_of_range,
  divergence,
  // container / schema parsing
  bad_magic,
  unsupported_version,
  unsupported_dtype,
  unsupported_layout,
  bad_header,
  truncated_payload,
  zip_corrupt,
  duplicate_member,
  missing_key,
  length_mismatch,
  unknown_parameter_space,
  bad_reference,
  bad_value,
  // filesystem
  file_open_failed,
  file_write_failed,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_argument: return "invalid_argument";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::degenerate_input: return "degenerate_input";
    case errc::out_of_range: return "out_of_range";
    case errc::divergence: return "divergence";
    case errc::bad_magic: return "bad_magic";
    case errc::unsupported_version: return "unsupported_version";
    case errc::unsupported_dtype: return "unsupported_dtype";
    case errc::unsupported_layout: return "unsupported_layout";
    case errc::bad_header: return "bad_header";
    case errc::truncated_payload: return "truncated_payload";
    case errc::zip_corrupt: return "zip_corrupt";
    case errc::duplicate_member: return "duplicate_member";
    case errc::missing_key: return "missing_key";
    case errc::length_mismatch: return "length_mismatch";
    case errc::unknown_parameter_space: return "unknown_parameter_space";
    case errc::bad_reference: return "bad_reference";
    case errc::bad_value: return "bad_value";
    case errc::file_open_failed: return "file_open_failed";
    case errc::file_write_failed: return "file_write_failed";
  }
  return "unknown";
}

// Two thrown categories; the CLI maps ValidationError -> exit 2 and
// IoError -> exit 3. Content problems (bad bytes, schema violations, bad
// arguments) are validation; OS-level file access problems are I/O.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] inline void fail(errc c, const std::string& msg) { throw ValidationError(c, msg); }
[[noreturn]] inline void fail_io(errc c, const std::string& msg) { throw IoError(c, msg); }

inline void require(bool ok, errc c, const std::string& msg) {
  if (!ok) fail(c, msg);
}

}  // namespace ehps
