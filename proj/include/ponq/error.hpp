#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ponq {

/// Failure categories. The CLI maps each one to its own exit code.
enum class ErrorCode {
  kInvalidInput = 1,
  kDegenerateQuadric,
  kDegenerateSimplex,
  kEmptySurface,
  kNoBoundary,
  kDivergence,
  kEmptyInterior,
  kEmptyMesh,
  kParse,
  kIo,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid_input";
    case ErrorCode::kDegenerateQuadric: return "degenerate_quadric";
    case ErrorCode::kDegenerateSimplex: return "degenerate_simplex";
    case ErrorCode::kEmptySurface: return "empty_surface";
    case ErrorCode::kNoBoundary: return "no_boundary";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kEmptyInterior: return "empty_interior";
    case ErrorCode::kEmptyMesh: return "empty_mesh";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace ponq
