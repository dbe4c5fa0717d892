#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gocor {

/// Shapes that do not agree (H, W, D, radius or channel counts).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs that are shaped correctly but carry invalid values (NaN/Inf,
/// negative radius, out-of-range parameters).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed binary or text input. `offset()` is the byte position at which
/// parsing failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Kernel execution policy. Every kernel has a serial path and an OpenMP
/// path over independent outputs; both produce bitwise-identical results.
enum class Exec { Serial, Parallel };

/// Number of OpenMP threads available to Exec::Parallel (1 without OpenMP).
int max_threads();

}  // namespace gocor
