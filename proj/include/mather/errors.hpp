#pragma once

#include <stdexcept>
#include <string>

namespace mather {

enum class Errc {
  invalid_argument,
  twist_violation,
  periodicity_violation,
  degenerate_shift,
  grid_mismatch,
  not_monotone,
  step_rejected,
  not_comparable,
  degenerate_pair,
  window_too_small,
  not_omega_birkhoff,
  parse_error,
};

const char* to_string(Errc code) noexcept;

/// Exception carrying one of the library error kinds.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mather
