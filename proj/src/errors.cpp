#include "mather/errors.hpp"

namespace mather {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::twist_violation: return "TwistViolation";
    case Errc::periodicity_violation: return "PeriodicityViolation";
    case Errc::degenerate_shift: return "DegenerateShift";
    case Errc::grid_mismatch: return "GridMismatch";
    case Errc::not_monotone: return "NotMonotone";
    case Errc::step_rejected: return "StepRejected";
    case Errc::not_comparable: return "NotComparable";
    case Errc::degenerate_pair: return "DegeneratePair";
    case Errc::window_too_small: return "WindowTooSmall";
    case Errc::not_omega_birkhoff: return "NotOmegaBirkhoff";
    case Errc::parse_error: return "ParseError";
  }
  return "Unknown";
}

}  // namespace mather
