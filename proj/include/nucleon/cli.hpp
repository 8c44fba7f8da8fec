#pragma once

// Command-line front end shared by the nucleon executable and the tests.

#include <iosfwd>

namespace nucleon {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Commands: shoot, ground-state, portrait, linearize, wronskian, spectrum,
/// continue, energy, check-F. Diagnostics go to err as one JSON line.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nucleon
