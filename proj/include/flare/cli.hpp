#pragma once

#include <ostream>

namespace flare {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;       // validation or domain error
inline constexpr int kExitEnvironment = 2;  // IO or service error

/// Entry point of the `flare` tool: ingest, restore, augment, synth, mix, report, export, verify.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flare
