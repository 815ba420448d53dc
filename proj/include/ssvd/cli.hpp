#pragma once

#include <iostream>
#include <ostream>

namespace ssvd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Command-line entry point. Subcommands: ingest, synth, decompose, shuffle,
/// worker, dispatch, eval, topics. Returns 0 on success, 1 on usage or
/// configuration errors and 2 on data, format or I/O errors.
int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace ssvd
