#pragma once

#include <filesystem>
#include <string>

#include "ssvd/decomposition.hpp"

// Decomposition file: "SDEC" | u8 version=1 | u64 m | u64 r | r x f64 S |
// m*r x f64 U (column-major), little-endian. Run details live in a JSON
// sidecar written by write_metadata.
namespace ssvd {

void write_decomposition(const Decomposition& d, const std::filesystem::path& path);
/// Restores U and S; the run details are left default. Throws FormatError.
Decomposition read_decomposition(const std::filesystem::path& path);

/// JSON run metadata: config, algorithm, passes, observations, wall time,
/// peak tracked dense memory and rank deficiency.
std::string metadata_json(const Decomposition& d);
void write_metadata(const Decomposition& d, const std::filesystem::path& path);

}  // namespace ssvd
