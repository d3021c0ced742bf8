#pragma once

#include <string>

#include <Eigen/Dense>

#include "cilfit/kvfile.hpp"
#include "cilfit/simulate.hpp"

namespace cilfit {

// Binary pattern file: 16-byte header (magic "PAT1", u32 side, u32 reserved,
// both little-endian), then side*side little-endian float64 values in row-major
// order. patch_len is not part of the binary payload; it travels in the
// key=value sidecar (write_pattern_sidecar) or is supplied by the caller.
void write_pattern(const std::string& path, const Pattern& pattern);
Pattern read_pattern(const std::string& path, double patch_len);

// Reads "<path>.meta" (written by write_pattern_sidecar) for patch_len.
Pattern read_pattern_auto(const std::string& path);

// Key=value sidecar "<pattern path>.meta" recording simulation metadata.
void write_pattern_sidecar(const std::string& pattern_path, const SimOutcome& outcome,
                           std::uint64_t seed);
// Minimal sidecar for patterns that do not come from a simulation.
void write_pattern_sidecar(const std::string& pattern_path, double patch_len);

// CSV, row-major, one grid row per line.
void write_pattern_csv(const std::string& path, const Pattern& pattern);

// Generic matrix CSV (diagnostics: distance matrices, feature vectors, ...).
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

}  // namespace cilfit
