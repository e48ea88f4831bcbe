#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "schurode/matrix.hpp"
#include "schurode/oracles.hpp"

namespace schurode {

/// Plain-text container for real matrices:
///   schurode-matrix 1
///   <rows> <cols>
///   <cols entries per row, space-separated, shortest exact decimals>
/// Round trips are bit-exact. Writing a matrix with nonzero imaginary parts
/// is an error.
void write_matrix(std::ostream& os, const Matrix& m);
void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(std::istream& is);
Matrix read_matrix(const std::filesystem::path& path);

void write_vector(const std::filesystem::path& path, std::span<const double> v);
std::vector<double> read_vector(const std::filesystem::path& path);

/// CSV with header "x,y_1..,ref_1..,err_1.." and 17-significant-digit values.
void write_trajectory_csv(std::ostream& os, const Trajectory& t);
std::string trajectory_csv(const Trajectory& t);

/// 17-significant-digit decimal (round-trip exact for doubles).
std::string format_full(double v);

/// FNV-1a 64-bit hash, hex-encoded; used for cache keys.
std::string content_hash(std::string_view text);

/// Atomic write: temp file in the same directory, then rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace schurode
