#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>

namespace symrfm {

/// Binary matrix dump: a two-line ASCII header
///   MDUMP1
///   <rows> <cols> f64 row-major little-endian
/// followed by rows*cols raw doubles. Bit-exact interchange format.
void write_matrix_dump(const std::filesystem::path& path, const Eigen::MatrixXd& M);
Eigen::MatrixXd read_matrix_dump(const std::filesystem::path& path);

/// Plain-text mirror, one row per line, comma separated, full precision.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& M);

/// 8-bit binary PGM (P5), values scaled linearly from [lo, hi] to [0, 255].
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& gray,
               double lo, double hi);

}  // namespace symrfm
