#pragma once

#include <filesystem>

#include <Eigen/Dense>

namespace bbp {

/// Binary dump of a symmetric matrix: 8-byte magic "BBPMAT01", uint64 N,
/// uint32 dtype (1 = float64), uint32 zero, then the upper triangle
/// (i <= j, row-major) as little-endian doubles.
void write_packed(const std::filesystem::path& path, const Eigen::MatrixXd& S);
Eigen::MatrixXd read_packed(const std::filesystem::path& path);

}  // namespace bbp
