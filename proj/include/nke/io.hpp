#pragma once

#include <Eigen/Dense>
#include <string>

#include "nke/cntk.hpp"

namespace nke {

inline constexpr std::size_t kBinaryThreshold = 1000000;

// CSV (optional header row) or NKE1 binary, detected from the first bytes.
Eigen::MatrixXd read_matrix(const std::string& path);
void write_csv(const std::string& path, const Eigen::MatrixXd& M);
void write_binary(const std::string& path, const Eigen::MatrixXd& M);
// Binary above kBinaryThreshold entries, CSV otherwise.
void write_matrix(const std::string& path, const Eigen::MatrixXd& M);

// NKE-IMG binary or single-channel CSV.
ImageTensor read_image(const std::string& path);
void write_image(const std::string& path, const ImageTensor& img);

}  // namespace nke
