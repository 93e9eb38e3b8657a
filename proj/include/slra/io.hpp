#pragma once

#include <string>
#include <vector>

#include "slra/dense_matrix.hpp"
#include "slra/factor.hpp"

namespace slra {

// Entrywise additive update A[row,col] += delta; the streaming unit of input.
struct StreamUpdate {
  int row = 0;
  int col = 0;
  double delta = 0.0;
};

// Text matrix format: first line "n d", then n lines of d decimals.
void write_matrix_text(const DenseMatrix& a, const std::string& path);
DenseMatrix read_matrix_text(const std::string& path);

// Binary container: magic "SLRA", u32 version, u64 rows, u64 cols, f64 payload
// (little-endian).
void write_matrix_binary(const DenseMatrix& a, const std::string& path);
DenseMatrix read_matrix_binary(const std::string& path);

// Factor format: first line "k s n d", then per component a tau line and one
// idx:val line each for x and y.
void write_factor(const SparseRankKFactor& f, int n, int d, const std::string& path);
SparseRankKFactor read_factor(const std::string& path, int* n_out = nullptr, int* d_out = nullptr);

// Stream format: lines "i j delta" (0-indexed); '#'-prefixed comments ignored.
void write_stream(const std::vector<StreamUpdate>& updates, const std::string& path);
std::vector<StreamUpdate> read_stream(const std::string& path);

std::vector<StreamUpdate> matrix_to_stream(const DenseMatrix& a);

}  // namespace slra
