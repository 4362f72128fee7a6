#pragma once

#include <cstddef>
#include <vector>

namespace bicf {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double* row(std::size_t r) { return data.data() + r * cols; }
};

// Linear-chain CRF over L labels. Emissions are T x L; transitions are
// (L+2) x (L+2) with row/column L = BOS and L+1 = EOS, so
//   score(y) = A[BOS][y0] + sum_t E[t][yt] + sum_t A[y(t-1)][yt] + A[y(T-1)][EOS].
inline std::size_t crf_bos(std::size_t labels) { return labels; }
inline std::size_t crf_eos(std::size_t labels) { return labels + 1; }

double log_sum_exp(const double* values, std::size_t n);

double crf_sequence_score(const Matrix& emissions, const Matrix& transitions,
                          const std::vector<std::size_t>& path);

double crf_log_partition(const Matrix& emissions, const Matrix& transitions);

struct ViterbiResult {
  std::vector<std::size_t> path;
  double score = 0.0;
};

// Ties resolve toward the lower label index at every step.
ViterbiResult crf_viterbi(const Matrix& emissions, const Matrix& transitions);

struct CrfMarginals {
  double log_partition = 0.0;
  Matrix unary;     // T x L, P(y_t = l)
  Matrix pairwise;  // (L+2) x (L+2), expected transition counts incl. BOS/EOS
};

CrfMarginals crf_marginals(const Matrix& emissions, const Matrix& transitions);

}  // namespace bicf
