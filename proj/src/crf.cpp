#include "bicf/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bicf {

double log_sum_exp(const double* values, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, values[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(values[i] - m);
  return m + std::log(s);
}

double crf_sequence_score(const Matrix& emissions, const Matrix& transitions,
                          const std::vector<std::size_t>& path) {
  const std::size_t labels = emissions.cols;
  double s = transitions(crf_bos(labels), path.front());
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += emissions(t, path[t]);
    if (t > 0) s += transitions(path[t - 1], path[t]);
  }
  return s + transitions(path.back(), crf_eos(labels));
}

namespace {

// alpha(t, l) = log-sum of all prefixes ending in l at t.
Matrix forward_scores(const Matrix& e, const Matrix& a) {
  const std::size_t T = e.rows, L = e.cols;
  Matrix alpha(T, L);
  for (std::size_t l = 0; l < L; ++l) alpha(0, l) = a(crf_bos(L), l) + e(0, l);
  std::vector<double> buf(L);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t k = 0; k < L; ++k) buf[k] = alpha(t - 1, k) + a(k, l);
      alpha(t, l) = log_sum_exp(buf.data(), L) + e(t, l);
    }
  }
  return alpha;
}

// beta(t, l) = log-sum of all suffixes after position t given label l.
Matrix backward_scores(const Matrix& e, const Matrix& a) {
  const std::size_t T = e.rows, L = e.cols;
  Matrix beta(T, L);
  for (std::size_t l = 0; l < L; ++l) beta(T - 1, l) = a(l, crf_eos(L));
  std::vector<double> buf(L);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t k = 0; k < L; ++k) buf[k] = a(l, k) + e(t + 1, k) + beta(t + 1, k);
      beta(t, l) = log_sum_exp(buf.data(), L);
    }
  }
  return beta;
}

double partition_from_alpha(const Matrix& alpha, const Matrix& a) {
  const std::size_t T = alpha.rows, L = alpha.cols;
  std::vector<double> buf(L);
  for (std::size_t l = 0; l < L; ++l) buf[l] = alpha(T - 1, l) + a(l, crf_eos(L));
  return log_sum_exp(buf.data(), L);
}

}  // namespace

double crf_log_partition(const Matrix& emissions, const Matrix& transitions) {
  return partition_from_alpha(forward_scores(emissions, transitions), transitions);
}

ViterbiResult crf_viterbi(const Matrix& e, const Matrix& a) {
  const std::size_t T = e.rows, L = e.cols;
  Matrix delta(T, L);
  std::vector<std::size_t> back(T * L, 0);
  for (std::size_t l = 0; l < L; ++l) delta(0, l) = a(crf_bos(L), l) + e(0, l);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      std::size_t best = 0;
      double best_score = delta(t - 1, 0) + a(0, l);
      for (std::size_t k = 1; k < L; ++k) {
        const double s = delta(t - 1, k) + a(k, l);
        if (s > best_score) {
          best_score = s;
          best = k;
        }
      }
      delta(t, l) = best_score + e(t, l);
      back[t * L + l] = best;
    }
  }
  ViterbiResult r;
  std::size_t last = 0;
  r.score = delta(T - 1, 0) + a(0, crf_eos(L));
  for (std::size_t l = 1; l < L; ++l) {
    const double s = delta(T - 1, l) + a(l, crf_eos(L));
    if (s > r.score) {
      r.score = s;
      last = l;
    }
  }
  r.path.assign(T, 0);
  r.path[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) r.path[t - 1] = back[t * L + r.path[t]];
  return r;
}

CrfMarginals crf_marginals(const Matrix& e, const Matrix& a) {
  const std::size_t T = e.rows, L = e.cols;
  const Matrix alpha = forward_scores(e, a);
  const Matrix beta = backward_scores(e, a);
  CrfMarginals m;
  m.log_partition = partition_from_alpha(alpha, a);
  const double z = m.log_partition;
  m.unary = Matrix(T, L);
  m.pairwise = Matrix(L + 2, L + 2);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      m.unary(t, l) = std::exp(alpha(t, l) + beta(t, l) - z);
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    m.pairwise(crf_bos(L), l) = m.unary(0, l);
    m.pairwise(l, crf_eos(L)) = m.unary(T - 1, l);
  }
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t k = 0; k < L; ++k) {
      for (std::size_t l = 0; l < L; ++l) {
        m.pairwise(k, l) +=
            std::exp(alpha(t - 1, k) + a(k, l) + e(t, l) + beta(t, l) - z);
      }
    }
  }
  return m;
}

}  // namespace bicf
