#pragma once

// Reference computations for the test suites. Deliberately naive and written
// without the library's routines so they can check them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "l1prune/linalg.hpp"

namespace l1prune::oracle {

inline MatrixD random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                             double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  MatrixD m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

inline MatrixD triple_loop_matmul(const MatrixD& a, const MatrixD& b) {
  MatrixD out = MatrixD::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

inline double direct_frobenius(const MatrixD& a) {
  double s = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
  return std::sqrt(s);
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
inline double jacobi_max_eigenvalue(MatrixD a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  double best = a(0, 0);
  for (Eigen::Index i = 1; i < n; ++i) best = std::max(best, a(i, i));
  return best;
}

inline double scalar_soft_threshold(double x, double rho) {
  return std::copysign(std::max(std::abs(x) - rho, 0.0), x);
}

/// Zero set chosen by sorting each group by (score, index).
inline std::vector<bool> group_sort_mask(const MatrixD& scores, std::size_t n, std::size_t m) {
  std::vector<bool> zero(static_cast<std::size_t>(scores.size()), false);
  const auto cols = scores.cols();
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    for (Eigen::Index c0 = 0; c0 < cols; c0 += static_cast<Eigen::Index>(m)) {
      std::vector<std::pair<double, Eigen::Index>> entries;
      for (Eigen::Index c = c0; c < c0 + static_cast<Eigen::Index>(m); ++c) {
        entries.emplace_back(scores(r, c), r * cols + c);
      }
      std::sort(entries.begin(), entries.end());
      for (std::size_t i = 0; i < n; ++i) zero[static_cast<std::size_t>(entries[i].second)] = true;
    }
  }
  return zero;
}

/// Zero set of the k globally smallest scores, ties by index.
inline std::vector<bool> global_sort_mask(const MatrixD& scores, std::size_t k) {
  std::vector<std::pair<double, Eigen::Index>> entries;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    entries.emplace_back(scores(i / scores.cols(), i % scores.cols()), i);
  }
  std::sort(entries.begin(), entries.end());
  std::vector<bool> zero(entries.size(), false);
  for (std::size_t i = 0; i < k; ++i) zero[static_cast<std::size_t>(entries[i].second)] = true;
  return zero;
}

/// Best achievable ||W* X - W X||_F over all zero masks with `zeros` entries
/// in a single-row W, refitting the survivors by least squares.
inline double best_mask_error(const MatrixD& w, const MatrixD& x, std::size_t zeros) {
  const auto n = static_cast<std::size_t>(w.cols());
  const MatrixD target = w * x;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != n - zeros) continue;
    std::vector<Eigen::Index> keep;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (1u << j)) keep.push_back(static_cast<Eigen::Index>(j));
    }
    Eigen::MatrixXd xs(keep.size(), x.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) xs.row(static_cast<Eigen::Index>(i)) = x.row(keep[i]);
    // Survivors solve min ||v xs - target||: v = target xs^T (xs xs^T)^-1.
    const Eigen::MatrixXd gram = xs * xs.transpose();
    const Eigen::MatrixXd rhs = xs * target.transpose();
    const Eigen::VectorXd v = gram.ldlt().solve(rhs);
    const double err = (v.transpose() * xs - Eigen::MatrixXd(target)).norm();
    best = std::min(best, err);
  }
  return best;
}

}  // namespace l1prune::oracle
