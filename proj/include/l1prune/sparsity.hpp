#pragma once

// Target sparsity patterns and the rounding operator that enforces them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "l1prune/errors.hpp"
#include "l1prune/linalg.hpp"

namespace l1prune {

/// A fraction `rate` of all entries of the matrix is zero.
struct Unstructured {
  double rate = 0.5;
  bool operator==(const Unstructured&) const = default;
};

/// In every contiguous group of m entries along a row, n entries are zero.
struct SemiStructured {
  std::size_t n = 2;
  std::size_t m = 4;
  bool operator==(const SemiStructured&) const = default;
};

using SparsityPattern = std::variant<Unstructured, SemiStructured>;

void validate(const SparsityPattern& pattern);

/// Parses "unstructured:<rate>" or "semi:<n>:<m>".
SparsityPattern parse_pattern(std::string_view text);
std::string to_string(const SparsityPattern& pattern);

/// Number of zeros required by an unstructured rate over `size` entries.
/// Uses floor; a 1e-9 guard absorbs representation error such as 0.29 * 100.
inline std::size_t unstructured_zero_count(double rate, std::size_t size) {
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(size) + 1e-9));
}

namespace detail {

inline void check_applicable(const SparsityPattern& pattern, Eigen::Index cols) {
  validate(pattern);
  if (const auto* semi = std::get_if<SemiStructured>(&pattern)) {
    if (cols % static_cast<Eigen::Index>(semi->m) != 0) {
      throw ShapeError("pattern " + to_string(pattern) + ": column count " +
                       std::to_string(cols) + " is not divisible by " + std::to_string(semi->m));
    }
  }
}

}  // namespace detail

/// Zeroes the lowest-scoring entries of `w` within each comparison group of
/// `pattern` (the whole matrix for Unstructured, each m-group of a row for
/// SemiStructured). Ties are broken by row-major index, lower index first.
/// Entries that survive are copied bit-for-bit.
template <typename DW, typename DS>
PlainOf<DW> prune_by_score(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DS>& scores,
                           const SparsityPattern& pattern) {
  require_same_shape(w, scores, "prune_by_score");
  detail::check_applicable(pattern, w.cols());
  using Scalar = typename DW::Scalar;
  PlainOf<DW> out = w;
  const Eigen::Index cols = w.cols();
  auto key_less = [&](Eigen::Index a, Eigen::Index b) {
    const auto sa = scores(a / cols, a % cols);
    const auto sb = scores(b / cols, b % cols);
    return sa < sb || (sa == sb && a < b);
  };

  if (const auto* un = std::get_if<Unstructured>(&pattern)) {
    const auto total = static_cast<std::size_t>(w.size());
    const std::size_t k = unstructured_zero_count(un->rate, total);
    if (k == 0) return out;
    std::vector<Eigen::Index> idx(total);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(),
                     key_less);
    for (std::size_t i = 0; i < k; ++i) out(idx[i] / cols, idx[i] % cols) = Scalar(0);
    return out;
  }

  const auto& semi = std::get<SemiStructured>(pattern);
  const auto m = static_cast<Eigen::Index>(semi.m);
  std::vector<Eigen::Index> group(semi.m);
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c0 = 0; c0 < cols; c0 += m) {
      std::iota(group.begin(), group.end(), r * cols + c0);
      std::sort(group.begin(), group.end(), key_less);
      for (std::size_t i = 0; i < semi.n; ++i) out(r, group[i] % cols) = Scalar(0);
    }
  }
  return out;
}

/// Zeroes the smallest-magnitude entries so that `w` meets `pattern` exactly.
template <typename Derived>
PlainOf<Derived> round_to_pattern(const Eigen::MatrixBase<Derived>& w,
                                  const SparsityPattern& pattern) {
  return prune_by_score(w, w.cwiseAbs(), pattern);
}

/// Fraction of entries that are exactly zero.
template <typename Derived>
double sparsity_of(const Eigen::MatrixBase<Derived>& w) {
  if (w.size() == 0) return 0.0;
  const auto zeros = (w.array() == typename Derived::Scalar(0)).count();
  return static_cast<double>(zeros) / static_cast<double>(w.size());
}

template <typename Derived>
bool satisfies_pattern(const Eigen::MatrixBase<Derived>& w, const SparsityPattern& pattern) {
  detail::check_applicable(pattern, w.cols());
  using Scalar = typename Derived::Scalar;
  if (const auto* un = std::get_if<Unstructured>(&pattern)) {
    const auto zeros = static_cast<std::size_t>((w.array() == Scalar(0)).count());
    return zeros >= unstructured_zero_count(un->rate, static_cast<std::size_t>(w.size()));
  }
  const auto& semi = std::get<SemiStructured>(pattern);
  const auto m = static_cast<Eigen::Index>(semi.m);
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c0 = 0; c0 < w.cols(); c0 += m) {
      const auto zeros =
          static_cast<std::size_t>((w.row(r).segment(c0, m).array() == Scalar(0)).count());
      if (zeros < semi.n) return false;
    }
  }
  return true;
}

}  // namespace l1prune
