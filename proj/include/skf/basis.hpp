#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skf/linalg.hpp"

namespace skf {

/// Exponent vector of one monomial: entry i is the power of input signal i.
using Exponent = std::vector<int>;

/// Ordered set of candidate monomials; its size is the number of columns of
/// the regression matrix.
///
/// Ordering is graded lexicographic: by total degree first, then within a
/// degree in decreasing lexicographic order of the exponent vector, so that
/// for two signals the order is x1, x2, x1^2, x1*x2, x2^2.
class MonomialLibrary {
 public:
  MonomialLibrary() = default;

  /// All monomials of total degree <= max_degree (degree 0 only when
  /// include_constant). Throws std::invalid_argument on n_vars == 0 or
  /// max_degree == 0.
  static MonomialLibrary enumerate(std::size_t n_vars, int max_degree, bool include_constant = false);

  /// Rebuilds a library from an explicit exponent list, validating it.
  static MonomialLibrary from_exponents(std::size_t n_vars, int max_degree, bool include_constant,
                                        std::vector<Exponent> exponents);

  std::size_t n_vars() const { return n_vars_; }
  int max_degree() const { return max_degree_; }
  bool include_constant() const { return include_constant_; }
  std::size_t size() const { return exponents_.size(); }
  const std::vector<Exponent>& exponents() const { return exponents_; }
  const Exponent& operator[](std::size_t j) const { return exponents_[j]; }

  std::optional<std::size_t> index_of(const Exponent& e) const;

  /// Human readable term such as "x1^2*x3"; names default to x1..xn.
  std::string term_name(std::size_t j, std::span<const std::string> names = {}) const;

  friend bool operator==(const MonomialLibrary&, const MonomialLibrary&) = default;

 private:
  std::size_t n_vars_ = 0;
  int max_degree_ = 0;
  bool include_constant_ = false;
  std::vector<Exponent> exponents_;
};

/// Free-function form of MonomialLibrary::enumerate.
MonomialLibrary enumerate_monomials(std::size_t n_vars, int max_degree, bool include_constant = false);

/// One row of the regression matrix: the library evaluated at one sample.
struct RegressorRow {
  Vector values;
  long time_index = 0;
};

/// Evaluates every monomial of lib at x. Throws std::invalid_argument on a
/// length mismatch or non-finite input.
RegressorRow build_row(std::span<const double> x, const MonomialLibrary& lib, long time_index = 0);

/// Minimum eigenvalue of (1/t) * sum_k row_k^T row_k. A strictly positive
/// value certifies persistent excitation of the rows seen so far.
double excitation_min_eigenvalue(std::span<const RegressorRow> rows);

}  // namespace skf
