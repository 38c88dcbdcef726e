#include "skf/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace skf {

namespace {

// Appends all exponent vectors of exact total degree `degree` in decreasing
// lexicographic order.
void append_degree(std::size_t n_vars, int degree, std::vector<Exponent>& out) {
  Exponent e(n_vars, 0);
  // Recursive fill: give variable i as much of the remaining degree as
  // possible first, which yields decreasing lexicographic order.
  auto fill = [&](auto&& self, std::size_t i, int remaining) -> void {
    if (i + 1 == n_vars) {
      e[i] = remaining;
      out.push_back(e);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[i] = k;
      self(self, i + 1, remaining - k);
    }
    e[i] = 0;
  };
  fill(fill, 0, degree);
}

int total_degree(const Exponent& e) { return std::accumulate(e.begin(), e.end(), 0); }

}  // namespace

MonomialLibrary MonomialLibrary::enumerate(std::size_t n_vars, int max_degree, bool include_constant) {
  if (n_vars == 0) throw std::invalid_argument("monomial library needs at least one variable");
  if (max_degree < 1) throw std::invalid_argument("monomial library needs max_degree >= 1");
  MonomialLibrary lib;
  lib.n_vars_ = n_vars;
  lib.max_degree_ = max_degree;
  lib.include_constant_ = include_constant;
  for (int d = include_constant ? 0 : 1; d <= max_degree; ++d) append_degree(n_vars, d, lib.exponents_);
  return lib;
}

MonomialLibrary MonomialLibrary::from_exponents(std::size_t n_vars, int max_degree, bool include_constant,
                                                std::vector<Exponent> exponents) {
  if (n_vars == 0) throw std::invalid_argument("monomial library needs at least one variable");
  if (max_degree < 1) throw std::invalid_argument("monomial library needs max_degree >= 1");
  std::set<Exponent> seen;
  for (const auto& e : exponents) {
    if (e.size() != n_vars) throw std::invalid_argument("exponent vector has wrong length");
    if (std::any_of(e.begin(), e.end(), [](int k) { return k < 0; }))
      throw std::invalid_argument("negative exponent");
    const int d = total_degree(e);
    if (d > max_degree) throw std::invalid_argument("exponent exceeds max_degree");
    if (d == 0 && !include_constant) throw std::invalid_argument("constant term present but not enabled");
    if (!seen.insert(e).second) throw std::invalid_argument("duplicate exponent vector");
  }
  MonomialLibrary lib;
  lib.n_vars_ = n_vars;
  lib.max_degree_ = max_degree;
  lib.include_constant_ = include_constant;
  lib.exponents_ = std::move(exponents);
  return lib;
}

std::optional<std::size_t> MonomialLibrary::index_of(const Exponent& e) const {
  auto it = std::find(exponents_.begin(), exponents_.end(), e);
  if (it == exponents_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - exponents_.begin());
}

std::string MonomialLibrary::term_name(std::size_t j, std::span<const std::string> names) const {
  const Exponent& e = exponents_.at(j);
  std::string out;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!out.empty()) out += '*';
    out += i < names.size() ? names[i] : "x" + std::to_string(i + 1);
    if (e[i] > 1) out += '^' + std::to_string(e[i]);
  }
  return out.empty() ? "1" : out;
}

MonomialLibrary enumerate_monomials(std::size_t n_vars, int max_degree, bool include_constant) {
  return MonomialLibrary::enumerate(n_vars, max_degree, include_constant);
}

RegressorRow build_row(std::span<const double> x, const MonomialLibrary& lib, long time_index) {
  if (x.size() != lib.n_vars()) throw std::invalid_argument("state length does not match library");
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite state value");
  }
  const auto n = lib.n_vars();
  const auto r = static_cast<std::size_t>(lib.max_degree());
  // powers[i * (r + 1) + k] = x_i^k
  std::vector<double> powers(n * (r + 1));
  for (std::size_t i = 0; i < n; ++i) {
    powers[i * (r + 1)] = 1.0;
    for (std::size_t k = 1; k <= r; ++k) powers[i * (r + 1) + k] = powers[i * (r + 1) + k - 1] * x[i];
  }
  RegressorRow row;
  row.time_index = time_index;
  row.values.resize(static_cast<Eigen::Index>(lib.size()));
  for (std::size_t j = 0; j < lib.size(); ++j) {
    double v = 1.0;
    const Exponent& e = lib[j];
    for (std::size_t i = 0; i < n; ++i) {
      if (e[i] != 0) v *= powers[i * (r + 1) + static_cast<std::size_t>(e[i])];
    }
    row.values(static_cast<Eigen::Index>(j)) = v;
  }
  return row;
}

double excitation_min_eigenvalue(std::span<const RegressorRow> rows) {
  if (rows.empty()) throw std::invalid_argument("excitation check needs at least one row");
  const Eigen::Index p = rows.front().values.size();
  Matrix gram = Matrix::Zero(p, p);
  for (const auto& row : rows) {
    if (row.values.size() != p) throw std::invalid_argument("inconsistent row lengths");
    gram.selfadjointView<Eigen::Lower>().rankUpdate(row.values);
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  gram /= static_cast<double>(rows.size());
  return min_eigenvalue(gram);
}

}  // namespace skf
