#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "stocon/linalg.hpp"

namespace stocon::dsl {

namespace detail {
struct Node;
}

// Immutable arithmetic expression over state variables x1..xn and time t.
// Grammar (loosest to tightest): + -, * /, unary -, ^ (right-assoc).
// Functions: sqrt, exp, sin, cos, tanh, abs.
class Expr {
 public:
  Expr() = default;

  // Evaluates with x1..xn bound to state[0..n). Throws InvalidInput if the
  // state is shorter than the largest referenced index, EvalDomainError on
  // sqrt of a negative, division by zero, a non-integer power of a negative
  // base, or any non-finite intermediate result.
  double eval(const std::vector<double>& state, double t) const;
  double eval(const linalg::Vec& state, double t) const;

  // Fully parenthesized source form; reparsing yields an expression with
  // the identical operation sequence.
  std::string print() const;

  // Largest state index referenced (1-based), 0 for constant expressions.
  int max_var_index() const { return max_index_; }

  bool valid() const { return root_ != nullptr; }

 private:
  friend Expr parse(std::string_view, int);
  std::shared_ptr<const detail::Node> root_;
  int max_index_ = 0;
};

// Parses text against a system of dimension n. Throws ParseError (with the
// byte offset of the failure) on syntax errors, unknown identifiers, and
// variable indices exceeding n.
Expr parse(std::string_view text, int n);

// Rectangular grid of expressions, evaluated into a dense matrix.
class ExprMatrix {
 public:
  ExprMatrix() = default;
  // rows of expression strings, all parsed against dimension n.
  ExprMatrix(const std::vector<std::vector<std::string>>& rows, int n);

  linalg::Mat eval(const linalg::Vec& state, double t) const;
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const Expr& at(std::size_t r, std::size_t c) const {
    return items_[r * cols_ + c];
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Expr> items_;
};

}  // namespace stocon::dsl
