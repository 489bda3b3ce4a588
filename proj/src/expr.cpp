#include "stocon/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "stocon/error.hpp"

namespace stocon::dsl {
namespace detail {

enum class Kind { literal, var, time_var, neg, add, sub, mul, div, pow, call };
enum class Fn { fsqrt, fexp, fsin, fcos, ftanh, fabs };

struct Node {
  Kind kind;
  double value = 0.0;
  int index = 0;  // 1-based state index for Kind::var
  Fn fn = Fn::fsqrt;
  std::shared_ptr<const Node> a, b;
  std::size_t src_begin = 0;
};

namespace {

using NodePtr = std::shared_ptr<const Node>;

const char* fn_name(Fn f) {
  switch (f) {
    case Fn::fsqrt: return "sqrt";
    case Fn::fexp: return "exp";
    case Fn::fsin: return "sin";
    case Fn::fcos: return "cos";
    case Fn::ftanh: return "tanh";
    case Fn::fabs: return "abs";
  }
  return "?";
}

void print_node(const Node* n, std::string& out) {
  switch (n->kind) {
    case Kind::literal: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n->value);
      out += buf;
      return;
    }
    case Kind::var:
      out += 'x';
      out += std::to_string(n->index);
      return;
    case Kind::time_var:
      out += 't';
      return;
    case Kind::neg:
      out += "(-";
      print_node(n->a.get(), out);
      out += ')';
      return;
    case Kind::call:
      out += fn_name(n->fn);
      out += '(';
      print_node(n->a.get(), out);
      out += ')';
      return;
    default: {
      char op = '+';
      if (n->kind == Kind::sub) op = '-';
      if (n->kind == Kind::mul) op = '*';
      if (n->kind == Kind::div) op = '/';
      if (n->kind == Kind::pow) op = '^';
      out += '(';
      print_node(n->a.get(), out);
      out += op;
      print_node(n->b.get(), out);
      out += ')';
      return;
    }
  }
}

std::string print_node(const Node* n) {
  std::string s;
  print_node(n, s);
  return s;
}

[[noreturn]] void domain_error(const char* what, const Node* n) {
  throw EvalDomainError(std::string(what) + " in '" + print_node(n) + "'",
                        n->src_begin, print_node(n));
}

double check_finite(double v, const Node* n) {
  if (!std::isfinite(v)) domain_error("non-finite result", n);
  return v;
}

double eval_node(const Node* n, const double* state, double t) {
  switch (n->kind) {
    case Kind::literal:
      return n->value;
    case Kind::var:
      return state[n->index - 1];
    case Kind::time_var:
      return t;
    case Kind::neg:
      return -eval_node(n->a.get(), state, t);
    case Kind::add:
      return check_finite(
          eval_node(n->a.get(), state, t) + eval_node(n->b.get(), state, t), n);
    case Kind::sub:
      return check_finite(
          eval_node(n->a.get(), state, t) - eval_node(n->b.get(), state, t), n);
    case Kind::mul:
      return check_finite(
          eval_node(n->a.get(), state, t) * eval_node(n->b.get(), state, t), n);
    case Kind::div: {
      double num = eval_node(n->a.get(), state, t);
      double den = eval_node(n->b.get(), state, t);
      if (den == 0.0) domain_error("division by zero", n);
      return check_finite(num / den, n);
    }
    case Kind::pow: {
      double base = eval_node(n->a.get(), state, t);
      double expo = eval_node(n->b.get(), state, t);
      if (base < 0.0 && expo != std::rint(expo))
        domain_error("non-integer power of a negative base", n);
      return check_finite(std::pow(base, expo), n);
    }
    case Kind::call: {
      double arg = eval_node(n->a.get(), state, t);
      double v = 0.0;
      switch (n->fn) {
        case Fn::fsqrt:
          if (arg < 0.0) domain_error("square root of a negative value", n);
          v = std::sqrt(arg);
          break;
        case Fn::fexp: v = std::exp(arg); break;
        case Fn::fsin: v = std::sin(arg); break;
        case Fn::fcos: v = std::cos(arg); break;
        case Fn::ftanh: v = std::tanh(arg); break;
        case Fn::fabs: v = std::fabs(arg); break;
      }
      return check_finite(v, n);
    }
  }
  throw Error("corrupt expression node");
}

int max_index(const Node* n) {
  if (!n) return 0;
  int m = n->kind == Kind::var ? n->index : 0;
  if (n->a) m = std::max(m, max_index(n->a.get()));
  if (n->b) m = std::max(m, max_index(n->b.get()));
  return m;
}

// Recursive-descent parser. Precedence, loosest first: additive,
// multiplicative, unary minus, '^' (right-associative).
class Parser {
 public:
  Parser(std::string_view text, int n) : text_(text), n_(n) {}

  NodePtr run() {
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size())
      fail("expected '+', '-', '*', '/', '^', or end of input");
    return e;
  }

 private:
  std::string_view text_;
  int n_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& expected) {
    throw ParseError(expected + " at byte " + std::to_string(pos_), pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r'))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    NodePtr left = parse_product();
    for (;;) {
      if (eat('+')) {
        left = binary(Kind::add, left, parse_product());
      } else if (eat('-')) {
        left = binary(Kind::sub, left, parse_product());
      } else {
        return left;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr left = parse_unary();
    for (;;) {
      if (eat('*')) {
        left = binary(Kind::mul, left, parse_unary());
      } else if (eat('/')) {
        left = binary(Kind::div, left, parse_unary());
      } else {
        return left;
      }
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    std::size_t at = pos_;
    if (eat('-')) {
      auto node = std::make_shared<Node>();
      node->kind = Kind::neg;
      node->src_begin = at;
      node->a = parse_unary();
      return node;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (eat('^')) {
      // Right operand at unary level, so 2^-3 and 2^3^2 both parse.
      return binary(Kind::pow, base, parse_unary());
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size())
      fail("expected a number, a variable x1..xn, t, a function name, or '('");
    std::size_t at = pos_;
    char c = text_[pos_];

    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }

    if ((c >= '0' && c <= '9') || c == '.') {
      double value = 0.0;
      const char* begin = text_.data() + pos_;
      const char* end = text_.data() + text_.size();
      auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc() || ptr == begin) fail("expected a number");
      pos_ += static_cast<std::size_t>(ptr - begin);
      auto node = std::make_shared<Node>();
      node->kind = Kind::literal;
      node->value = value;
      node->src_begin = at;
      return node;
    }

    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_')
      return parse_ident();

    fail("expected a number, a variable x1..xn, t, a function name, or '('");
  }

  NodePtr parse_ident() {
    std::size_t at = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      bool word = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '_';
      if (!word) break;
      ++pos_;
    }
    std::string name(text_.substr(at, pos_ - at));

    if (name == "t") {
      auto node = std::make_shared<Node>();
      node->kind = Kind::time_var;
      node->src_begin = at;
      return node;
    }

    if (name.size() >= 2 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      int index = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (index < 1 || index > n_) {
        pos_ = at;
        fail("variable '" + name + "' out of range for dimension " +
             std::to_string(n_));
      }
      auto node = std::make_shared<Node>();
      node->kind = Kind::var;
      node->index = index;
      node->src_begin = at;
      return node;
    }

    static const struct { const char* name; Fn fn; } kFns[] = {
        {"sqrt", Fn::fsqrt}, {"exp", Fn::fexp},   {"sin", Fn::fsin},
        {"cos", Fn::fcos},   {"tanh", Fn::ftanh}, {"abs", Fn::fabs},
    };
    for (const auto& f : kFns) {
      if (name == f.name) {
        if (!eat('(')) fail("expected '(' after function '" + name + "'");
        NodePtr arg = parse_sum();
        if (!eat(')')) fail("expected ')'");
        auto node = std::make_shared<Node>();
        node->kind = Kind::call;
        node->fn = f.fn;
        node->a = arg;
        node->src_begin = at;
        return node;
      }
    }

    pos_ = at;
    fail("unknown identifier '" + name + "'");
  }

  NodePtr binary(Kind kind, NodePtr a, NodePtr b) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->a = std::move(a);
    node->b = std::move(b);
    node->src_begin = node->a->src_begin;
    return node;
  }
};

}  // namespace
}  // namespace detail

double Expr::eval(const std::vector<double>& state, double t) const {
  if (!root_) throw InvalidInput("eval of an empty expression");
  if (static_cast<int>(state.size()) < max_index_)
    throw InvalidInput("state has dimension " + std::to_string(state.size()) +
                       " but the expression references x" +
                       std::to_string(max_index_));
  return detail::eval_node(root_.get(), state.data(), t);
}

double Expr::eval(const linalg::Vec& state, double t) const {
  if (!root_) throw InvalidInput("eval of an empty expression");
  if (static_cast<int>(state.size()) < max_index_)
    throw InvalidInput("state has dimension " + std::to_string(state.size()) +
                       " but the expression references x" +
                       std::to_string(max_index_));
  return detail::eval_node(root_.get(), state.data(), t);
}

std::string Expr::print() const {
  if (!root_) return "";
  return detail::print_node(root_.get());
}

Expr parse(std::string_view text, int n) {
  if (n < 0) throw InvalidInput("negative dimension");
  detail::Parser p(text, n);
  Expr e;
  e.root_ = p.run();
  e.max_index_ = detail::max_index(e.root_.get());
  return e;
}

ExprMatrix::ExprMatrix(const std::vector<std::vector<std::string>>& rows, int n) {
  rows_ = rows.size();
  cols_ = rows.empty() ? 0 : rows[0].size();
  if (rows_ == 0 || cols_ == 0)
    throw InvalidInput("expression matrix must be non-empty");
  items_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_)
      throw InvalidInput("expression matrix rows have unequal lengths");
    for (const auto& s : row) items_.push_back(parse(s, n));
  }
}

linalg::Mat ExprMatrix::eval(const linalg::Vec& state, double t) const {
  linalg::Mat out(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c)
      out(r, c) = items_[r * cols_ + c].eval(state, t);
  return out;
}

}  // namespace stocon::dsl
