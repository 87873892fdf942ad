#pragma once

/// @file expr.hpp
/// A small expression language over coordinates x1..xn for custom metric
/// and 1-form entries:
///   expr   := term (('+' | '-') term)*
///   term   := power (('*' | '/') power)*
///   power  := unary ('^' integer)?
///   unary  := '-' unary | atom
///   atom   := number | x<k> | sqrt '(' expr ')' | exp '(' expr ')' | '(' expr ')'
/// Expressions are evaluated on any scalar type, so custom fields are
/// differentiated like the built-in ones.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "finslerlab/errors.hpp"
#include "finslerlab/field.hpp"
#include "finslerlab/linalg.hpp"

namespace finslerlab {

class ParseError : public Error {
 public:
  using Error::Error;
};

class Expr {
 public:
  enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sqrt, Exp };

  static Expr parse(std::string_view text, int dim);

  template <class T>
  T eval(std::span<const T> x) const {
    return eval_node<T>(*root_, x);
  }

  /// Highest coordinate index used (1-based), 0 if none.
  int max_var() const { return max_var_; }

 private:
  struct Node {
    Op op = Op::Const;
    double value = 0.0;
    int index = 0;
    int power = 0;
    std::shared_ptr<const Node> lhs, rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  template <class T>
  static T eval_node(const Node& n, std::span<const T> x) {
    using std::exp;
    using std::sqrt;
    switch (n.op) {
      case Op::Const: return T(n.value);
      case Op::Var: return x[static_cast<std::size_t>(n.index)];
      case Op::Neg: return -eval_node<T>(*n.lhs, x);
      case Op::Add: return eval_node<T>(*n.lhs, x) + eval_node<T>(*n.rhs, x);
      case Op::Sub: return eval_node<T>(*n.lhs, x) - eval_node<T>(*n.rhs, x);
      case Op::Mul: return eval_node<T>(*n.lhs, x) * eval_node<T>(*n.rhs, x);
      case Op::Div: return eval_node<T>(*n.lhs, x) / eval_node<T>(*n.rhs, x);
      case Op::Pow: {
        const T b = eval_node<T>(*n.lhs, x);
        T r(1.0);
        for (int i = 0; i < std::abs(n.power); ++i) r = r * b;
        return n.power < 0 ? T(1.0) / r : r;
      }
      case Op::Sqrt: return sqrt(eval_node<T>(*n.lhs, x));
      case Op::Exp: return exp(eval_node<T>(*n.lhs, x));
    }
    return T(0.0);
  }

  class Parser;

  NodePtr root_;
  int max_var_ = 0;
};

class Expr::Parser {
 public:
  Parser(std::string_view s, int dim) : s_(s), dim_(dim) {}

  NodePtr parse_all() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

  int max_var = 0;

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "expression \"" << s_ << "\" at position " << pos_ << ": " << msg;
    throw ParseError(os.str());
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  static NodePtr make(Op op, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+'))
        n = make(Op::Add, n, term());
      else if (accept('-'))
        n = make(Op::Sub, n, term());
      else
        return n;
    }
  }

  NodePtr term() {
    NodePtr n = power();
    for (;;) {
      if (accept('*'))
        n = make(Op::Mul, n, power());
      else if (accept('/'))
        n = make(Op::Div, n, power());
      else
        return n;
    }
  }

  NodePtr power() {
    NodePtr base = unary();
    if (!accept('^')) return base;
    skip();
    bool neg = accept('-');
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("exponent must be an integer");
    auto n = std::make_shared<Node>();
    n->op = Op::Pow;
    n->lhs = std::move(base);
    n->power = std::stoi(std::string(s_.substr(start, pos_ - start))) * (neg ? -1 : 1);
    return n;
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return atom();
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr n = expr();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string word(s_.substr(start, pos_ - start));
      if (word == "sqrt" || word == "exp") {
        expect('(');
        NodePtr arg = expr();
        expect(')');
        return make(word == "sqrt" ? Op::Sqrt : Op::Exp, arg);
      }
      if (word.size() > 1 && word[0] == 'x' && word.find_first_not_of("0123456789", 1) == std::string::npos) {
        const int k = std::stoi(word.substr(1));
        if (k < 1 || k > dim_) {
          pos_ = start;
          fail("coordinate " + word + " out of range 1.." + std::to_string(dim_));
        }
        max_var = std::max(max_var, k);
        auto n = std::make_shared<Node>();
        n->op = Op::Var;
        n->index = k - 1;
        return n;
      }
      pos_ = start;
      fail("unknown name '" + word + "'");
    }
    fail(std::string("unexpected '") + c + "'");
  }

  NodePtr number() {
    const std::string rest(s_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("bad number");
    }
    pos_ += used;
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int dim_;
};

inline Expr Expr::parse(std::string_view text, int dim) {
  Parser p(text, dim);
  Expr e;
  e.root_ = p.parse_all();
  e.max_var_ = p.max_var;
  return e;
}

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

/// Metric from "a11,a12,...;a21,...;..." (rows separated by ';'). The grid
/// must be square; the lower triangle is copied from the upper one.
inline MetricField parse_metric(std::string_view text, double radius = 1.0) {
  const std::vector<std::string> rows = detail::split(text, ';');
  const int n = static_cast<int>(rows.size());
  std::vector<Expr> entries;
  for (const std::string& row : rows) {
    const std::vector<std::string> cells = detail::split(row, ',');
    if (static_cast<int>(cells.size()) != n) throw ParseError("metric rows must have " + std::to_string(n) + " entries");
    for (const std::string& c : cells) entries.push_back(Expr::parse(c, n));
  }
  return MetricField(n, radius, [entries, n](auto x) {
    using T = scalar_of<decltype(x)>;
    Mat<T> m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        m(i, j) = entries[static_cast<std::size_t>(i * n + j)].eval(x);
        m(j, i) = m(i, j);
      }
    return m;
  });
}

/// 1-form from "b1,b2,...,bn".
inline OneFormField parse_form(std::string_view text, int dim, double radius = 1.0) {
  const std::vector<std::string> cells = detail::split(text, ',');
  if (static_cast<int>(cells.size()) != dim) throw ParseError("1-form needs " + std::to_string(dim) + " entries");
  std::vector<Expr> entries;
  for (const std::string& c : cells) entries.push_back(Expr::parse(c, dim));
  return OneFormField(dim, radius, [entries](auto x) {
    using T = scalar_of<decltype(x)>;
    Vec<T> r(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) r[i] = entries[i].eval(x);
    return r;
  });
}

}  // namespace finslerlab
