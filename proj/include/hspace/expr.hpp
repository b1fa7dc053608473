#pragma once

// Expression language for the free functions of a metric family: real literals,
// the coordinates x1..x6, + - * / ^, unary minus and a handful of elementary
// functions. Evaluates to double or to Dual6 (value plus exact first partials).

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>
#include <type_traits>

#include "hspace/coords.hpp"
#include "hspace/dual.hpp"
#include "hspace/error.hpp"

namespace hspace {

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh };

inline constexpr std::string_view func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Sinh: return "sinh";
    case Func::Cosh: return "cosh";
    case Func::Tanh: return "tanh";
  }
  return "?";
}

inline bool func_from_name(std::string_view s, Func& out) {
  for (Func f : {Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Log, Func::Sqrt, Func::Sinh,
                 Func::Cosh, Func::Tanh}) {
    if (func_name(f) == s) {
      out = f;
      return true;
    }
  }
  return false;
}

/// Immutable expression tree. Copies share nodes.
class ExprAst {
 public:
  enum class Kind { Literal, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };

  struct Node {
    Kind kind;
    double value = 0.0;  // Literal
    int var = 0;         // Variable, 0-based
    Func func = Func::Sin;
    std::shared_ptr<const Node> lhs, rhs;  // rhs unused for Neg/Call
  };
  using NodePtr = std::shared_ptr<const Node>;

  ExprAst() : root_(literal_node(0.0)) {}
  explicit ExprAst(NodePtr root) : root_(std::move(root)) {}

  static ExprAst literal(double v) { return ExprAst(literal_node(v)); }
  static ExprAst variable(int index) {
    return ExprAst(std::make_shared<const Node>(Node{Kind::Variable, 0.0, index, Func::Sin, {}, {}}));
  }
  static ExprAst unary(Kind k, const ExprAst& a) {
    return ExprAst(std::make_shared<const Node>(Node{k, 0.0, 0, Func::Sin, a.root_, {}}));
  }
  static ExprAst binary(Kind k, const ExprAst& a, const ExprAst& b) {
    return ExprAst(std::make_shared<const Node>(Node{k, 0.0, 0, Func::Sin, a.root_, b.root_}));
  }
  static ExprAst call(Func f, const ExprAst& a) {
    return ExprAst(std::make_shared<const Node>(Node{Kind::Call, 0.0, 0, f, a.root_, {}}));
  }

  static ExprAst parse(std::string_view text);

  const Node& root() const { return *root_; }

  /// Bit i set when x^(i+1) occurs.
  unsigned variable_mask() const { return mask_of(*root_); }
  bool is_constant() const { return variable_mask() == 0; }

  /// Minimal-parenthesis rendering that parses back to the same tree.
  std::string to_string() const {
    std::string out;
    print(*root_, out);
    return out;
  }

  double eval(const Point& p) const { return evaluate<double>(*root_, p); }
  Dual6 eval_dual(const Point& p) const { return evaluate<Dual6>(*root_, p); }

  friend bool operator==(const ExprAst& a, const ExprAst& b) { return same(*a.root_, *b.root_); }

 private:
  NodePtr root_;

  static NodePtr literal_node(double v) {
    return std::make_shared<const Node>(Node{Kind::Literal, v, 0, Func::Sin, {}, {}});
  }

  static unsigned mask_of(const Node& n) {
    switch (n.kind) {
      case Kind::Literal: return 0;
      case Kind::Variable: return 1u << n.var;
      case Kind::Neg:
      case Kind::Call: return mask_of(*n.lhs);
      default: return mask_of(*n.lhs) | mask_of(*n.rhs);
    }
  }

  static bool same(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Literal: return a.value == b.value;
      case Kind::Variable: return a.var == b.var;
      case Kind::Neg: return same(*a.lhs, *b.lhs);
      case Kind::Call: return a.func == b.func && same(*a.lhs, *b.lhs);
      default: return same(*a.lhs, *b.lhs) && same(*a.rhs, *b.rhs);
    }
  }

  // Binding strength used by the printer: sums < products < unary minus < power < atoms.
  static int precedence(const Node& n) {
    switch (n.kind) {
      case Kind::Add:
      case Kind::Sub: return 1;
      case Kind::Mul:
      case Kind::Div: return 2;
      case Kind::Neg: return 3;
      case Kind::Pow: return 4;
      case Kind::Literal: return n.value < 0.0 || std::signbit(n.value) ? 0 : 5;
      default: return 5;
    }
  }

  static void print_child(const Node& n, int min_prec, std::string& out) {
    if (precedence(n) < min_prec) {
      out += '(';
      print(n, out);
      out += ')';
    } else {
      print(n, out);
    }
  }

  static void print(const Node& n, std::string& out) {
    switch (n.kind) {
      case Kind::Literal: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        out += buf;
        return;
      }
      case Kind::Variable:
        out += 'x';
        out += static_cast<char>('1' + n.var);
        return;
      case Kind::Neg:
        out += '-';
        print_child(*n.lhs, 3, out);
        return;
      case Kind::Call:
        out += func_name(n.func);
        out += '(';
        print(*n.lhs, out);
        out += ')';
        return;
      case Kind::Add:
      case Kind::Sub:
        print_child(*n.lhs, 1, out);
        out += n.kind == Kind::Add ? " + " : " - ";
        print_child(*n.rhs, 2, out);
        return;
      case Kind::Mul:
      case Kind::Div:
        print_child(*n.lhs, 2, out);
        out += n.kind == Kind::Mul ? "*" : "/";
        print_child(*n.rhs, 3, out);
        return;
      case Kind::Pow:
        print_child(*n.lhs, 5, out);
        out += '^';
        print_child(*n.rhs, 3, out);
        return;
    }
  }

  template <class T>
  static T checked(T r, std::string_view what, double arg) {
    if (!finite_all(r))
      throw DomainError(std::string(what) + " produced a non-finite result (argument " +
                        std::to_string(arg) + ")");
    return r;
  }

  template <class T>
  static T evaluate(const Node& n, const Point& p) {
    using std::cos, std::cosh, std::exp, std::log, std::pow, std::sin, std::sinh, std::sqrt,
        std::tan, std::tanh;
    switch (n.kind) {
      case Kind::Literal: return T(n.value);
      case Kind::Variable:
        if constexpr (std::is_same_v<T, Dual6>)
          return Dual6::variable(n.var, p[n.var]);
        else
          return p[n.var];
      case Kind::Neg: return -evaluate<T>(*n.lhs, p);
      case Kind::Add: return checked(evaluate<T>(*n.lhs, p) + evaluate<T>(*n.rhs, p), "+", 0.0);
      case Kind::Sub: return checked(evaluate<T>(*n.lhs, p) - evaluate<T>(*n.rhs, p), "-", 0.0);
      case Kind::Mul: return checked(evaluate<T>(*n.lhs, p) * evaluate<T>(*n.rhs, p), "*", 0.0);
      case Kind::Div: {
        const T den = evaluate<T>(*n.rhs, p);
        if (value_of(den) == 0.0) throw DomainError("division by zero");
        return checked(evaluate<T>(*n.lhs, p) / den, "/", value_of(den));
      }
      case Kind::Pow: {
        const T base = evaluate<T>(*n.lhs, p);
        const T expo = evaluate<T>(*n.rhs, p);
        const double b = value_of(base), e = value_of(expo);
        if (b < 0.0 && std::trunc(e) != e)
          throw DomainError("pow: negative base " + std::to_string(b) + " with non-integer exponent");
        if (b == 0.0 && e < 0.0) throw DomainError("pow: zero base with negative exponent");
        return checked(pow(base, expo), "pow", b);
      }
      case Kind::Call: {
        const T a = evaluate<T>(*n.lhs, p);
        const double x = value_of(a);
        switch (n.func) {
          case Func::Sin: return checked(sin(a), "sin", x);
          case Func::Cos: return checked(cos(a), "cos", x);
          case Func::Tan: return checked(tan(a), "tan", x);
          case Func::Exp: return checked(exp(a), "exp", x);
          case Func::Log:
            if (x <= 0.0) throw DomainError("log: argument " + std::to_string(x) + " is not positive");
            return checked(log(a), "log", x);
          case Func::Sqrt:
            if (x < 0.0) throw DomainError("sqrt: argument " + std::to_string(x) + " is negative");
            return checked(sqrt(a), "sqrt", x);
          case Func::Sinh: return checked(sinh(a), "sinh", x);
          case Func::Cosh: return checked(cosh(a), "cosh", x);
          case Func::Tanh: return checked(tanh(a), "tanh", x);
        }
      }
    }
    throw DomainError("corrupt expression node");
  }
};

namespace detail {

// Recursive-descent parser:
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | x1..x6 | func '(' expr ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  ExprAst run() {
    skip_ws();
    if (pos_ == s_.size()) throw ParseError("empty expression", pos_);
    ExprAst e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("expected operator or end of input", pos_);
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprAst expr() {
    ExprAst lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = ExprAst::binary(ExprAst::Kind::Add, lhs, term());
      else if (accept('-'))
        lhs = ExprAst::binary(ExprAst::Kind::Sub, lhs, term());
      else
        return lhs;
    }
  }

  ExprAst term() {
    ExprAst lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = ExprAst::binary(ExprAst::Kind::Mul, lhs, unary());
      else if (accept('/'))
        lhs = ExprAst::binary(ExprAst::Kind::Div, lhs, unary());
      else
        return lhs;
    }
  }

  ExprAst unary() {
    if (accept('-')) return ExprAst::unary(ExprAst::Kind::Neg, unary());
    return power();
  }

  ExprAst power() {
    ExprAst base = primary();
    if (accept('^')) return ExprAst::binary(ExprAst::Kind::Pow, base, unary());
    return base;
  }

  ExprAst primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("expected number, variable, function or '('", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      ExprAst inner = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("expected number, variable, function or '(' but found '") + c + "'", pos_);
  }

  ExprAst number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) ++q;
      if (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
        pos_ = q;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_ || pos_ == start)
      throw ParseError("malformed number", start);
    return ExprAst::literal(v);
  }

  ExprAst identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string_view name = s_.substr(start, pos_ - start);
    if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '6')
      return ExprAst::variable(name[1] - '1');
    Func f;
    if (func_from_name(name, f)) {
      if (!accept('(')) throw ParseError("expected '(' after function name", pos_);
      ExprAst arg = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return ExprAst::call(f, arg);
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }
};

}  // namespace detail

inline ExprAst ExprAst::parse(std::string_view text) { return detail::Parser(text).run(); }

}  // namespace hspace
