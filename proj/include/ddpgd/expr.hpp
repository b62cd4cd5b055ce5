#pragma once

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddpgd {

/// Raised for malformed case configurations and data expressions.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Forward-mode dual number; nest Dual<Dual<double>> for second derivatives.
template <class T>
struct Dual {
  T v{};
  T d{};
  Dual() = default;
  Dual(double c) : v(c), d(0.0) {}
  Dual(T value, T deriv) : v(value), d(deriv) {}
};

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
template <class T> Dual<T> sin(const Dual<T>& a) { using std::sin, std::cos; return {sin(a.v), a.d * cos(a.v)}; }
template <class T> Dual<T> cos(const Dual<T>& a) { using std::sin, std::cos; return {cos(a.v), -(a.d * sin(a.v))}; }
template <class T> Dual<T> exp(const Dual<T>& a) { using std::exp; T e = exp(a.v); return {e, a.d * e}; }
template <class T> Dual<T> log(const Dual<T>& a) { using std::log; return {log(a.v), a.d / a.v}; }
template <class T> Dual<T> sqrt(const Dual<T>& a) { using std::sqrt; T s = sqrt(a.v); return {s, a.d / (s + s)}; }
template <class T> Dual<T> tanh(const Dual<T>& a) { using std::tanh; T t = tanh(a.v); return {t, a.d * (T(1.0) - t * t)}; }
template <class T> Dual<T> abs(const Dual<T>& a) { return primal(a) < 0 ? -a : a; }

inline double primal(double a) { return a; }
template <class T> double primal(const Dual<T>& a) { return primal(a.v); }

namespace detail {

template <class T>
T ipow(T base, long n) {
  if (n < 0) return T(1.0) / ipow(base, -n);
  T result(1.0);
  while (n > 0) {
    if (n & 1) result = result * base;
    base = base * base;
    n >>= 1;
  }
  return result;
}

enum class Op { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log, Sqrt, Tanh, Abs };

struct Node {
  Op op = Op::Num;
  double value = 0.0;
  int var = -1;
  std::unique_ptr<Node> a, b;
};

class Parser {
public:
  Parser(const std::string& src, const std::vector<std::string>& vars,
         const std::map<std::string, double>& constants)
      : s_(src), vars_(vars), constants_(constants) {}

  std::unique_ptr<Node> parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

private:
  const std::string& s_;
  const std::vector<std::string>& vars_;
  const std::map<std::string, double>& constants_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "': " + what + " at offset " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
    return false;
  }
  static std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> a = nullptr, std::unique_ptr<Node> b = nullptr) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }
  std::unique_ptr<Node> expr() {
    auto lhs = term();
    for (;;) {
      if (eat('+')) lhs = make(Op::Add, std::move(lhs), term());
      else if (eat('-')) lhs = make(Op::Sub, std::move(lhs), term());
      else return lhs;
    }
  }
  std::unique_ptr<Node> term() {
    auto lhs = unary();
    for (;;) {
      if (eat('*')) lhs = make(Op::Mul, std::move(lhs), unary());
      else if (eat('/')) lhs = make(Op::Div, std::move(lhs), unary());
      else return lhs;
    }
  }
  std::unique_ptr<Node> unary() {
    if (eat('-')) return make(Op::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  std::unique_ptr<Node> power() {
    auto base = primary();
    if (eat('^')) return make(Op::Pow, std::move(base), unary());
    return base;
  }
  std::unique_ptr<Node> primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = make(Op::Num);
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      skip();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        static const std::map<std::string, Op> fns = {{"sin", Op::Sin},   {"cos", Op::Cos},   {"exp", Op::Exp},
                                                      {"log", Op::Log},   {"sqrt", Op::Sqrt}, {"tanh", Op::Tanh},
                                                      {"abs", Op::Abs}};
        auto it = fns.find(id);
        if (it == fns.end()) fail("unknown function '" + id + "'");
        ++pos_;
        auto arg = expr();
        if (!eat(')')) fail("expected ')'");
        return make(it->second, std::move(arg));
      }
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == id) {
          auto n = make(Op::Var);
          n->var = static_cast<int>(i);
          return n;
        }
      }
      if (auto it = constants_.find(id); it != constants_.end()) {
        auto n = make(Op::Num);
        n->value = it->second;
        return n;
      }
      if (id == "pi") {
        auto n = make(Op::Num);
        n->value = 3.14159265358979323846;
        return n;
      }
      fail("unknown identifier '" + id + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

template <class T>
T eval(const Node& n, std::span<const T> x) {
  using std::sin, std::cos, std::exp, std::log, std::sqrt, std::tanh, std::abs;
  switch (n.op) {
    case Op::Num: return T(n.value);
    case Op::Var: return x[static_cast<std::size_t>(n.var)];
    case Op::Add: return eval(*n.a, x) + eval(*n.b, x);
    case Op::Sub: return eval(*n.a, x) - eval(*n.b, x);
    case Op::Mul: return eval(*n.a, x) * eval(*n.b, x);
    case Op::Div: return eval(*n.a, x) / eval(*n.b, x);
    case Op::Neg: return -eval(*n.a, x);
    case Op::Pow: {
      if (n.b->op == Op::Num && n.b->value == std::round(n.b->value) && std::abs(n.b->value) < 64)
        return ipow(eval(*n.a, x), static_cast<long>(n.b->value));
      return exp(eval(*n.b, x) * log(eval(*n.a, x)));
    }
    case Op::Sin: return sin(eval(*n.a, x));
    case Op::Cos: return cos(eval(*n.a, x));
    case Op::Exp: return exp(eval(*n.a, x));
    case Op::Log: return log(eval(*n.a, x));
    case Op::Sqrt: return sqrt(eval(*n.a, x));
    case Op::Tanh: return tanh(eval(*n.a, x));
    case Op::Abs: return abs(eval(*n.a, x));
  }
  return T(0.0);
}

inline bool uses_var(const Node& n, int v) {
  if (n.op == Op::Var) return n.var == v;
  return (n.a && uses_var(*n.a, v)) || (n.b && uses_var(*n.b, v));
}

}  // namespace detail

/// Parsed scalar expression over a fixed list of named variables.
class Expression {
public:
  Expression() = default;
  Expression(std::string source, std::vector<std::string> vars, const std::map<std::string, double>& constants = {})
      : source_(std::move(source)), vars_(std::move(vars)) {
    root_ = std::shared_ptr<detail::Node>(detail::Parser(source_, vars_, constants).parse());
  }

  const std::string& source() const { return source_; }
  const std::vector<std::string>& variables() const { return vars_; }
  bool depends_on(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name) return detail::uses_var(*root_, static_cast<int>(i));
    return false;
  }

  double operator()(std::span<const double> x) const { return detail::eval<double>(*root_, x); }

  template <class T>
  T evaluate(std::span<const T> x) const { return detail::eval<T>(*root_, x); }

  /// Value and gradient with respect to every variable.
  double gradient(std::span<const double> x, std::span<double> grad) const {
    std::vector<Dual<double>> xd(x.size());
    double value = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < x.size(); ++j) xd[j] = Dual<double>(x[j], i == j ? 1.0 : 0.0);
      Dual<double> r = detail::eval<Dual<double>>(*root_, std::span<const Dual<double>>(xd));
      grad[i] = r.d;
      value = r.v;
    }
    return value;
  }

  /// Second derivative d2/(dxi dxj).
  double second(std::span<const double> x, std::size_t i, std::size_t j) const {
    using D2 = Dual<Dual<double>>;
    std::vector<D2> xd(x.size());
    for (std::size_t k = 0; k < x.size(); ++k)
      xd[k] = D2(Dual<double>(x[k], k == i ? 1.0 : 0.0), Dual<double>(k == j ? 1.0 : 0.0, 0.0));
    return detail::eval<D2>(*root_, std::span<const D2>(xd)).d.d;
  }

private:
  std::string source_;
  std::vector<std::string> vars_;
  std::shared_ptr<const detail::Node> root_;
};

}  // namespace ddpgd
