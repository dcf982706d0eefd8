#include "surfpf/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "surfpf/errors.hpp"

namespace surfpf {

struct Expression::Node {
  enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call1, Call2 };
  Op op = Op::Const;
  double value = 0.0;
  int var = 0;
  double (*f1)(double) = nullptr;
  double (*f2)(double, double) = nullptr;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(const Vec3& x) const {
    switch (op) {
      case Op::Const: return value;
      case Op::Var: return x[var];
      case Op::Neg: return -args[0]->eval(x);
      case Op::Add: return args[0]->eval(x) + args[1]->eval(x);
      case Op::Sub: return args[0]->eval(x) - args[1]->eval(x);
      case Op::Mul: return args[0]->eval(x) * args[1]->eval(x);
      case Op::Div: return args[0]->eval(x) / args[1]->eval(x);
      case Op::Pow: return std::pow(args[0]->eval(x), args[1]->eval(x));
      case Op::Call1: return f1(args[0]->eval(x));
      case Op::Call2: return f2(args[0]->eval(x), args[1]->eval(x));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

double f_sin(double v) { return std::sin(v); }
double f_cos(double v) { return std::cos(v); }
double f_tan(double v) { return std::tan(v); }
double f_exp(double v) { return std::exp(v); }
double f_log(double v) { return std::log(v); }
double f_sqrt(double v) { return std::sqrt(v); }
double f_abs(double v) { return std::fabs(v); }
double f_tanh(double v) { return std::tanh(v); }
double f_atan(double v) { return std::atan(v); }
double f_min(double a, double b) { return std::fmin(a, b); }
double f_max(double a, double b) { return std::fmax(a, b); }
double f_pow(double a, double b) { return std::pow(a, b); }
double f_atan2(double a, double b) { return std::atan2(a, b); }

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression \"" + s_ + "\": " + msg + " at offset " + std::to_string(pos_));
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

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+'))
        n = make(Op::Add, {n, term()});
      else if (accept('-'))
        n = make(Op::Sub, {n, term()});
      else
        return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*'))
        n = make(Op::Mul, {n, unary()});
      else if (accept('/'))
        n = make(Op::Div, {n, unary()});
      else
        return n;
    }
  }

  // Unary minus binds looser than ^, so -x^2 = -(x^2).
  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr n = expr();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("bad number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Expression::Node>();
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string id = s_.substr(start, pos_ - start);

    static const std::vector<std::pair<std::string, int>> vars{{"x", 0}, {"y", 1}, {"z", 2},
                                                                {"x1", 0}, {"x2", 1}, {"x3", 2}};
    for (const auto& [name, axis] : vars) {
      if (id == name) {
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::Var;
        n->var = axis;
        return n;
      }
    }
    if (id == "pi" || id == "e") {
      auto n = std::make_shared<Expression::Node>();
      n->value = id == "pi" ? std::numbers::pi : std::numbers::e;
      return n;
    }

    static const std::vector<std::pair<std::string, double (*)(double)>> unary_fns{
        {"sin", f_sin},   {"cos", f_cos}, {"tan", f_tan},   {"exp", f_exp},  {"log", f_log},
        {"sqrt", f_sqrt}, {"abs", f_abs}, {"tanh", f_tanh}, {"atan", f_atan}};
    static const std::vector<std::pair<std::string, double (*)(double, double)>> binary_fns{
        {"min", f_min}, {"max", f_max}, {"pow", f_pow}, {"atan2", f_atan2}};

    for (const auto& [name, fn] : unary_fns) {
      if (id == name) {
        expect('(');
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::Call1;
        n->f1 = fn;
        n->args = {expr()};
        expect(')');
        return n;
      }
    }
    for (const auto& [name, fn] : binary_fns) {
      if (id == name) {
        expect('(');
        NodePtr a = expr();
        expect(',');
        NodePtr b = expr();
        expect(')');
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::Call2;
        n->f2 = fn;
        n->args = {a, b};
        return n;
      }
    }
    pos_ = start;
    fail("unknown identifier '" + id + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).parse();
  return e;
}

double Expression::operator()(const Vec3& x) const { return root_->eval(x); }

}  // namespace surfpf
