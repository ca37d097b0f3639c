#include "tmlab/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

#include "tmlab/errors.hpp"

namespace tmlab {

struct Expression::Node {
  enum class Kind { constant, x1, x2, add, sub, mul, div, pow, neg, call } kind;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double x1, double x2) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::x1: return x1;
      case Kind::x2: return x2;
      case Kind::add: return lhs->eval(x1, x2) + rhs->eval(x1, x2);
      case Kind::sub: return lhs->eval(x1, x2) - rhs->eval(x1, x2);
      case Kind::mul: return lhs->eval(x1, x2) * rhs->eval(x1, x2);
      case Kind::div: return lhs->eval(x1, x2) / rhs->eval(x1, x2);
      case Kind::pow: return std::pow(lhs->eval(x1, x2), rhs->eval(x1, x2));
      case Kind::neg: return -lhs->eval(x1, x2);
      case Kind::call: return fn(lhs->eval(x1, x2));
    }
    return 0.0;
  }

  bool constant_tree() const {
    switch (kind) {
      case Kind::constant: return true;
      case Kind::x1:
      case Kind::x2: return false;
      default:
        return (!lhs || lhs->constant_tree()) && (!rhs || rhs->constant_tree());
    }
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

NodePtr make_constant(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = Kind::constant;
  n->value = v;
  return n;
}

double fn_exp(double x) { return std::exp(x); }
double fn_log(double x) { return std::log(x); }
double fn_sqrt(double x) { return std::sqrt(x); }
double fn_sin(double x) { return std::sin(x); }
double fn_cos(double x) { return std::cos(x); }
double fn_tan(double x) { return std::tan(x); }
double fn_sinh(double x) { return std::sinh(x); }
double fn_cosh(double x) { return std::cosh(x); }
double fn_tanh(double x) { return std::tanh(x); }
double fn_abs(double x) { return std::fabs(x); }

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw InvalidArgument("expression '" + s_ + "': " + why + " at offset " +
                          std::to_string(pos_));
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

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) n = make(Kind::add, n, term());
      else if (accept('-')) n = make(Kind::sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) n = make(Kind::mul, n, unary());
      else if (accept('/')) n = make(Kind::div, n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Kind::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return make_constant(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "x1") return make(Kind::x1);
      if (id == "x2") return make(Kind::x2);
      if (id == "pi") return make_constant(std::numbers::pi);
      if (id == "e") return make_constant(std::numbers::e);
      static const std::vector<std::pair<std::string, double (*)(double)>> funcs = {
          {"exp", fn_exp},   {"log", fn_log},   {"sqrt", fn_sqrt}, {"sin", fn_sin},
          {"cos", fn_cos},   {"tan", fn_tan},   {"sinh", fn_sinh}, {"cosh", fn_cosh},
          {"tanh", fn_tanh}, {"abs", fn_abs}};
      for (const auto& [name, fn] : funcs) {
        if (id == name) {
          if (!accept('(')) fail("expected '(' after " + id);
          auto n = std::make_shared<Expression::Node>();
          n->kind = Kind::call;
          n->fn = fn;
          n->lhs = expr();
          if (!accept(')')) fail("expected ')'");
          return n;
        }
      }
      fail("unknown identifier '" + id + "'");
    }
    fail("unexpected character");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : source_("0"), root_(make_constant(0.0)) {}

Expression::Expression(const std::string& source) : source_(source), root_(Parser(source).parse()) {}

double Expression::operator()(double x1, double x2) const { return root_->eval(x1, x2); }

bool Expression::is_constant() const noexcept { return root_->constant_tree(); }

}  // namespace tmlab
