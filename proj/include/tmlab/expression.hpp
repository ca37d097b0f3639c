#pragma once

#include <memory>
#include <string>

namespace tmlab {

/// A closed-form scalar expression in the variables x1, x2.
///
/// Grammar: numbers, x1, x2, pi, e, + - * / ^ (right associative), unary
/// minus, parentheses and the functions exp log sqrt sin cos tan sinh cosh
/// tanh abs. Parsing happens once; evaluation walks the compiled tree.
class Expression {
 public:
  Expression();  // constant 0
  explicit Expression(const std::string& source);

  double operator()(double x1, double x2) const;

  const std::string& source() const noexcept { return source_; }
  bool is_constant() const noexcept;

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace tmlab
