#pragma once

#include <memory>
#include <string>

#include "surfpf/levelset.hpp"

namespace surfpf {

/// Scalar expression of a point x = (x, y, z), e.g. "0.5 + 0.1*sin(3*x)*z".
/// Variables: x y z (aliases x1 x2 x3), constants pi and e. Operators + - * /
/// and right-associative ^. Functions: sin cos tan exp log sqrt abs tanh
/// atan, plus the binary min max pow atan2.
class Expression {
 public:
  /// Throws ConfigError on a syntax error or unknown identifier.
  static Expression parse(const std::string& text);

  double operator()(const Vec3& x) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace surfpf
