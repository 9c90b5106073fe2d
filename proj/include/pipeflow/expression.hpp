#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pipeflow/geometry.hpp"

namespace pipeflow {

struct ExpressionError : std::runtime_error {
  ExpressionError(const std::string& msg, int column)
      : std::runtime_error(msg + " at column " + std::to_string(column)), column(column) {}
  int column;  // 1-based position in the source text
};

// Arithmetic over (x, y, z, t) with +, -, *, /, ^, sin, cos, exp, the
// constant pi and numeric literals.  Parsed once to a stack program so data
// fields can be sampled cheaply on every node of every frame.
class Expression {
 public:
  Expression() = default;  // constant zero
  static Expression parse(const std::string& text);

  double eval(const Vec3& x, double t) const;
  const std::string& text() const { return text_; }

 private:
  enum class Op : unsigned char {
    kConst, kX, kY, kZ, kT, kAdd, kSub, kMul, kDiv, kPow, kNeg, kSin, kCos, kExp
  };
  struct Instr {
    Op op;
    double value;
  };
  std::vector<Instr> code_;
  std::string text_;
  friend class ExpressionParser;
};

}  // namespace pipeflow
