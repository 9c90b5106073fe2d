#include "pipeflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace pipeflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxStack = 256;
}  // namespace

class ExpressionParser {
 public:
  explicit ExpressionParser(const std::string& text) : text_(text) {}

  Expression run() {
    Expression e;
    e.text_ = text_;
    depth_ = max_depth_ = 0;
    parse_expr(e.code_);
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected trailing input");
    if (e.code_.empty()) fail("empty expression");
    if (max_depth_ > kMaxStack) fail("expression too deep");
    return e;
  }

 private:
  using Code = std::vector<Expression::Instr>;
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ExpressionError(msg, static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void push(Code& code, Op op, double v = 0.0) {
    code.push_back({op, v});
    if (op == Op::kConst || op == Op::kX || op == Op::kY || op == Op::kZ || op == Op::kT) {
      ++depth_;
      max_depth_ = std::max(max_depth_, depth_);
    } else if (op == Op::kAdd || op == Op::kSub || op == Op::kMul || op == Op::kDiv ||
               op == Op::kPow) {
      --depth_;
    }
    // unary ops leave the depth unchanged
  }

  void parse_expr(Code& code) {
    parse_term(code);
    for (;;) {
      if (eat('+')) {
        parse_term(code);
        push(code, Op::kAdd);
      } else if (eat('-')) {
        parse_term(code);
        push(code, Op::kSub);
      } else {
        return;
      }
    }
  }

  void parse_term(Code& code) {
    parse_factor(code);
    for (;;) {
      if (eat('*')) {
        parse_factor(code);
        push(code, Op::kMul);
      } else if (eat('/')) {
        parse_factor(code);
        push(code, Op::kDiv);
      } else {
        return;
      }
    }
  }

  // '-' binds weaker than '^': -x^2 is -(x^2), 2^-1 is allowed
  void parse_factor(Code& code) {
    if (eat('-')) {
      parse_factor(code);
      push(code, Op::kNeg);
      return;
    }
    parse_atom(code);
    if (eat('^')) {
      parse_factor(code);
      push(code, Op::kPow);
    }
  }

  void parse_atom(Code& code) {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* start = text_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(start, &end);
      if (end == start) fail("bad number");
      pos_ += static_cast<std::size_t>(end - start);
      push(code, Op::kConst, v);
      return;
    }
    if (c == '(') {
      ++pos_;
      parse_expr(code);
      if (!eat(')')) fail("expected ')'");
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isalnum(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      const std::string name = text_.substr(start, pos_ - start);
      if (name == "x") return push(code, Op::kX);
      if (name == "y") return push(code, Op::kY);
      if (name == "z") return push(code, Op::kZ);
      if (name == "t") return push(code, Op::kT);
      if (name == "pi") return push(code, Op::kConst, kPi);
      Op fn;
      if (name == "sin")
        fn = Op::kSin;
      else if (name == "cos")
        fn = Op::kCos;
      else if (name == "exp")
        fn = Op::kExp;
      else {
        pos_ = start;
        fail("unknown name '" + name + "'");
      }
      if (!eat('(')) fail("expected '(' after function name");
      parse_expr(code);
      if (!eat(')')) fail("expected ')'");
      push(code, fn);
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  int max_depth_ = 0;
};

Expression Expression::parse(const std::string& text) { return ExpressionParser(text).run(); }

double Expression::eval(const Vec3& x, double t) const {
  if (code_.empty()) return 0.0;
  double stack[kMaxStack];
  int top = -1;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::kConst: stack[++top] = in.value; break;
      case Op::kX: stack[++top] = x.x; break;
      case Op::kY: stack[++top] = x.y; break;
      case Op::kZ: stack[++top] = x.z; break;
      case Op::kT: stack[++top] = t; break;
      case Op::kAdd: stack[top - 1] += stack[top]; --top; break;
      case Op::kSub: stack[top - 1] -= stack[top]; --top; break;
      case Op::kMul: stack[top - 1] *= stack[top]; --top; break;
      case Op::kDiv: stack[top - 1] /= stack[top]; --top; break;
      case Op::kPow: stack[top - 1] = std::pow(stack[top - 1], stack[top]); --top; break;
      case Op::kNeg: stack[top] = -stack[top]; break;
      case Op::kSin: stack[top] = std::sin(stack[top]); break;
      case Op::kCos: stack[top] = std::cos(stack[top]); break;
      case Op::kExp: stack[top] = std::exp(stack[top]); break;
    }
  }
  return stack[0];
}

}  // namespace pipeflow
