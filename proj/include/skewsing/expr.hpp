#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// A closed expression language for kernels f(z) and skewing functions
// Pi(z, delta) supplied through family-spec files.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' unary)?          right associative
//   atom    := number | z | delta | pi | e | func '(' sum ')' | '(' sum ')'
// Functions: exp log abs sign sqrt sin cos tanh phi Phi logistic.

namespace skewsing::expr {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Func { Exp, Log, Abs, Sign, Sqrt, Sin, Cos, Tanh, NormalPdf, NormalCdf, Logistic };
enum class Variable { Z, Delta };
enum class Constant { Pi, E };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Literal {
  double value;
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Func func;
  NodePtr arg;
};

struct Node {
  std::variant<Literal, Variable, Constant, Negate, Binary, Call> kind;
};

struct Bindings {
  double z = 0.0;
  double delta = 0.0;
};

/// Immutable AST handle; copies share the tree.
class Expr {
 public:
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  /// Throws Error(DomainError) for log/sqrt/division outside their domain and
  /// Error(NonFinite) when a finite input overflows.
  double eval(const Bindings& b) const;
  double operator()(double z, double delta = 0.0) const { return eval({z, delta}); }

  /// Fully parenthesized rendering; parse(to_string()) reproduces the tree.
  std::string to_string() const;
  bool uses(Variable v) const;
  const Node& root() const { return *root_; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  NodePtr root_;
};

struct ParseError {
  std::size_t position = 0;  // byte offset of the offending token
  std::string message;
  std::vector<std::string> expected;

  std::string describe() const;
};

std::variant<Expr, ParseError> parse(std::string_view src);

/// Throws Error(ParseError) carrying ParseError::describe().
Expr parse_or_throw(std::string_view src);

}  // namespace skewsing::expr
