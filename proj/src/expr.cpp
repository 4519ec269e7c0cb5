#include "skewsing/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>

#include "skewsing/error.hpp"
#include "skewsing/special.hpp"

namespace skewsing::expr {

namespace {

struct FuncName {
  std::string_view name;
  Func func;
};

constexpr FuncName kFunctions[] = {
    {"exp", Func::Exp},        {"log", Func::Log},   {"abs", Func::Abs},
    {"sign", Func::Sign},      {"sqrt", Func::Sqrt}, {"sin", Func::Sin},
    {"cos", Func::Cos},        {"tanh", Func::Tanh}, {"phi", Func::NormalPdf},
    {"Phi", Func::NormalCdf},  {"logistic", Func::Logistic},
};

std::string_view func_name(Func f) {
  for (const auto& fn : kFunctions) {
    if (fn.func == f) return fn.name;
  }
  return "?";
}

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind = Tok::End;
  std::size_t pos = 0;
  std::string_view text;
  double number = 0.0;
};

struct Failure {
  ParseError error;
};

const std::vector<std::string> kExpectOperand = {"number", "identifier", "(", "-"};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  Expr parse_all() {
    NodePtr root = sum();
    if (tok_.kind != Tok::End) {
      fail(tok_.pos, "unexpected trailing input", {"operator", "end of input"});
    }
    return Expr(std::move(root));
  }

 private:
  [[noreturn]] void fail(std::size_t pos, std::string msg, std::vector<std::string> expected) {
    throw Failure{ParseError{pos, std::move(msg), std::move(expected)}};
  }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.pos = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Tok::End;
      return;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
        ++end;
      }
      tok_.kind = Tok::Ident;
      tok_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    switch (c) {
      case '+': tok_.kind = Tok::Plus; break;
      case '-': tok_.kind = Tok::Minus; break;
      case '*': tok_.kind = Tok::Star; break;
      case '/': tok_.kind = Tok::Slash; break;
      case '^': tok_.kind = Tok::Caret; break;
      case '(': tok_.kind = Tok::LParen; break;
      case ')': tok_.kind = Tok::RParen; break;
      default:
        fail(pos_, std::string("unexpected character '") + c + "'", kExpectOperand);
    }
    tok_.text = src_.substr(pos_, 1);
    ++pos_;
  }

  void lex_number() {
    std::size_t end = pos_;
    bool digits = false;
    while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) {
      ++end;
      digits = true;
    }
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) {
        ++end;
        digits = true;
      }
    }
    if (!digits) fail(pos_, "malformed number", {"digit"});
    // An exponent needs at least one digit, otherwise 'e' stays for the lexer.
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t k = end + 1;
      if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        while (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) ++k;
        end = k;
      }
    }
    const std::string text(src_.substr(pos_, end - pos_));
    char* stop = nullptr;
    const double v = std::strtod(text.c_str(), &stop);
    if (stop != text.c_str() + text.size() || !std::isfinite(v)) {
      fail(pos_, "malformed number", {"number"});
    }
    tok_.kind = Tok::Number;
    tok_.text = src_.substr(pos_, end - pos_);
    tok_.number = v;
    pos_ = end;
  }

  NodePtr make(auto kind) {
    if (++nodes_ > kMaxNodes) fail(tok_.pos, "expression too large", {});
    return std::make_shared<const Node>(Node{kind});
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth) p.fail(p.tok_.pos, "expression nested too deeply", {});
    }
    ~DepthGuard() { --p.depth_; }
  };

  NodePtr sum() {
    const DepthGuard guard(*this);
    NodePtr lhs = product();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const BinaryOp op = tok_.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      advance();
      lhs = make(Binary{op, lhs, product()});
    }
    return lhs;
  }

  NodePtr product() {
    NodePtr lhs = unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const BinaryOp op = tok_.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      advance();
      lhs = make(Binary{op, lhs, unary()});
    }
    return lhs;
  }

  NodePtr unary() {
    const DepthGuard guard(*this);
    if (tok_.kind == Tok::Minus) {
      advance();
      return make(Negate{unary()});
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (tok_.kind == Tok::Caret) {
      advance();
      return make(Binary{BinaryOp::Pow, base, unary()});
    }
    return base;
  }

  NodePtr atom() {
    const Token t = tok_;
    switch (t.kind) {
      case Tok::Number:
        advance();
        return make(Literal{t.number});
      case Tok::LParen: {
        advance();
        NodePtr inner = sum();
        expect_rparen(t.pos);
        return inner;
      }
      case Tok::Ident:
        return identifier(t);
      case Tok::End:
        fail(t.pos, "expected expression, found end of input", kExpectOperand);
      default:
        fail(t.pos, "expected expression, found '" + std::string(t.text) + "'", kExpectOperand);
    }
  }

  NodePtr identifier(const Token& t) {
    advance();
    if (t.text == "z") return make(Variable::Z);
    if (t.text == "delta") return make(Variable::Delta);
    if (t.text == "pi") return make(Constant::Pi);
    if (t.text == "e") return make(Constant::E);
    for (const auto& fn : kFunctions) {
      if (fn.name == t.text) {
        if (tok_.kind != Tok::LParen) fail(tok_.pos, "expected '(' after function name", {"("});
        const std::size_t open = tok_.pos;
        advance();
        NodePtr arg = sum();
        expect_rparen(open);
        return make(Call{fn.func, arg});
      }
    }
    fail(t.pos, "unknown identifier '" + std::string(t.text) + "'",
         {"z", "delta", "pi", "e", "function name"});
  }

  void expect_rparen(std::size_t open) {
    if (tok_.kind != Tok::RParen) {
      fail(tok_.pos, "expected ')' to close '(' at offset " + std::to_string(open), {")"});
    }
    advance();
  }

  static constexpr int kMaxDepth = 200;
  static constexpr int kMaxNodes = 2000;

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
  int depth_ = 0;
  int nodes_ = 0;
};

double domain_fail(const char* what) { throw Error(ErrorCode::DomainError, what); }

double eval_node(const Node& n, const Bindings& b) {
  return std::visit(
      [&b](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return k.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return k == Variable::Z ? b.z : b.delta;
        } else if constexpr (std::is_same_v<T, Constant>) {
          return k == Constant::Pi ? special::kPi : 2.71828182845904523536;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval_node(*k.operand, b);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const double x = eval_node(*k.lhs, b);
          const double y = eval_node(*k.rhs, b);
          switch (k.op) {
            case BinaryOp::Add: return x + y;
            case BinaryOp::Sub: return x - y;
            case BinaryOp::Mul: return x * y;
            case BinaryOp::Div:
              if (y == 0.0) return domain_fail("division by zero");
              return x / y;
            case BinaryOp::Pow: {
              if (x == 0.0 && y < 0.0) return domain_fail("zero raised to a negative power");
              const double p = std::pow(x, y);
              if (std::isnan(p)) return domain_fail("negative base with non-integer exponent");
              return p;
            }
          }
          return 0.0;
        } else {
          const double x = eval_node(*k.arg, b);
          switch (k.func) {
            case Func::Exp: return std::exp(x);
            case Func::Log:
              if (!(x > 0.0)) return domain_fail("log of a non-positive value");
              return std::log(x);
            case Func::Abs: return std::fabs(x);
            case Func::Sign: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
            case Func::Sqrt:
              if (x < 0.0) return domain_fail("sqrt of a negative value");
              return std::sqrt(x);
            case Func::Sin: return std::sin(x);
            case Func::Cos: return std::cos(x);
            case Func::Tanh: return std::tanh(x);
            case Func::NormalPdf: return special::normal_pdf(x);
            case Func::NormalCdf: return special::normal_cdf(x);
            case Func::Logistic: return special::logistic_cdf(x);
          }
          return 0.0;
        }
      },
      n.kind);
}

void print_node(const Node& n, std::ostringstream& out) {
  std::visit(
      [&out](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Literal>) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.17g", k.value);
          out << buf;
        } else if constexpr (std::is_same_v<T, Variable>) {
          out << (k == Variable::Z ? "z" : "delta");
        } else if constexpr (std::is_same_v<T, Constant>) {
          out << (k == Constant::Pi ? "pi" : "e");
        } else if constexpr (std::is_same_v<T, Negate>) {
          out << "(-";
          print_node(*k.operand, out);
          out << ')';
        } else if constexpr (std::is_same_v<T, Binary>) {
          static constexpr char kSym[] = {'+', '-', '*', '/', '^'};
          out << '(';
          print_node(*k.lhs, out);
          out << ' ' << kSym[static_cast<int>(k.op)] << ' ';
          print_node(*k.rhs, out);
          out << ')';
        } else {
          out << func_name(k.func) << '(';
          print_node(*k.arg, out);
          out << ')';
        }
      },
      n.kind);
}

bool same(const Node& a, const Node& b) {
  if (a.kind.index() != b.kind.index()) return false;
  return std::visit(
      [&b](const auto& k) -> bool {
        using T = std::decay_t<decltype(k)>;
        const auto& o = std::get<T>(b.kind);
        if constexpr (std::is_same_v<T, Literal>) {
          return k.value == o.value;
        } else if constexpr (std::is_same_v<T, Variable> || std::is_same_v<T, Constant>) {
          return k == o;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return same(*k.operand, *o.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return k.op == o.op && same(*k.lhs, *o.lhs) && same(*k.rhs, *o.rhs);
        } else {
          return k.func == o.func && same(*k.arg, *o.arg);
        }
      },
      a.kind);
}

bool node_uses(const Node& n, Variable v) {
  return std::visit(
      [v](const auto& k) -> bool {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Variable>) {
          return k == v;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return node_uses(*k.operand, v);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return node_uses(*k.lhs, v) || node_uses(*k.rhs, v);
        } else if constexpr (std::is_same_v<T, Call>) {
          return node_uses(*k.arg, v);
        } else {
          return false;
        }
      },
      n.kind);
}

}  // namespace

double Expr::eval(const Bindings& b) const {
  const double v = eval_node(*root_, b);
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::NonFinite, "expression '" + to_string() + "' overflowed");
  }
  return v;
}

std::string Expr::to_string() const {
  std::ostringstream out;
  print_node(*root_, out);
  return out.str();
}

bool Expr::uses(Variable v) const { return node_uses(*root_, v); }

bool operator==(const Expr& a, const Expr& b) { return same(*a.root_, *b.root_); }

std::string ParseError::describe() const {
  std::string s = "parse error at offset " + std::to_string(position) + ": " + message;
  if (!expected.empty()) {
    s += " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) s += ", ";
      s += expected[i];
    }
    s += ")";
  }
  return s;
}

std::variant<Expr, ParseError> parse(std::string_view src) {
  try {
    Parser p(src);
    return p.parse_all();
  } catch (const Failure& f) {
    return f.error;
  }
}

Expr parse_or_throw(std::string_view src) {
  auto r = parse(src);
  if (auto* err = std::get_if<ParseError>(&r)) {
    throw Error(ErrorCode::ParseError, err->describe());
  }
  return std::get<Expr>(std::move(r));
}

}  // namespace skewsing::expr
