#pragma once

// Small arithmetic expression language for bed and initial-data formulas.
//
//   cmp    := sum (('<' | '<=' | '>' | '>=' | '==' | '!=') sum)?
//   sum    := prod (('+' | '-') prod)*
//   prod   := unary (('*' | '/') unary)*
//   unary  := ('+' | '-') unary | power
//   power  := atom ('^' unary)?
//   atom   := number | name | name '(' cmp (',' cmp)* ')' | '(' cmp ')'
//
// Variables: x, y, z (bed elevation, initial data only), g, pi.
// Functions: exp log sqrt sin cos tan tanh abs (1 arg); min max pow (2);
// if(cond, a, b).

#include "swnmg/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace swnmg {

struct ExprVars {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double g = kGravity;
};

class Expression {
 public:
  Expression() : Expression(constant(0.0)) {}

  static Expression parse(const std::string& text) {
    Parser p{text, 0};
    auto root = p.comparison();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("unexpected trailing input");
    Expression e;
    e.src_ = text;
    e.root_ = std::move(root);
    return e;
  }

  static Expression constant(double v) {
    Expression e(nullptr);
    e.root_ = std::make_shared<Node>();
    e.root_->op = Op::kNum;
    e.root_->value = v;
    e.src_ = format_number(v);
    return e;
  }

  double operator()(const ExprVars& v) const { return eval(*root_, v); }
  double operator()(double x, double y = 0.0, double z = 0.0) const { return (*this)({x, y, z, kGravity}); }

  const std::string& source() const { return src_; }
  bool operator==(const Expression& o) const { return src_ == o.src_; }

  static std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

 private:
  enum class Op {
    kNum, kX, kY, kZ, kG, kAdd, kSub, kMul, kDiv, kPow, kNeg,
    kLt, kLe, kGt, kGe, kEq, kNe, kCall
  };

  struct Node {
    Op op = Op::kNum;
    double value = 0.0;
    std::string fn;
    std::vector<std::shared_ptr<Node>> args;
  };
  using NodePtr = std::shared_ptr<Node>;

  explicit Expression(std::nullptr_t) {}

  static NodePtr make(Op op, std::vector<NodePtr> args = {}) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = std::move(args);
    return n;
  }

  struct Parser {
    const std::string& s;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& what) const {
      throw ConfigError("expression '" + s + "': " + what + " at offset " + std::to_string(pos));
    }
    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(const char* tok) {
      skip_ws();
      const std::string t(tok);
      if (s.compare(pos, t.size(), t) == 0) {
        pos += t.size();
        return true;
      }
      return false;
    }

    NodePtr comparison() {
      NodePtr lhs = sum();
      static const std::pair<const char*, Op> ops[] = {{"<=", Op::kLe}, {">=", Op::kGe}, {"==", Op::kEq},
                                                       {"!=", Op::kNe}, {"<", Op::kLt},  {">", Op::kGt}};
      for (const auto& [tok, op] : ops)
        if (accept(tok)) return make(op, {lhs, sum()});
      return lhs;
    }
    NodePtr sum() {
      NodePtr lhs = product();
      for (;;) {
        if (accept("+")) lhs = make(Op::kAdd, {lhs, product()});
        else if (accept("-")) lhs = make(Op::kSub, {lhs, product()});
        else return lhs;
      }
    }
    NodePtr product() {
      NodePtr lhs = unary();
      for (;;) {
        if (accept("*")) lhs = make(Op::kMul, {lhs, unary()});
        else if (accept("/")) lhs = make(Op::kDiv, {lhs, unary()});
        else return lhs;
      }
    }
    NodePtr unary() {
      if (accept("-")) return make(Op::kNeg, {unary()});
      if (accept("+")) return unary();
      return power();
    }
    NodePtr power() {
      NodePtr base = atom();
      if (accept("^")) return make(Op::kPow, {base, unary()});
      return base;
    }
    NodePtr atom() {
      skip_ws();
      if (pos >= s.size()) fail("unexpected end of input");
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        NodePtr e = comparison();
        if (!accept(")")) fail("expected ')'");
        return e;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const char* begin = s.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("bad number");
        pos += static_cast<std::size_t>(end - begin);
        auto n = make(Op::kNum);
        n->value = v;
        return n;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        const std::string name = s.substr(start, pos - start);
        if (accept("(")) {
          auto n = make(Op::kCall);
          n->fn = name;
          n->args.push_back(comparison());
          while (accept(",")) n->args.push_back(comparison());
          if (!accept(")")) fail("expected ')' after arguments of " + name);
          check_call(*n);
          return n;
        }
        if (name == "x") return make(Op::kX);
        if (name == "y") return make(Op::kY);
        if (name == "z") return make(Op::kZ);
        if (name == "g") return make(Op::kG);
        if (name == "pi") {
          auto n = make(Op::kNum);
          n->value = std::numbers::pi;
          return n;
        }
        fail("unknown variable '" + name + "'");
      }
      fail(std::string("unexpected character '") + c + "'");
    }

    void check_call(const Node& n) const {
      static const char* unary_fns[] = {"exp", "log", "sqrt", "sin", "cos", "tan", "tanh", "abs"};
      for (const char* f : unary_fns)
        if (n.fn == f) {
          if (n.args.size() != 1) fail(n.fn + " takes 1 argument");
          return;
        }
      if (n.fn == "min" || n.fn == "max" || n.fn == "pow") {
        if (n.args.size() != 2) fail(n.fn + " takes 2 arguments");
        return;
      }
      if (n.fn == "if") {
        if (n.args.size() != 3) fail("if takes 3 arguments");
        return;
      }
      fail("unknown function '" + n.fn + "'");
    }
  };

  static double eval(const Node& n, const ExprVars& v) {
    auto a = [&](std::size_t i) { return eval(*n.args[i], v); };
    switch (n.op) {
      case Op::kNum: return n.value;
      case Op::kX: return v.x;
      case Op::kY: return v.y;
      case Op::kZ: return v.z;
      case Op::kG: return v.g;
      case Op::kAdd: return a(0) + a(1);
      case Op::kSub: return a(0) - a(1);
      case Op::kMul: return a(0) * a(1);
      case Op::kDiv: return a(0) / a(1);
      case Op::kPow: return std::pow(a(0), a(1));
      case Op::kNeg: return -a(0);
      case Op::kLt: return a(0) < a(1) ? 1.0 : 0.0;
      case Op::kLe: return a(0) <= a(1) ? 1.0 : 0.0;
      case Op::kGt: return a(0) > a(1) ? 1.0 : 0.0;
      case Op::kGe: return a(0) >= a(1) ? 1.0 : 0.0;
      case Op::kEq: return a(0) == a(1) ? 1.0 : 0.0;
      case Op::kNe: return a(0) != a(1) ? 1.0 : 0.0;
      case Op::kCall: break;
    }
    const std::string& f = n.fn;
    if (f == "if") return a(0) != 0.0 ? a(1) : a(2);
    if (f == "exp") return std::exp(a(0));
    if (f == "log") return std::log(a(0));
    if (f == "sqrt") return std::sqrt(a(0));
    if (f == "sin") return std::sin(a(0));
    if (f == "cos") return std::cos(a(0));
    if (f == "tan") return std::tan(a(0));
    if (f == "tanh") return std::tanh(a(0));
    if (f == "abs") return std::abs(a(0));
    if (f == "min") return std::min(a(0), a(1));
    if (f == "max") return std::max(a(0), a(1));
    return std::pow(a(0), a(1));
  }

  std::string src_;
  NodePtr root_;
};

}  // namespace swnmg
