#pragma once

// Tiny arithmetic expression evaluator for closed-form fields in run configs:
// variables x, y, z; constants pi, e; the usual operators and a handful of
// functions. Parse errors carry the offending position.

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "magspec/core.hpp"

namespace magspec {

class Expression {
 public:
  static Expression parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (!p.eof()) p.fail("unexpected trailing input");
    e.text_ = text;
    return e;
  }

  double eval(const Vec& x) const { return root_->eval(x); }
  const std::string& text() const { return text_; }

  std::function<double(const Vec&)> as_function() const {
    auto root = root_;
    return [root](const Vec& x) { return root->eval(x); };
  }

 private:
  struct Node {
    enum class Op {
      constant, var_x, var_y, var_z,
      add, sub, mul, div, neg, pow,
      fn_sin, fn_cos, fn_tan, fn_exp, fn_log, fn_sqrt, fn_abs, fn_tanh, fn_atan, fn_floor,
      fn_min, fn_max, fn_pow
    };
    Op op = Op::constant;
    double value = 0.0;
    std::vector<std::shared_ptr<Node>> kids;

    double eval(const Vec& x) const {
      switch (op) {
        case Op::constant: return value;
        case Op::var_x: return x[0];
        case Op::var_y: return x[1];
        case Op::var_z: return x[2];
        case Op::add: return kids[0]->eval(x) + kids[1]->eval(x);
        case Op::sub: return kids[0]->eval(x) - kids[1]->eval(x);
        case Op::mul: return kids[0]->eval(x) * kids[1]->eval(x);
        case Op::div: return kids[0]->eval(x) / kids[1]->eval(x);
        case Op::neg: return -kids[0]->eval(x);
        case Op::pow: return std::pow(kids[0]->eval(x), kids[1]->eval(x));
        case Op::fn_sin: return std::sin(kids[0]->eval(x));
        case Op::fn_cos: return std::cos(kids[0]->eval(x));
        case Op::fn_tan: return std::tan(kids[0]->eval(x));
        case Op::fn_exp: return std::exp(kids[0]->eval(x));
        case Op::fn_log: return std::log(kids[0]->eval(x));
        case Op::fn_sqrt: return std::sqrt(kids[0]->eval(x));
        case Op::fn_abs: return std::abs(kids[0]->eval(x));
        case Op::fn_tanh: return std::tanh(kids[0]->eval(x));
        case Op::fn_atan: return std::atan(kids[0]->eval(x));
        case Op::fn_floor: return std::floor(kids[0]->eval(x));
        case Op::fn_min: return std::min(kids[0]->eval(x), kids[1]->eval(x));
        case Op::fn_max: return std::max(kids[0]->eval(x), kids[1]->eval(x));
        case Op::fn_pow: return std::pow(kids[0]->eval(x), kids[1]->eval(x));
      }
      return 0.0;
    }
  };
  using NodePtr = std::shared_ptr<Node>;

  struct Parser {
    const std::string& s;
    std::size_t pos = 0;
    explicit Parser(const std::string& text) : s(text) {}

    [[noreturn]] void fail(const std::string& why) const {
      throw std::invalid_argument("expression error at position " + std::to_string(pos) + ": " + why);
    }
    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eof() const { return pos >= s.size(); }
    char peek() {
      skip_ws();
      return eof() ? '\0' : s[pos];
    }
    bool accept(char c) {
      if (peek() == c) {
        ++pos;
        return true;
      }
      return false;
    }

    NodePtr parse_expr() {
      NodePtr left = parse_term();
      for (;;) {
        if (accept('+')) {
          auto n = std::make_shared<Node>();
          n->op = Node::Op::add;
          n->kids = {left, parse_term()};
          left = n;
        } else if (accept('-')) {
          auto n = std::make_shared<Node>();
          n->op = Node::Op::sub;
          n->kids = {left, parse_term()};
          left = n;
        } else {
          return left;
        }
      }
    }
    NodePtr parse_term() {
      NodePtr left = parse_unary();
      for (;;) {
        if (accept('*')) {
          auto n = std::make_shared<Node>();
          n->op = Node::Op::mul;
          n->kids = {left, parse_unary()};
          left = n;
        } else if (accept('/')) {
          auto n = std::make_shared<Node>();
          n->op = Node::Op::div;
          n->kids = {left, parse_unary()};
          left = n;
        } else {
          return left;
        }
      }
    }
    NodePtr parse_unary() {
      if (accept('-')) {
        auto n = std::make_shared<Node>();
        n->op = Node::Op::neg;
        n->kids = {parse_unary()};
        return n;
      }
      accept('+');
      return parse_power();
    }
    NodePtr parse_power() {
      NodePtr base = parse_primary();
      if (accept('^')) {
        auto n = std::make_shared<Node>();
        n->op = Node::Op::pow;
        n->kids = {base, parse_unary()};  // right associative
        return n;
      }
      return base;
    }
    NodePtr parse_primary() {
      skip_ws();
      if (eof()) fail("unexpected end of input");
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
      if (accept('(')) {
        NodePtr e = parse_expr();
        if (!accept(')')) fail("expected ')'");
        return e;
      }
      fail(std::string("unexpected character '") + c + "'");
    }
    NodePtr parse_number() {
      std::size_t end = pos;
      while (end < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.' || s[end] == 'e' ||
              s[end] == 'E' || ((s[end] == '+' || s[end] == '-') && end > pos &&
                                (s[end - 1] == 'e' || s[end - 1] == 'E'))))
        ++end;
      auto n = std::make_shared<Node>();
      n->op = Node::Op::constant;
      try {
        n->value = std::stod(s.substr(pos, end - pos));
      } catch (const std::exception&) {
        fail("bad number literal");
      }
      pos = end;
      return n;
    }
    NodePtr parse_ident() {
      std::size_t end = pos;
      while (end < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_'))
        ++end;
      const std::string name = s.substr(end > pos ? pos : pos, end - pos);
      pos = end;
      auto leaf = [this](Node::Op op, double v = 0.0) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->value = v;
        return n;
      };
      if (name == "x") return leaf(Node::Op::var_x);
      if (name == "y") return leaf(Node::Op::var_y);
      if (name == "z") return leaf(Node::Op::var_z);
      if (name == "pi") return leaf(Node::Op::constant, M_PI);
      if (name == "e") return leaf(Node::Op::constant, M_E);

      static const std::vector<std::pair<std::string, Node::Op>> unary_fns = {
          {"sin", Node::Op::fn_sin},   {"cos", Node::Op::fn_cos},   {"tan", Node::Op::fn_tan},
          {"exp", Node::Op::fn_exp},   {"log", Node::Op::fn_log},   {"sqrt", Node::Op::fn_sqrt},
          {"abs", Node::Op::fn_abs},   {"tanh", Node::Op::fn_tanh}, {"atan", Node::Op::fn_atan},
          {"floor", Node::Op::fn_floor}};
      static const std::vector<std::pair<std::string, Node::Op>> binary_fns = {
          {"min", Node::Op::fn_min}, {"max", Node::Op::fn_max}, {"pow", Node::Op::fn_pow}};

      for (const auto& [fname, op] : unary_fns) {
        if (name == fname) {
          if (!accept('(')) fail(fname + " expects '('");
          auto n = std::make_shared<Node>();
          n->op = op;
          n->kids = {parse_expr()};
          if (!accept(')')) fail("expected ')'");
          return n;
        }
      }
      for (const auto& [fname, op] : binary_fns) {
        if (name == fname) {
          if (!accept('(')) fail(fname + " expects '('");
          auto n = std::make_shared<Node>();
          n->op = op;
          n->kids = {parse_expr()};
          if (!accept(',')) fail(fname + " expects two arguments");
          n->kids.push_back(parse_expr());
          if (!accept(')')) fail("expected ')'");
          return n;
        }
      }
      fail("unknown identifier '" + name + "'");
    }
  };

  NodePtr root_;
  std::string text_;
};

}  // namespace magspec
