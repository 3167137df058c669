#ifndef ZFA_EXPR_HPP
#define ZFA_EXPR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "geom.hpp"
#include "interval.hpp"

namespace zfa::expr {

enum class Op : uint8_t { Lit, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Sqrt };

struct Node {
    Op op;
    int32_t a = -1; // operand indices into the same array
    int32_t b = -1;
    double lit = 0.0; // Lit payload
    int32_t var = 0;  // Var payload (0-based) or Pow exponent
};

// Flat expression tree: operands always precede their parent, so a single
// forward sweep evaluates the whole thing.
struct Ast {
    std::vector<Node> nodes;
    int dim = 0;

    bool operator==(const Ast& o) const;
    size_t size() const { return nodes.size(); }
};

class ParseError : public Error {
  public:
    ParseError(const std::string& msg, size_t pos)
        : Error(ErrClass::Io, msg + " (at position " + std::to_string(pos) + ")"), pos_(pos) {}
    size_t pos() const { return pos_; }

  private:
    size_t pos_;
};

// Grammar: literals, x1..xn, + - * /, unary -, integer ^, sin cos exp sqrt,
// parentheses.  Precedence ^ > unary- > */ > +-, left associative.
Ast parse(const std::string& text, int dim);

std::string prettyPrint(const Ast& ast);

// Point evaluation.  `scratch` must have at least ast.size() slots; using a
// caller-owned buffer keeps the hot paths allocation-free.
double eval(const Ast& ast, const Vec& x, std::vector<double>& scratch);
double evalAlloc(const Ast& ast, const Vec& x);

// Interval enclosure over a box.  Throws Error(Io) on division by an
// interval containing zero or sqrt of a possibly-negative interval.
Ival evalInterval(const Ast& ast, const Ival box[3], std::vector<Ival>& scratch);

// Symbolic partial derivative with constant folding.
Ast differentiate(const Ast& ast, int var);

} // namespace zfa::expr

#endif
