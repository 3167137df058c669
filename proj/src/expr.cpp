#include "expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>

namespace zfa::expr {

bool Ast::operator==(const Ast& o) const {
    if (dim != o.dim || nodes.size() != o.nodes.size()) return false;
    for (size_t i = 0; i < nodes.size(); ++i) {
        const Node& x = nodes[i];
        const Node& y = o.nodes[i];
        if (x.op != y.op || x.a != y.a || x.b != y.b || x.var != y.var) return false;
        if (x.op == Op::Lit && x.lit != y.lit) return false;
    }
    return true;
}

namespace {

struct Token {
    enum Kind { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End } kind;
    size_t pos;
    double num = 0.0;
    std::string ident;
};

class Lexer {
  public:
    explicit Lexer(const std::string& s) : s_(s) { advance(); }
    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
        tok_.pos = i_;
        if (i_ >= s_.size()) {
            tok_.kind = Token::End;
            return;
        }
        char ch = s_[i_];
        switch (ch) {
            case '+': tok_.kind = Token::Plus; ++i_; return;
            case '-': tok_.kind = Token::Minus; ++i_; return;
            case '*': tok_.kind = Token::Star; ++i_; return;
            case '/': tok_.kind = Token::Slash; ++i_; return;
            case '^': tok_.kind = Token::Caret; ++i_; return;
            case '(': tok_.kind = Token::LParen; ++i_; return;
            case ')': tok_.kind = Token::RParen; ++i_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
            const char* begin = s_.data() + i_;
            const char* end = s_.data() + s_.size();
            double v = 0.0;
            auto res = std::from_chars(begin, end, v);
            if (res.ec != std::errc{} || res.ptr == begin)
                throw ParseError("malformed number", i_);
            tok_.kind = Token::Num;
            tok_.num = v;
            i_ += static_cast<size_t>(res.ptr - begin);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(ch))) {
            size_t j = i_;
            while (j < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_'))
                ++j;
            tok_.kind = Token::Ident;
            tok_.ident = s_.substr(i_, j - i_);
            i_ = j;
            return;
        }
        throw ParseError(std::string("unexpected character '") + ch + "'", i_);
    }

    const std::string& s_;
    size_t i_ = 0;
    Token tok_;
};

class Parser {
  public:
    Parser(const std::string& s, int dim) : lex_(s), dim_(dim) { ast_.dim = dim; }

    Ast run() {
        int32_t root = parseSum();
        if (lex_.peek().kind != Token::End)
            throw ParseError("trailing input", lex_.peek().pos);
        (void)root;
        return std::move(ast_);
    }

  private:
    int32_t push(Node n) {
        ast_.nodes.push_back(n);
        return static_cast<int32_t>(ast_.nodes.size() - 1);
    }

    int32_t parseSum() {
        int32_t lhs = parseProduct();
        for (;;) {
            Token::Kind k = lex_.peek().kind;
            if (k == Token::Plus || k == Token::Minus) {
                lex_.take();
                int32_t rhs = parseProduct();
                lhs = push({k == Token::Plus ? Op::Add : Op::Sub, lhs, rhs});
            } else {
                return lhs;
            }
        }
    }

    int32_t parseProduct() {
        int32_t lhs = parseUnary();
        for (;;) {
            Token::Kind k = lex_.peek().kind;
            if (k == Token::Star || k == Token::Slash) {
                lex_.take();
                int32_t rhs = parseUnary();
                lhs = push({k == Token::Star ? Op::Mul : Op::Div, lhs, rhs});
            } else {
                return lhs;
            }
        }
    }

    int32_t parseUnary() {
        if (lex_.peek().kind == Token::Minus) {
            lex_.take();
            int32_t v = parseUnary();
            return push({Op::Neg, v, -1});
        }
        return parsePower();
    }

    int32_t parsePower() {
        int32_t base = parseAtom();
        if (lex_.peek().kind == Token::Caret) {
            Token caret = lex_.take();
            Token e = lex_.take();
            if (e.kind != Token::Num)
                throw ParseError("exponent must be a nonnegative integer", e.pos);
            double r = e.num;
            if (r < 0.0 || r != std::floor(r) || r > 1e9)
                throw ParseError("exponent must be a nonnegative integer", e.pos);
            if (lex_.peek().kind == Token::Caret)
                throw ParseError("chained '^' is not allowed; use parentheses", lex_.peek().pos);
            (void)caret;
            Node n{Op::Pow, base, -1};
            n.var = static_cast<int32_t>(r);
            return push(n);
        }
        return base;
    }

    int32_t parseAtom() {
        Token t = lex_.take();
        switch (t.kind) {
            case Token::Num: {
                Node n{Op::Lit, -1, -1};
                n.lit = t.num;
                return push(n);
            }
            case Token::LParen: {
                int32_t v = parseSum();
                Token r = lex_.take();
                if (r.kind != Token::RParen) throw ParseError("expected ')'", r.pos);
                return v;
            }
            case Token::Ident: {
                if (t.ident == "sin" || t.ident == "cos" || t.ident == "exp" ||
                    t.ident == "sqrt") {
                    Token l = lex_.take();
                    if (l.kind != Token::LParen)
                        throw ParseError("expected '(' after function name", l.pos);
                    int32_t arg = parseSum();
                    Token r = lex_.take();
                    if (r.kind != Token::RParen) throw ParseError("expected ')'", r.pos);
                    Op op = t.ident == "sin"   ? Op::Sin
                            : t.ident == "cos" ? Op::Cos
                            : t.ident == "exp" ? Op::Exp
                                               : Op::Sqrt;
                    return push({op, arg, -1});
                }
                if (t.ident.size() >= 2 && t.ident[0] == 'x') {
                    int idx = 0;
                    auto res = std::from_chars(t.ident.data() + 1,
                                               t.ident.data() + t.ident.size(), idx);
                    if (res.ec == std::errc{} && res.ptr == t.ident.data() + t.ident.size()) {
                        if (idx < 1 || idx > dim_)
                            throw ParseError("variable '" + t.ident + "' out of range for dimension " +
                                                 std::to_string(dim_),
                                             t.pos);
                        Node n{Op::Var, -1, -1};
                        n.var = idx - 1;
                        return push(n);
                    }
                }
                throw ParseError("unknown identifier '" + t.ident + "'", t.pos);
            }
            case Token::End: throw ParseError("unexpected end of input", t.pos);
            default: throw ParseError("unexpected token", t.pos);
        }
    }

    Lexer lex_;
    int dim_;
    Ast ast_;
};

int precedence(Op op) {
    switch (op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        default: return 5;
    }
}

std::string fmtDouble(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void printNode(const Ast& ast, int32_t i, std::string& out) {
    const Node& n = ast.nodes[static_cast<size_t>(i)];
    auto child = [&](int32_t c, bool parens) {
        if (parens) out += '(';
        printNode(ast, c, out);
        if (parens) out += ')';
    };
    int p = precedence(n.op);
    switch (n.op) {
        case Op::Lit: out += fmtDouble(n.lit); return;
        case Op::Var:
            out += 'x';
            out += std::to_string(n.var + 1);
            return;
        case Op::Add:
        case Op::Sub:
            child(n.a, precedence(ast.nodes[static_cast<size_t>(n.a)].op) < p);
            out += (n.op == Op::Add) ? " + " : " - ";
            child(n.b, precedence(ast.nodes[static_cast<size_t>(n.b)].op) <= p);
            return;
        case Op::Mul:
        case Op::Div:
            child(n.a, precedence(ast.nodes[static_cast<size_t>(n.a)].op) < p);
            out += (n.op == Op::Mul) ? "*" : "/";
            child(n.b, precedence(ast.nodes[static_cast<size_t>(n.b)].op) <= p);
            return;
        case Op::Neg:
            out += '-';
            child(n.a, precedence(ast.nodes[static_cast<size_t>(n.a)].op) < p);
            return;
        case Op::Pow:
            child(n.a, precedence(ast.nodes[static_cast<size_t>(n.a)].op) < 5);
            out += '^';
            out += std::to_string(n.var);
            return;
        case Op::Sin: out += "sin("; break;
        case Op::Cos: out += "cos("; break;
        case Op::Exp: out += "exp("; break;
        case Op::Sqrt: out += "sqrt("; break;
    }
    printNode(ast, n.a, out);
    out += ')';
}

} // namespace

Ast parse(const std::string& text, int dim) {
    Parser p(text, dim);
    Ast ast = p.run();
    return ast;
}

std::string prettyPrint(const Ast& ast) {
    std::string out;
    printNode(ast, static_cast<int32_t>(ast.nodes.size() - 1), out);
    return out;
}

double eval(const Ast& ast, const Vec& x, std::vector<double>& scratch) {
    if (scratch.size() < ast.nodes.size()) scratch.resize(ast.nodes.size());
    double* v = scratch.data();
    const Node* nodes = ast.nodes.data();
    size_t count = ast.nodes.size();
    for (size_t i = 0; i < count; ++i) {
        const Node& n = nodes[i];
        switch (n.op) {
            case Op::Lit: v[i] = n.lit; break;
            case Op::Var: v[i] = x[n.var]; break;
            case Op::Add: v[i] = v[n.a] + v[n.b]; break;
            case Op::Sub: v[i] = v[n.a] - v[n.b]; break;
            case Op::Mul: v[i] = v[n.a] * v[n.b]; break;
            case Op::Div: v[i] = v[n.a] / v[n.b]; break;
            case Op::Neg: v[i] = -v[n.a]; break;
            case Op::Pow: {
                double b = v[n.a];
                int k = n.var;
                double r = 1.0;
                double acc = b;
                // exponentiation by squaring keeps results reproducible
                while (k > 0) {
                    if (k & 1) r *= acc;
                    acc *= acc;
                    k >>= 1;
                }
                v[i] = r;
                break;
            }
            case Op::Sin: v[i] = std::sin(v[n.a]); break;
            case Op::Cos: v[i] = std::cos(v[n.a]); break;
            case Op::Exp: v[i] = std::exp(v[n.a]); break;
            case Op::Sqrt: {
                double a = v[n.a];
                if (a < 0.0)
                    throw Error(ErrClass::Io, "sqrt of negative value during field evaluation");
                v[i] = std::sqrt(a);
                break;
            }
        }
    }
    return v[count - 1];
}

double evalAlloc(const Ast& ast, const Vec& x) {
    std::vector<double> scratch(ast.nodes.size());
    return eval(ast, x, scratch);
}

Ival evalInterval(const Ast& ast, const Ival box[3], std::vector<Ival>& scratch) {
    if (scratch.size() < ast.nodes.size()) scratch.resize(ast.nodes.size());
    Ival* v = scratch.data();
    try {
        for (size_t i = 0; i < ast.nodes.size(); ++i) {
            const Node& n = ast.nodes[i];
            switch (n.op) {
                case Op::Lit: v[i] = Ival::point(n.lit); break;
                case Op::Var: v[i] = box[n.var]; break;
                case Op::Add: v[i] = v[n.a] + v[n.b]; break;
                case Op::Sub: v[i] = v[n.a] - v[n.b]; break;
                case Op::Mul: v[i] = v[n.a] * v[n.b]; break;
                case Op::Div: v[i] = v[n.a] / v[n.b]; break;
                case Op::Neg: v[i] = -v[n.a]; break;
                case Op::Pow: v[i] = ipow(v[n.a], n.var); break;
                case Op::Sin: v[i] = isin(v[n.a]); break;
                case Op::Cos: v[i] = icos(v[n.a]); break;
                case Op::Exp: v[i] = iexp(v[n.a]); break;
                case Op::Sqrt: v[i] = isqrt(v[n.a]); break;
            }
        }
    } catch (const IntervalDomainError&) {
        throw Error(ErrClass::Io,
                    "interval enclosure hit a pole or sqrt of a possibly-negative range; "
                    "supply an explicit \"lipschitz\" bound in the field file");
    }
    return v[ast.nodes.size() - 1];
}

namespace {

// Derivative builder appending onto `out` with light constant folding.
struct Deriv {
    const Ast& src;
    Ast& out;
    int var;
    std::vector<int32_t> copied; // src index -> out index of copied subtree

    int32_t copy(int32_t i) {
        int32_t& memo = copied[static_cast<size_t>(i)];
        if (memo >= 0) return memo;
        const Node& n = src.nodes[static_cast<size_t>(i)];
        Node m = n;
        if (n.a >= 0) m.a = copy(n.a);
        if (n.b >= 0) m.b = copy(n.b);
        out.nodes.push_back(m);
        memo = static_cast<int32_t>(out.nodes.size() - 1);
        return memo;
    }

    bool isLit(int32_t i, double v) const {
        const Node& n = out.nodes[static_cast<size_t>(i)];
        return n.op == Op::Lit && n.lit == v;
    }

    int32_t lit(double v) {
        Node n{Op::Lit, -1, -1};
        n.lit = v;
        out.nodes.push_back(n);
        return static_cast<int32_t>(out.nodes.size() - 1);
    }

    int32_t add(int32_t a, int32_t b) {
        if (isLit(a, 0.0)) return b;
        if (isLit(b, 0.0)) return a;
        out.nodes.push_back({Op::Add, a, b});
        return static_cast<int32_t>(out.nodes.size() - 1);
    }

    int32_t sub(int32_t a, int32_t b) {
        if (isLit(b, 0.0)) return a;
        if (isLit(a, 0.0)) {
            out.nodes.push_back({Op::Neg, b, -1});
            return static_cast<int32_t>(out.nodes.size() - 1);
        }
        out.nodes.push_back({Op::Sub, a, b});
        return static_cast<int32_t>(out.nodes.size() - 1);
    }

    int32_t mul(int32_t a, int32_t b) {
        if (isLit(a, 0.0) || isLit(b, 0.0)) return lit(0.0);
        if (isLit(a, 1.0)) return b;
        if (isLit(b, 1.0)) return a;
        out.nodes.push_back({Op::Mul, a, b});
        return static_cast<int32_t>(out.nodes.size() - 1);
    }

    int32_t div(int32_t a, int32_t b) {
        if (isLit(a, 0.0)) return lit(0.0);
        if (isLit(b, 1.0)) return a;
        out.nodes.push_back({Op::Div, a, b});
        return static_cast<int32_t>(out.nodes.size() - 1);
    }

    int32_t apply(Op op, int32_t a, int exponent = 0) {
        Node n{op, a, -1};
        n.var = exponent;
        out.nodes.push_back(n);
        return static_cast<int32_t>(out.nodes.size() - 1);
    }

    int32_t d(int32_t i) {
        const Node& n = src.nodes[static_cast<size_t>(i)];
        switch (n.op) {
            case Op::Lit: return lit(0.0);
            case Op::Var: return lit(n.var == var ? 1.0 : 0.0);
            case Op::Add: return add(d(n.a), d(n.b));
            case Op::Sub: return sub(d(n.a), d(n.b));
            case Op::Mul: {
                int32_t da = d(n.a), db = d(n.b);
                return add(mul(da, copy(n.b)), mul(copy(n.a), db));
            }
            case Op::Div: {
                int32_t da = d(n.a), db = d(n.b);
                int32_t num = sub(mul(da, copy(n.b)), mul(copy(n.a), db));
                int32_t den = apply(Op::Pow, copy(n.b), 2);
                return div(num, den);
            }
            case Op::Neg: {
                int32_t da = d(n.a);
                if (isLit(da, 0.0)) return da;
                return apply(Op::Neg, da);
            }
            case Op::Pow: {
                if (n.var == 0) return lit(0.0);
                int32_t da = d(n.a);
                if (isLit(da, 0.0)) return da;
                int32_t inner = (n.var == 1) ? lit(1.0)
                                             : apply(Op::Pow, copy(n.a), n.var - 1);
                return mul(mul(lit(static_cast<double>(n.var)), inner), da);
            }
            case Op::Sin: return mul(apply(Op::Cos, copy(n.a)), d(n.a));
            case Op::Cos: return mul(apply(Op::Neg, apply(Op::Sin, copy(n.a))), d(n.a));
            case Op::Exp: return mul(apply(Op::Exp, copy(n.a)), d(n.a));
            case Op::Sqrt: {
                int32_t da = d(n.a);
                if (isLit(da, 0.0)) return da;
                int32_t den = mul(lit(2.0), apply(Op::Sqrt, copy(n.a)));
                return div(da, den);
            }
        }
        return lit(0.0);
    }
};

} // namespace

Ast differentiate(const Ast& ast, int var) {
    Ast out;
    out.dim = ast.dim;
    Deriv deriv{ast, out, var, std::vector<int32_t>(ast.nodes.size(), -1)};
    int32_t root = deriv.d(static_cast<int32_t>(ast.nodes.size() - 1));
    // ensure the root really is the last node
    if (root != static_cast<int32_t>(out.nodes.size() - 1)) {
        Node n = out.nodes[static_cast<size_t>(root)];
        if (n.op == Op::Lit || n.op == Op::Var) {
            out.nodes.push_back(n);
        } else {
            // wrap as +0 to relocate without copying the subtree
            Node z{Op::Lit, -1, -1};
            z.lit = 0.0;
            out.nodes.push_back(z);
            out.nodes.push_back({Op::Add, root, static_cast<int32_t>(out.nodes.size() - 1)});
        }
    }
    return out;
}

} // namespace zfa::expr
