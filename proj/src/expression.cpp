#include "nafem/expression.hpp"

#include "nafem/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>
#include <vector>

namespace nafem {

struct Expression::Node {
    enum class Kind { Number, VarT, VarX, VarY, Negate, Add, Sub, Mul, Div, Sin, Cos, Exp };

    Kind kind = Kind::Number;
    double value = 0.0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Node::Kind;

NodePtr make_leaf(Kind kind, double value = 0.0) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->value = value;
    return n;
}

NodePtr make_node(Kind kind, NodePtr lhs, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

double eval(const Node& n, double t, double x, double y) {
    switch (n.kind) {
        case Kind::Number: return n.value;
        case Kind::VarT: return t;
        case Kind::VarX: return x;
        case Kind::VarY: return y;
        case Kind::Negate: return -eval(*n.lhs, t, x, y);
        case Kind::Add: return eval(*n.lhs, t, x, y) + eval(*n.rhs, t, x, y);
        case Kind::Sub: return eval(*n.lhs, t, x, y) - eval(*n.rhs, t, x, y);
        case Kind::Mul: return eval(*n.lhs, t, x, y) * eval(*n.rhs, t, x, y);
        case Kind::Div: return eval(*n.lhs, t, x, y) / eval(*n.rhs, t, x, y);
        case Kind::Sin: return std::sin(eval(*n.lhs, t, x, y));
        case Kind::Cos: return std::cos(eval(*n.lhs, t, x, y));
        case Kind::Exp: return std::exp(eval(*n.lhs, t, x, y));
    }
    return 0.0;
}

bool uses(const Node& n, Kind var) {
    if (n.kind == var) {
        return true;
    }
    return (n.lhs && uses(*n.lhs, var)) || (n.rhs && uses(*n.rhs, var));
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void print(const Node& n, std::string& out) {
    auto binary = [&](const char* op) {
        out += '(';
        print(*n.lhs, out);
        out += op;
        print(*n.rhs, out);
        out += ')';
    };
    auto call = [&](const char* name) {
        out += name;
        out += '(';
        print(*n.lhs, out);
        out += ')';
    };
    switch (n.kind) {
        case Kind::Number: out += format_number(n.value); break;
        case Kind::VarT: out += 't'; break;
        case Kind::VarX: out += 'x'; break;
        case Kind::VarY: out += 'y'; break;
        case Kind::Negate:
            out += "(-";
            print(*n.lhs, out);
            out += ')';
            break;
        case Kind::Add: binary(" + "); break;
        case Kind::Sub: binary(" - "); break;
        case Kind::Mul: binary(" * "); break;
        case Kind::Div: binary(" / "); break;
        case Kind::Sin: call("sin"); break;
        case Kind::Cos: call("cos"); break;
        case Kind::Exp: call("exp"); break;
    }
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        skip_space();
        if (pos_ == text_.size()) {
            throw ParseError(pos_, "empty expression");
        }
        NodePtr root = expr();
        skip_space();
        if (pos_ != text_.size()) {
            throw ParseError(pos_, std::string("unexpected '") + text_[pos_] + "'");
        }
        return root;
    }

private:
    NodePtr expr() {
        NodePtr lhs = term();
        while (true) {
            skip_space();
            if (accept('+')) {
                lhs = make_node(Kind::Add, lhs, term());
            } else if (accept('-')) {
                lhs = make_node(Kind::Sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (true) {
            skip_space();
            if (accept('*')) {
                lhs = make_node(Kind::Mul, lhs, unary());
            } else if (accept('/')) {
                lhs = make_node(Kind::Div, lhs, unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        skip_space();
        if (accept('-')) {
            return make_node(Kind::Negate, unary());
        }
        return primary();
    }

    NodePtr primary() {
        skip_space();
        if (pos_ == text_.size()) {
            throw ParseError(pos_, "unexpected end of expression");
        }
        const char c = text_[pos_];
        if (accept('(')) {
            NodePtr inner = expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return number();
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            return identifier();
        }
        throw ParseError(pos_, std::string("unexpected '") + c + "'");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) {
                ++look;
            }
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    ++pos_;
                }
            }
        }
        double value = 0.0;
        const char* first = text_.data() + start;
        const char* last = text_.data() + pos_;
        const auto res = std::from_chars(first, last, value);
        if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) {
            throw ParseError(start, "malformed number '" + std::string(first, last) + "'");
        }
        return make_leaf(Kind::Number, value);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "t") return make_leaf(Kind::VarT);
        if (name == "x") return make_leaf(Kind::VarX);
        if (name == "y") return make_leaf(Kind::VarY);

        Kind fn;
        if (name == "sin") {
            fn = Kind::Sin;
        } else if (name == "cos") {
            fn = Kind::Cos;
        } else if (name == "exp") {
            fn = Kind::Exp;
        } else {
            throw ParseError(start, "unknown identifier '" + std::string(name) + "'");
        }
        skip_space();
        expect('(');
        NodePtr arg = expr();
        expect(')');
        return make_node(fn, arg);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        skip_space();
        if (!accept(c)) {
            throw ParseError(pos_, std::string("expected '") + c + "'");
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(make_leaf(Kind::Number, 0.0)) {}

Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse()); }

Expression Expression::constant(double value) {
    if (!std::isfinite(value)) {
        throw ConfigError("expression constant must be finite");
    }
    if (value < 0.0) {
        return Expression(make_node(Kind::Negate, make_leaf(Kind::Number, -value)));
    }
    return Expression(make_leaf(Kind::Number, value));
}

double Expression::operator()(double t, double x, double y) const { return eval(*root_, t, x, y); }

std::string Expression::to_string() const {
    std::string out;
    print(*root_, out);
    return out;
}

bool Expression::is_constant() const { return !depends_on_time() && !depends_on_space(); }

bool Expression::depends_on_time() const { return uses(*root_, Kind::VarT); }

bool Expression::depends_on_space() const {
    return uses(*root_, Kind::VarX) || uses(*root_, Kind::VarY);
}

}  // namespace nafem
