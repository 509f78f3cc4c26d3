#include "slx/expr.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "slx/types.hpp"

namespace slx {
namespace {

struct Node {
    virtual ~Node() = default;
    virtual double eval(double x) const = 0;
};
using NodePtr = std::unique_ptr<Node>;

struct Const : Node {
    double v;
    explicit Const(double v_) : v(v_) {}
    double eval(double) const override { return v; }
};

struct Var : Node {
    double eval(double x) const override { return x; }
};

struct Unary : Node {
    double (*fn)(double);
    NodePtr arg;
    Unary(double (*f)(double), NodePtr a) : fn(f), arg(std::move(a)) {}
    double eval(double x) const override { return fn(arg->eval(x)); }
};

struct Binary : Node {
    char op;
    NodePtr lhs, rhs;
    Binary(char o, NodePtr l, NodePtr r) : op(o), lhs(std::move(l)), rhs(std::move(r)) {}
    double eval(double x) const override {
        const double a = lhs->eval(x), b = rhs->eval(x);
        switch (op) {
            case '+': return a + b;
            case '-': return a - b;
            case '*': return a * b;
            case '/': return a / b;
            case '^': return std::pow(a, b);
            case 'm': return std::min(a, b);
            case 'M': return std::max(a, b);
            default: return 0.0;
        }
    }
};

class Parser {
public:
    explicit Parser(const std::string& s) : src_(s) {}

    NodePtr parse() {
        auto n = expression();
        skip_ws();
        if (pos_ != src_.size())
            throw InvalidProblem("expression: trailing input at '" + src_.substr(pos_) + "'");
        return n;
    }

private:
    const std::string& src_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr expression() {
        auto lhs = term();
        for (;;) {
            if (consume('+')) lhs = std::make_unique<Binary>('+', std::move(lhs), term());
            else if (consume('-')) lhs = std::make_unique<Binary>('-', std::move(lhs), term());
            else return lhs;
        }
    }

    NodePtr term() {
        auto lhs = factor();
        for (;;) {
            if (consume('*')) lhs = std::make_unique<Binary>('*', std::move(lhs), factor());
            else if (consume('/')) lhs = std::make_unique<Binary>('/', std::move(lhs), factor());
            else return lhs;
        }
    }

    NodePtr factor() {
        if (consume('-')) {
            auto n = factor();
            return std::make_unique<Binary>('-', std::make_unique<Const>(0.0), std::move(n));
        }
        consume('+');
        auto base = primary();
        if (consume('^')) {
            auto exp = factor();  // right associative
            return std::make_unique<Binary>('^', std::move(base), std::move(exp));
        }
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw InvalidProblem("expression: unexpected end of input");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            auto n = expression();
            if (!consume(')')) throw InvalidProblem("expression: missing ')'");
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw InvalidProblem(std::string("expression: unexpected character '") + c + "'");
    }

    NodePtr number() {
        size_t end = pos_;
        while (end < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.' ||
                src_[end] == 'e' || src_[end] == 'E' ||
                ((src_[end] == '+' || src_[end] == '-') && end > pos_ &&
                 (src_[end - 1] == 'e' || src_[end - 1] == 'E'))))
            ++end;
        const std::string tok = src_.substr(pos_, end - pos_);
        try {
            const double v = std::stod(tok);
            pos_ = end;
            return std::make_unique<Const>(v);
        } catch (const std::exception&) {
            throw InvalidProblem("expression: bad number '" + tok + "'");
        }
    }

    NodePtr identifier() {
        size_t end = pos_;
        while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
            ++end;
        const std::string name = src_.substr(pos_, end - pos_);
        pos_ = end;

        if (name == "x") return std::make_unique<Var>();
        if (name == "pi") return std::make_unique<Const>(pi);
        if (name == "e") return std::make_unique<Const>(std::exp(1.0));

        static const std::map<std::string, double (*)(double)> unary = {
            {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},
            {"exp", std::exp},   {"log", std::log},   {"sqrt", std::sqrt},
            {"abs", std::fabs},  {"sinh", std::sinh}, {"cosh", std::cosh},
            {"tanh", std::tanh}, {"atanh", std::atanh}, {"asinh", std::asinh},
            {"acosh", std::acosh}, {"atan", std::atan}, {"asin", std::asin},
            {"acos", std::acos},
        };

        if (!consume('('))
            throw InvalidProblem("expression: unknown identifier '" + name + "'");
        auto first = expression();
        if (auto it = unary.find(name); it != unary.end()) {
            if (!consume(')')) throw InvalidProblem("expression: missing ')' after " + name);
            return std::make_unique<Unary>(it->second, std::move(first));
        }
        if (name == "pow" || name == "min" || name == "max") {
            if (!consume(',')) throw InvalidProblem("expression: " + name + " needs two arguments");
            auto second = expression();
            if (!consume(')')) throw InvalidProblem("expression: missing ')' after " + name);
            const char op = name == "pow" ? '^' : (name == "min" ? 'm' : 'M');
            return std::make_unique<Binary>(op, std::move(first), std::move(second));
        }
        throw InvalidProblem("expression: unknown function '" + name + "'");
    }
};

}  // namespace

std::function<double(double)> compile_expression(const std::string& text) {
    Parser p(text);
    std::shared_ptr<Node> root{p.parse().release()};
    return [root](double x) { return root->eval(x); };
}

}  // namespace slx
