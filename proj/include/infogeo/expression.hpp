#pragma once

// Minimal arithmetic expressions for user-supplied potentials and constraints.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: exp, log, sqrt, pow. The constant pi is predefined.

#include "infogeo/errors.hpp"
#include "infogeo/jet.hpp"
#include "infogeo/scalar_field.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace infogeo {

class Expression
{
public:
    /// Parses `text` with the given variable names; throws ConfigError with the column of the problem.
    static Expression parse(const std::string& text, std::vector<std::string> variables)
    {
        Parser p{text, variables, 0};
        auto root = p.expr();
        p.skip_space();
        if (p.pos != text.size())
            p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
        Expression e;
        e.text_ = text;
        e.variables_ = std::move(variables);
        e.root_ = std::move(root);
        return e;
    }

    const std::string& text() const noexcept { return text_; }
    const std::vector<std::string>& variables() const noexcept { return variables_; }

    template <class T>
    T evaluate(std::span<const T> x) const
    {
        if (x.size() != variables_.size())
            throw InvalidArgument("expression expects " + std::to_string(variables_.size()) + " variables");
        return eval<T>(*root_, x);
    }

    ScalarField to_field(Domain domain) const
    {
        const auto self = std::make_shared<Expression>(*this);
        return ScalarField::from_generic(variables_.size(), std::move(domain),
                                         [self](auto x) { return self->evaluate<scalar_of<decltype(x)>>(x); });
    }

    Expression() = default;

private:
    enum class Op { number, variable, add, sub, mul, div, neg, pow, exp, log, sqrt };

    struct Node
    {
        Op op = Op::number;
        double number = 0.0;
        std::size_t variable = 0;
        std::shared_ptr<const Node> a, b;
    };
    using NodePtr = std::shared_ptr<const Node>;

    struct Parser
    {
        const std::string& s;
        const std::vector<std::string>& vars;
        std::size_t pos;

        [[noreturn]] void fail(const std::string& what) const
        {
            throw ConfigError("expression column " + std::to_string(pos + 1) + ": " + what + " in \"" + s + "\"");
        }

        void skip_space()
        {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
                ++pos;
        }

        bool accept(char c)
        {
            skip_space();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        void expect(char c)
        {
            if (!accept(c))
                fail(std::string("expected '") + c + "'");
        }

        static NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr)
        {
            auto n = std::make_shared<Node>();
            n->op = op;
            n->a = std::move(a);
            n->b = std::move(b);
            return n;
        }

        NodePtr expr()
        {
            auto lhs = term();
            while (true) {
                if (accept('+'))
                    lhs = make(Op::add, lhs, term());
                else if (accept('-'))
                    lhs = make(Op::sub, lhs, term());
                else
                    return lhs;
            }
        }

        NodePtr term()
        {
            auto lhs = unary();
            while (true) {
                if (accept('*'))
                    lhs = make(Op::mul, lhs, unary());
                else if (accept('/'))
                    lhs = make(Op::div, lhs, unary());
                else
                    return lhs;
            }
        }

        NodePtr unary()
        {
            if (accept('-'))
                return make(Op::neg, unary());
            if (accept('+'))
                return unary();
            return power();
        }

        NodePtr power()
        {
            auto base = primary();
            if (accept('^'))
                return make(Op::pow, base, unary());
            return base;
        }

        NodePtr primary()
        {
            skip_space();
            if (pos >= s.size())
                fail("unexpected end of expression");
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = s.c_str() + pos;
                char* end = nullptr;
                const double v = std::strtod(begin, &end);
                if (end == begin)
                    fail("malformed number");
                pos += static_cast<std::size_t>(end - begin);
                auto n = std::make_shared<Node>();
                n->number = v;
                return n;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const auto start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                    ++pos;
                const std::string name = s.substr(start, pos - start);
                if (accept('('))
                    return call(name);
                for (std::size_t i = 0; i < vars.size(); ++i)
                    if (vars[i] == name) {
                        auto n = std::make_shared<Node>();
                        n->op = Op::variable;
                        n->variable = i;
                        return n;
                    }
                if (name == "pi") {
                    auto n = std::make_shared<Node>();
                    n->number = std::numbers::pi;
                    return n;
                }
                pos = start;
                fail("unknown identifier '" + name + "'");
            }
            if (accept('(')) {
                auto inner = expr();
                expect(')');
                return inner;
            }
            fail(std::string("unexpected '") + c + "'");
        }

        NodePtr call(const std::string& name)
        {
            auto first = expr();
            if (name == "pow") {
                expect(',');
                auto second = expr();
                expect(')');
                return make(Op::pow, first, second);
            }
            expect(')');
            if (name == "exp")
                return make(Op::exp, first);
            if (name == "log")
                return make(Op::log, first);
            if (name == "sqrt")
                return make(Op::sqrt, first);
            fail("unknown function '" + name + "'");
        }
    };

    template <class T>
    static T eval(const Node& n, std::span<const T> x)
    {
        using std::exp, std::log, std::sqrt, std::pow;
        switch (n.op) {
        case Op::number: return T(n.number);
        case Op::variable: return x[n.variable];
        case Op::add: return eval(*n.a, x) + eval(*n.b, x);
        case Op::sub: return eval(*n.a, x) - eval(*n.b, x);
        case Op::mul: return eval(*n.a, x) * eval(*n.b, x);
        case Op::div: return eval(*n.a, x) / eval(*n.b, x);
        case Op::neg: return -eval(*n.a, x);
        case Op::pow:
            if (n.b->op == Op::number)
                return pow(eval(*n.a, x), n.b->number);
            return pow(eval(*n.a, x), eval(*n.b, x));
        case Op::exp: return exp(eval(*n.a, x));
        case Op::log: return log(eval(*n.a, x));
        case Op::sqrt: return sqrt(eval(*n.a, x));
        }
        return T(0.0);
    }

    std::string text_;
    std::vector<std::string> variables_;
    NodePtr root_;
};

} // namespace infogeo
