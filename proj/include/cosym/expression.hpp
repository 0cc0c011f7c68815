#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cosym/dual.hpp"
#include "cosym/errors.hpp"

namespace cosym {

/// Arithmetic expression over named variables: +, -, *, /, ^ with sin, cos,
/// exp, log, sqrt, abs, round, min, max and the constant pi. Evaluates at any
/// dual level, which is what lets file-defined fields be differentiated.
class Expr {
public:
    enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, PowInt, PowReal, Call };
    enum class Fn { Sin, Cos, Exp, Log, Sqrt, Abs, Round, Min, Max };

    using Ptr = std::shared_ptr<const Expr>;

    Kind kind;
    double number = 0.0;
    int var_index = -1;
    long long int_exponent = 0;
    Fn fn = Fn::Sin;
    std::vector<Ptr> args;

    template <class S>
    S eval(std::span<const S> vars) const {
        switch (kind) {
            case Kind::Number:
                return S(number);
            case Kind::Var:
                return vars[static_cast<size_t>(var_index)];
            case Kind::Neg:
                return -args[0]->eval(vars);
            case Kind::Add:
                return args[0]->eval(vars) + args[1]->eval(vars);
            case Kind::Sub:
                return args[0]->eval(vars) - args[1]->eval(vars);
            case Kind::Mul:
                return args[0]->eval(vars) * args[1]->eval(vars);
            case Kind::Div:
                return args[0]->eval(vars) / args[1]->eval(vars);
            case Kind::PowInt:
                return powi(args[0]->eval(vars), int_exponent);
            case Kind::PowReal:
                return pow_real(args[0]->eval(vars), args[1]->number);
            case Kind::Call:
                return eval_call(vars);
        }
        throw Error("Expr: unreachable");
    }

private:
    template <class S>
    S eval_call(std::span<const S> vars) const {
        switch (fn) {
            case Fn::Sin:
                return sin(args[0]->eval(vars));
            case Fn::Cos:
                return cos(args[0]->eval(vars));
            case Fn::Exp:
                return exp(args[0]->eval(vars));
            case Fn::Log:
                return log(args[0]->eval(vars));
            case Fn::Sqrt:
                return sqrt(args[0]->eval(vars));
            case Fn::Abs:
                return abs(args[0]->eval(vars));
            case Fn::Round: {
                // Piecewise constant: value rounds, derivative parts vanish.
                return S(std::round(value_of(args[0]->eval(vars))));
            }
            case Fn::Min: {
                S best = args[0]->eval(vars);
                for (size_t i = 1; i < args.size(); ++i) {
                    S v = args[i]->eval(vars);
                    if (value_of(v) < value_of(best)) best = v;
                }
                return best;
            }
            case Fn::Max: {
                S best = args[0]->eval(vars);
                for (size_t i = 1; i < args.size(); ++i) {
                    S v = args[i]->eval(vars);
                    if (value_of(v) > value_of(best)) best = v;
                }
                return best;
            }
        }
        throw Error("Expr: unreachable call");
    }
};

namespace detail {

class ExprParser {
public:
    ExprParser(std::string text, const std::vector<std::string>& vars,
               const std::map<std::string, double>& constants)
        : text_(std::move(text)), vars_(vars), constants_(constants) {}

    Expr::Ptr parse() {
        Expr::Ptr e = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << "expression error at column " << (pos_ + 1) << ": " << msg << " in \"" << text_
           << "\"";
        throw ParseError(os.str());
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    static Expr::Ptr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

    static Expr::Ptr binary(Expr::Kind kind, Expr::Ptr a, Expr::Ptr b) {
        Expr e;
        e.kind = kind;
        e.args = {std::move(a), std::move(b)};
        return make(std::move(e));
    }

    Expr::Ptr parse_sum() {
        Expr::Ptr lhs = parse_product();
        for (;;) {
            if (consume('+'))
                lhs = binary(Expr::Kind::Add, lhs, parse_product());
            else if (consume('-'))
                lhs = binary(Expr::Kind::Sub, lhs, parse_product());
            else
                return lhs;
        }
    }

    Expr::Ptr parse_product() {
        Expr::Ptr lhs = parse_unary();
        for (;;) {
            if (consume('*'))
                lhs = binary(Expr::Kind::Mul, lhs, parse_unary());
            else if (consume('/'))
                lhs = binary(Expr::Kind::Div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    Expr::Ptr parse_unary() {
        if (consume('-')) {
            Expr e;
            e.kind = Expr::Kind::Neg;
            e.args = {parse_unary()};
            return make(std::move(e));
        }
        return parse_power();
    }

    Expr::Ptr parse_power() {
        Expr::Ptr base = parse_atom();
        if (!consume('^')) return base;
        // Right-associative; exponents are numeric literals (optionally
        // negated), integer exponents use exact repeated squaring.
        bool neg = consume('-');
        Expr::Ptr expo = parse_atom();
        if (expo->kind != Expr::Kind::Number)
            fail("exponent must be a numeric literal");
        double value = neg ? -expo->number : expo->number;
        if (value == std::round(value) && std::abs(value) < 1e15) {
            Expr e;
            e.kind = Expr::Kind::PowInt;
            e.int_exponent = static_cast<long long>(std::llround(value));
            e.args = {std::move(base)};
            return make(std::move(e));
        }
        Expr num;
        num.kind = Expr::Kind::Number;
        num.number = value;
        Expr e;
        e.kind = Expr::Kind::PowReal;
        e.args = {std::move(base), make(std::move(num))};
        return make(std::move(e));
    }

    Expr::Ptr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];

        if (c == '(') {
            ++pos_;
            Expr::Ptr inner = parse_sum();
            if (!consume(')')) fail("missing ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr::Ptr parse_number() {
        size_t end = pos_;
        auto digits = [&] {
            while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
        };
        digits();
        if (end < text_.size() && text_[end] == '.') {
            ++end;
            digits();
        }
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            size_t mark = end + 1;
            if (mark < text_.size() && (text_[mark] == '+' || text_[mark] == '-')) ++mark;
            if (mark < text_.size() && std::isdigit(static_cast<unsigned char>(text_[mark]))) {
                end = mark;
                digits();
            }
        }
        Expr e;
        e.kind = Expr::Kind::Number;
        e.number = std::stod(text_.substr(pos_, end - pos_));
        pos_ = end;
        return make(std::move(e));
    }

    Expr::Ptr parse_name() {
        size_t end = pos_;
        while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                      text_[end] == '_'))
            ++end;
        const std::string name = text_.substr(pos_, end - pos_);
        pos_ = end;

        static const std::map<std::string, Expr::Fn> kFns = {
            {"sin", Expr::Fn::Sin},   {"cos", Expr::Fn::Cos}, {"exp", Expr::Fn::Exp},
            {"log", Expr::Fn::Log},   {"sqrt", Expr::Fn::Sqrt}, {"abs", Expr::Fn::Abs},
            {"round", Expr::Fn::Round}, {"min", Expr::Fn::Min}, {"max", Expr::Fn::Max}};

        if (auto it = kFns.find(name); it != kFns.end()) {
            if (!consume('(')) fail("function '" + name + "' needs arguments");
            Expr e;
            e.kind = Expr::Kind::Call;
            e.fn = it->second;
            e.args.push_back(parse_sum());
            while (consume(',')) e.args.push_back(parse_sum());
            if (!consume(')')) fail("missing ')' after arguments of '" + name + "'");
            const size_t n = e.args.size();
            const bool variadic = it->second == Expr::Fn::Min || it->second == Expr::Fn::Max;
            if ((variadic && n < 2) || (!variadic && n != 1))
                fail("wrong argument count for '" + name + "'");
            return make(std::move(e));
        }

        if (name == "pi") {
            Expr e;
            e.kind = Expr::Kind::Number;
            e.number = 3.14159265358979323846;
            return make(std::move(e));
        }
        if (auto it = constants_.find(name); it != constants_.end()) {
            Expr e;
            e.kind = Expr::Kind::Number;
            e.number = it->second;
            return make(std::move(e));
        }
        for (size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i] == name) {
                Expr e;
                e.kind = Expr::Kind::Var;
                e.var_index = static_cast<int>(i);
                return make(std::move(e));
            }
        }
        fail("unknown name '" + name + "'");
    }

    std::string text_;
    const std::vector<std::string>& vars_;
    const std::map<std::string, double>& constants_;
    size_t pos_ = 0;
};

} // namespace detail

inline Expr::Ptr parse_expression(const std::string& text, const std::vector<std::string>& vars,
                                  const std::map<std::string, double>& constants = {}) {
    return detail::ExprParser(text, vars, constants).parse();
}

} // namespace cosym
