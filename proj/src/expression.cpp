// SPDX-License-Identifier: Apache-2.0
#include "caporch/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace caporch {

std::string_view to_string(ExpressionErrorKind k) {
    switch (k) {
        case ExpressionErrorKind::ParseError: return "ParseError";
        case ExpressionErrorKind::DivisionByZero: return "DivisionByZero";
        case ExpressionErrorKind::DomainError: return "DomainError";
    }
    return "?";
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    double parse() {
        const double value = expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return value;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ExpressionError(ExpressionErrorKind::ParseError,
                              what + " at offset " + std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(std::string_view token) {
        skip_space();
        if (text_.compare(pos_, token.size(), token) == 0) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view token) {
        if (!accept(token)) fail("expected '" + std::string(token) + "'");
    }

    double expr() {
        double value = term();
        while (true) {
            if (accept("+")) {
                value += term();
            } else if (accept("-")) {
                value -= term();
            } else {
                return value;
            }
        }
    }

    double term() {
        double value = unary();
        while (true) {
            if (accept("*") || accept("\xC3\x97")) {  // ×
                value *= unary();
            } else if (accept("/") || accept("\xC3\xB7")) {  // ÷
                const double divisor = unary();
                if (divisor == 0.0) {
                    throw ExpressionError(ExpressionErrorKind::DivisionByZero, "division by zero");
                }
                value /= divisor;
            } else {
                return value;
            }
        }
    }

    double unary() {
        if (accept("-")) return -unary();
        if (accept("+")) return unary();
        return power();
    }

    double power() {
        const double base = primary();
        if (!accept("^")) return base;
        const double exponent = unary();
        if (base == 0.0 && exponent < 0.0) {
            throw ExpressionError(ExpressionErrorKind::DivisionByZero, "zero raised to a negative power");
        }
        if (base < 0.0 && exponent != std::floor(exponent)) {
            throw ExpressionError(ExpressionErrorKind::DomainError,
                                  "negative base with fractional exponent");
        }
        return std::pow(base, exponent);
    }

    double primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            const double value = expr();
            expect(")");
            return value;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return call();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    double number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    ++pos_;
                }
            }
        }
        double value = 0.0;
        const auto* first = text_.data() + start;
        const auto* last = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last) {
            pos_ = start;
            fail("malformed number");
        }
        return value;
    }

    double call() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        if (name == "pi") return std::numbers::pi;
        expect("(");
        std::vector<double> args;
        if (!accept(")")) {
            args.push_back(expr());
            while (accept(",")) args.push_back(expr());
            expect(")");
        }
        auto arity = [&](std::size_t n) {
            if (args.size() != n) fail(name + " takes " + std::to_string(n) + " argument(s)");
        };
        if (name == "sqrt") {
            arity(1);
            if (args[0] < 0.0) {
                throw ExpressionError(ExpressionErrorKind::DomainError, "sqrt of a negative number");
            }
            return std::sqrt(args[0]);
        }
        if (name == "abs") {
            arity(1);
            return std::abs(args[0]);
        }
        if (name == "sin") {
            arity(1);
            return std::sin(args[0]);
        }
        if (name == "cos") {
            arity(1);
            return std::cos(args[0]);
        }
        if (name == "min" || name == "max") {
            if (args.size() < 2) fail(name + " takes at least 2 arguments");
            double out = args[0];
            for (double a : args) out = name == "min" ? std::min(out, a) : std::max(out, a);
            return out;
        }
        pos_ = start;
        fail("unknown function '" + name + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

double eval_expression(std::string_view text) {
    const double value = Parser(text).parse();
    if (!std::isfinite(value)) {
        throw ExpressionError(ExpressionErrorKind::DomainError, "result is not finite");
    }
    return value;
}

}  // namespace caporch
