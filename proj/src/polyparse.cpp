#include "heightlab/polyparse.hpp"

#include <cctype>

namespace heightlab {

ParseError::ParseError(std::size_t pos, const std::string& what)
    : std::runtime_error("parse error at position " + std::to_string(pos) + ": " + what), position(pos) {}

namespace {

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    QPoly parse() {
        QPoly r = expr();
        skip();
        if (i_ != s_.size()) throw ParseError(i_, std::string("unexpected '") + s_[i_] + "'");
        return r;
    }

private:
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool peek(char c) {
        skip();
        return i_ < s_.size() && s_[i_] == c;
    }

    QPoly expr() {
        QPoly r = term();
        for (;;) {
            if (peek('+')) {
                ++i_;
                r = r + term();
            } else if (peek('-')) {
                ++i_;
                r = r - term();
            } else {
                return r;
            }
        }
    }

    QPoly term() {
        QPoly r = unary();
        for (;;) {
            if (peek('*')) {
                ++i_;
                r = r * unary();
            } else if (peek('t') || peek('(')) {
                r = r * unary();
            } else {
                return r;
            }
        }
    }

    QPoly unary() {
        if (peek('-')) {
            ++i_;
            return -unary();
        }
        if (peek('+')) {
            ++i_;
            return unary();
        }
        return power();
    }

    QPoly power() {
        QPoly base = atom();
        if (!peek('^')) return base;
        ++i_;
        skip();
        std::size_t start = i_;
        Z e = integer();
        if (e > 100000) throw ParseError(start, "exponent too large");
        QPoly r = QPoly::constant(1);
        for (long k = 0; k < e.get_si(); ++k) r = r * base;
        return r;
    }

    Z integer() {
        skip();
        std::size_t start = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (start == i_) throw ParseError(start, i_ < s_.size() ? std::string("expected integer, got '") + s_[i_] + "'"
                                                                 : std::string("expected integer at end of input"));
        return Z(s_.substr(start, i_ - start));
    }

    QPoly atom() {
        skip();
        if (i_ >= s_.size()) throw ParseError(i_, "unexpected end of input");
        char c = s_[i_];
        if (c == 't') {
            ++i_;
            return QPoly::monomial(1, 1);
        }
        if (c == '(') {
            std::size_t open = i_++;
            QPoly r = expr();
            if (!peek(')')) throw ParseError(i_ < s_.size() ? i_ : open, "unbalanced parenthesis");
            ++i_;
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            Z num = integer();
            Z den = 1;
            if (peek('/')) {
                ++i_;
                std::size_t at = i_;
                den = integer();
                if (den == 0) throw ParseError(at, "zero denominator");
            }
            Q v(num, den);
            v.canonicalize();
            return QPoly::constant(v);
        }
        throw ParseError(i_, std::string("unexpected '") + c + "'");
    }

    const std::string& s_;
    std::size_t i_ = 0;
};

}  // namespace

QPoly parse_poly(const std::string& text) { return Parser(text).parse(); }

}  // namespace heightlab
