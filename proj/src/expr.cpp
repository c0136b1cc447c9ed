#include "ssw/expr.hpp"

#include <cctype>

#include "ssw/error.hpp"

namespace ssw {

namespace {

class Parser {
public:
    Parser(const std::string& s, const TablePtr& t) : s_(s), t_(t) {}

    Element run() {
        skip();
        if (pos_ == s_.size()) fail("SyntaxError", "empty expression");
        Element e = expr();
        skip();
        if (pos_ != s_.size()) fail("SyntaxError", std::string("unexpected '") + s_[pos_] + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& code, const std::string& msg) const {
        throw ParseError(code, msg, pos_);
    }
    [[noreturn]] void fail_at(const std::string& code, const std::string& msg, std::size_t at) const {
        throw ParseError(code, msg, at);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace((unsigned char)s_[pos_])) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    Element expr() {
        Element acc = term();
        while (true) {
            if (peek('+')) {
                ++pos_;
                acc += term();
            } else if (peek('-')) {
                ++pos_;
                acc -= term();
            } else {
                return acc;
            }
        }
    }

    Element term() {
        Element acc = unary();
        while (true) {
            if (peek('*')) {
                ++pos_;
                acc = acc * unary();
            } else if (peek('/')) {
                std::size_t at = pos_++;
                Element den = unary();
                if (den.is_zero()) fail_at("DivisionByZero", "division by zero", at);
                if (!den.is_unit()) fail_at("DivisionByNonUnit", "divisor '" + den.str() + "' is not a unit", at);
                acc = acc * den.unit_inverse();
            } else {
                return acc;
            }
        }
    }

    Element unary() {
        if (peek('-')) {
            ++pos_;
            return -unary();
        }
        return power();
    }

    Element power() {
        std::size_t at = pos_;
        auto [base, gen] = atom();
        if (!peek('^')) return base;
        ++pos_;
        skip();
        bool neg = false;
        if (pos_ < s_.size() && s_[pos_] == '-') {
            neg = true;
            ++pos_;
        }
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) ++pos_;
        if (start == pos_) fail("SyntaxError", "expected integer exponent");
        if (pos_ - start > 6) fail_at("SyntaxError", "exponent too large", start);
        long e = std::stol(s_.substr(start, pos_ - start));
        if (neg) e = -e;
        if (gen >= 0) {
            const auto& g = (*t_)[gen];
            if (e < 0 && !g.invertible) fail_at("NegativePower", "'" + g.name + "' is not invertible", at);
            if (e >= 2 && g.parity) fail_at("OddPower", "'" + g.name + "' is odd", at);
            return Element::generator(t_, gen, (int)e);
        }
        auto par = base.parity();
        if (e >= 2 && par && *par == 1) fail_at("OddPower", "odd factor raised to a power", at);
        if (e < 0 && !base.is_unit()) fail_at("NegativePower", "'" + base.str() + "' is not a unit", at);
        return base.pow(e);
    }

    std::string ident() {
        std::size_t start = pos_;
        if (pos_ < s_.size() && (std::isalpha((unsigned char)s_[pos_]) || s_[pos_] == '_')) {
            ++pos_;
            while (pos_ < s_.size() && (std::isalnum((unsigned char)s_[pos_]) || s_[pos_] == '_')) ++pos_;
        }
        return s_.substr(start, pos_ - start);
    }

    std::pair<Element, int> atom() {
        skip();
        if (pos_ == s_.size()) fail("SyntaxError", "unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Element e = expr();
            if (!peek(')')) fail("SyntaxError", "expected ')'");
            ++pos_;
            return {e, -1};
        }
        if (std::isdigit((unsigned char)c)) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) ++pos_;
            return {Element(t_, Scalar(mpq_class(mpz_class(s_.substr(start, pos_ - start))))), -1};
        }
        std::size_t at = pos_;
        std::string id = ident();
        if (id.empty()) fail("SyntaxError", std::string("unexpected '") + c + "'");
        if ((id == "d" || id == "D") && pos_ < s_.size() && s_[pos_] == '(') {
            ++pos_;
            skip();
            std::string inner = ident();
            if (inner.empty()) fail("SyntaxError", "expected generator name");
            skip();
            if (pos_ >= s_.size() || s_[pos_] != ')') fail("SyntaxError", "expected ')'");
            ++pos_;
            id = id + "(" + inner + ")";
        }
        auto idx = t_->find(id);
        if (!idx) {
            if (id == "i" && t_->gaussian()) return {Element(t_, Scalar::i()), -1};
            fail_at("UnknownGenerator", "no generator named '" + id + "'", at);
        }
        return {Element::generator(t_, *idx), *idx};
    }

    const std::string& s_;
    TablePtr t_;
    std::size_t pos_ = 0;
};

}  // namespace

Element parse(const std::string& text, const TablePtr& table) { return Parser(text, table).run(); }

}  // namespace ssw
