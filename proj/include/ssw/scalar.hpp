#pragma once

#include <gmpxx.h>

#include <string>

namespace ssw {

// Exact Gaussian rational re + im*i. Over Q the imaginary part stays zero.
class Scalar {
public:
    Scalar() = default;
    Scalar(long v) : re_(v) {}
    Scalar(const mpq_class& re) : re_(re) { re_.canonicalize(); }
    Scalar(const mpq_class& re, const mpq_class& im) : re_(re), im_(im) {
        re_.canonicalize();
        im_.canonicalize();
    }

    static Scalar from_string(const std::string& s);  // "p/q" or "p"
    static Scalar i() { return Scalar(mpq_class(0), mpq_class(1)); }

    const mpq_class& re() const { return re_; }
    const mpq_class& im() const { return im_; }

    bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
    bool is_real() const { return sgn(im_) == 0; }
    bool is_one() const { return re_ == 1 && sgn(im_) == 0; }

    Scalar operator-() const { return Scalar(-re_, -im_); }
    Scalar& operator+=(const Scalar& o) {
        re_ += o.re_;
        im_ += o.im_;
        return *this;
    }
    Scalar& operator-=(const Scalar& o) {
        re_ -= o.re_;
        im_ -= o.im_;
        return *this;
    }
    Scalar& operator*=(const Scalar& o);
    Scalar& operator/=(const Scalar& o);

    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
    friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
    friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }
    friend bool operator==(const Scalar& a, const Scalar& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

    Scalar inverse() const;
    Scalar pow(long e) const;

    // Canonical text. Non-real values are parenthesized: "(1/2+3*i)".
    std::string str() const;
    // True when str() would start with '-' (used by the printer for sign folding).
    bool prints_negative() const { return is_real() && sgn(re_) < 0; }

private:
    mpq_class re_{0};
    mpq_class im_{0};
};

}  // namespace ssw
