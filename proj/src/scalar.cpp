#include "ssw/scalar.hpp"

#include "ssw/error.hpp"

namespace ssw {

Scalar Scalar::from_string(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw Error("BadRational", "cannot read rational '" + s + "'");
    if (s.find('/') != std::string::npos) {
        auto den = s.substr(s.find('/') + 1);
        if (mpz_class(den) == 0) throw Error("DivisionByZero", "zero denominator in '" + s + "'");
    }
    q.canonicalize();
    return Scalar(q);
}

Scalar& Scalar::operator*=(const Scalar& o) {
    if (is_real() && o.is_real()) {
        re_ *= o.re_;
        return *this;
    }
    mpq_class r = re_ * o.re_ - im_ * o.im_;
    mpq_class m = re_ * o.im_ + im_ * o.re_;
    re_ = r;
    im_ = m;
    return *this;
}

Scalar Scalar::inverse() const {
    if (is_zero()) throw Error("DivisionByZero", "inverse of zero");
    if (is_real()) return Scalar(mpq_class(1) / re_);
    mpq_class n = re_ * re_ + im_ * im_;
    return Scalar(re_ / n, -im_ / n);
}

Scalar& Scalar::operator/=(const Scalar& o) { return *this *= o.inverse(); }

Scalar Scalar::pow(long e) const {
    if (e < 0) return inverse().pow(-e);
    Scalar r(1), b(*this);
    while (e) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

std::string Scalar::str() const {
    if (is_real()) return re_.get_str();
    std::string s = "(";
    if (sgn(re_) != 0) {
        s += re_.get_str();
        if (sgn(im_) > 0) s += "+";
    }
    if (im_ == 1)
        s += "i";
    else if (im_ == -1)
        s += "-i";
    else
        s += im_.get_str() + "*i";
    return s + ")";
}

}  // namespace ssw
