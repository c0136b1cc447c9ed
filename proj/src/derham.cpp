#include "ssw/derham.hpp"

#include "ssw/error.hpp"

namespace ssw {

Element de_rham(const Element& a) {
    if (!a.table()) return a;
    const auto& t = a.table();
    std::vector<std::optional<Element>> img(t->size());
    for (std::size_t i = 0; i < t->size(); ++i)
        if ((*t)[i].kind == GenKind::Ring) img[i] = Element::generator(t, (*t)[i].dr);
    return apply_derivation(a, [&](int i) { return img[i] ? &*img[i] : nullptr; });
}

Element weight_part(const Element& a, int form_weight, int vec_weight) {
    Element r(a.table());
    if (!a.table()) return r;
    const Table& t = *a.table();
    for (const auto& [m, c] : a.terms()) {
        int fw = 0, vw = 0;
        for (const auto& f : m) {
            fw += t[f.var].form_degree * f.exp;
            vw += t[f.var].vec_weight * f.exp;
        }
        if (fw == form_weight && vw == vec_weight) r.add_term(m, c);
    }
    return r;
}

namespace {

// Split a monomial into its vector-symbol part and the rest, returning the
// Koszul sign of rest * vec relative to the canonical monomial.
struct Split {
    Monomial vec, rest;
    int sign = 0;
};

Split split_vec(const Table& t, const Monomial& m) {
    Split s;
    for (const auto& f : m) (t[f.var].kind == GenKind::Vec ? s.vec : s.rest).push_back(f);
    auto p = mono_mul(t, s.rest, s.vec);
    s.sign = p ? p->first : 0;
    return s;
}

}  // namespace

Element contract(const Element& polyvector, const Element& form) {
    require_same_table(polyvector, form);
    const auto& tp = polyvector.table() ? polyvector.table() : form.table();
    Element out(tp);
    if (!tp || polyvector.is_zero() || form.is_zero()) return out;
    const Table& t = *tp;
    auto vw = polyvector.vec_weight();
    auto fw = form.form_degree();
    if (!vw || !fw || *vw != *fw)
        throw Error("WeightMismatch", "polyvector and form weights differ");
    for (const auto& [mp, cp] : polyvector.terms()) {
        Split s = split_vec(t, mp);
        // innermost symbol first
        std::vector<int> order;
        for (const auto& f : s.vec)
            for (int e = 0; e < f.exp; ++e) order.push_back(t[f.var].base);
        Element acc = form;
        for (auto it = order.rbegin(); it != order.rend() && !acc.is_zero(); ++it)
            acc = differentiate(acc, t[*it].dr);
        if (acc.is_zero()) continue;
        Element coef(tp);
        coef.add_term(s.rest, s.sign ? -cp : cp);
        int n = (int)order.size();
        int vpar = monomial_parity(t, s.vec);
        Element term = coef * acc;
        if ((t.shift() & 1) && (n * (n - 1) / 2) % 2 == 1 && vpar == 0) term = -term;
        out += term;
    }
    return out;
}

}  // namespace ssw
