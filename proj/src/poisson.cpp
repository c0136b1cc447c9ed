#include "ssw/poisson.hpp"

#include <optional>

#include "ssw/derham.hpp"
#include "ssw/error.hpp"

namespace ssw {

namespace {

Scalar sgn(int e) { return (e % 2 == 0) ? Scalar(1) : Scalar(-1); }

// Parity-homogeneous parts of an element.
std::pair<Element, Element> by_parity(const Element& a) {
    Element even(a.table()), odd(a.table());
    const Table& t = *a.table();
    for (const auto& [m, c] : a.terms()) (monomial_parity(t, m) ? odd : even).add_term(m, c);
    return {even, odd};
}

int degree_of(const Element& f) {
    auto d = f.degree();
    if (!d) throw Error("NotHomogeneous", f.str() + " has no single degree");
    return *d;
}

}  // namespace

int shifted_parity(const Element& v) {
    auto p = v.parity();
    if (!p) throw Error("NotHomogeneous", v.str() + " has no single parity");
    return (*p + v.table()->shift() + 1) & 1;
}

Element schouten(const Element& v, const Element& w) {
    require_same_table(v, w);
    const auto& tp = v.table() ? v.table() : w.table();
    Element out(tp);
    if (!tp || v.is_zero() || w.is_zero()) return out;
    const Table& t = *tp;
    const int eps = (t.shift() + 1) & 1;
    auto [ve, vo] = by_parity(v);
    for (int pv = 0; pv < 2; ++pv) {
        const Element& part = pv ? vo : ve;
        if (part.is_zero()) continue;
        for (int a : t.ring_indices()) {
            int da = t[a].vec;
            int pa = t[a].parity;
            Element l1 = differentiate(part, a);
            if (!l1.is_zero()) {
                Element r1 = differentiate(w, da);
                if (!r1.is_zero()) out -= sgn((pv + eps) * pa) * (l1 * r1);
            }
            Element l2 = differentiate(part, da);
            if (!l2.is_zero()) {
                Element r2 = differentiate(w, a);
                if (!r2.is_zero()) out += sgn((pv + eps) * (pa + eps) + (pa + eps) * pa) * (l2 * r2);
            }
        }
    }
    return out;
}

ResidualList check_strict(const Cdga& c, const Element& pi) {
    return {{"d pi", c.d(pi)}, {"[pi, pi]", schouten(pi, pi)}};
}

StrictPoissonData bivector_from_darboux(const DarbouxInstance& inst) {
    const auto& t = inst.table;
    auto D = [&](const std::string& n) { return Element::generator(t, (*t)[t->index(n)].vec); };
    Element pi(t);
    for (const auto& L : inst.levels)
        for (std::size_t j = 0; j < L.x.size(); ++j) pi += D(L.x[j]) * D(L.y[j]);
    if (inst.variant != Variant::Darboux) {
        const Level& L0 = inst.levels.front();
        for (std::size_t j = 0; j < inst.z.size(); ++j) {
            Element qi = inst.q[j].unit_inverse();
            Element Dz = D(inst.z[j]);
            pi += Scalar(mpq_class(1, 4)) * qi * Dz * Dz;
            for (std::size_t jj = 0; jj < L0.x.size(); ++jj) {
                Element dq = differentiate(inst.q[j], L0.x[jj]);
                if (dq.is_zero()) continue;
                pi -= Scalar(mpq_class(1, 2)) * dq * inst.gen(inst.z[j]) * qi * Dz * D(L0.y[jj]);
            }
        }
    }
    StrictPoissonData s{t, inst.k, pi, check_strict(inst.A, pi)};
    return s;
}

Element bracket_from_bivector(const Element& pi, int k, const Element& f, const Element& g) {
    if (f.is_zero() || g.is_zero()) return Element(pi.table());
    return sgn(degree_of(f) + k + 1) * schouten(schouten(pi, f), g);
}

Element contraction_bracket(const Element& pi, int k, const Element& f, const Element& g) {
    if (f.is_zero() || g.is_zero()) return Element(pi.table());
    Element form = de_rham(f) * de_rham(g);
    if (form.is_zero()) return form;
    return sgn(degree_of(f) + k + 1) * contract(pi, form);
}

ResidualList check_bracket_table(const DarbouxInstance& inst, const Element& pi) {
    ResidualList out;
    struct G {
        std::string name;
        int level;
        bool is_y;
        std::size_t j;
    };
    std::vector<G> gens;
    for (const auto& L : inst.levels)
        for (std::size_t j = 0; j < L.x.size(); ++j) {
            gens.push_back({L.x[j], L.i, false, j});
            gens.push_back({L.y[j], L.i, true, j});
        }
    for (const auto& a : gens)
        for (const auto& b : gens) {
            Element expect(inst.table);
            if (a.level == b.level && a.j == b.j && a.is_y != b.is_y) {
                // {y, x} = (-1)^{i+1}; the reverse order by antisymmetry
                Scalar s = sgn(a.level + 1);
                if (!a.is_y) {
                    int fx = a.level + inst.k, fy = inst.k - a.level + inst.k;
                    s = -s * sgn(fx * fy);
                }
                expect = Element(inst.table, s);
            }
            Element got = bracket_from_bivector(pi, inst.k, inst.gen(a.name), inst.gen(b.name));
            out.push_back({"{" + a.name + "," + b.name + "}", got - expect});
        }
    return out;
}

ResidualList check_p_structure(const Cdga& c, const Bracket& br, int k, const std::vector<Element>& extra) {
    ResidualList out;
    const auto& t = c.table();
    std::vector<Element> els;
    std::vector<std::string> names;
    for (int g : t->ring_indices()) {
        els.push_back(Element::generator(t, g));
        names.push_back((*t)[g].name);
    }
    for (std::size_t e = 0; e < extra.size(); ++e) {
        if (extra[e].is_zero()) continue;
        els.push_back(extra[e]);
        names.push_back("e" + std::to_string(e + 1));
    }
    std::vector<int> deg;
    for (const auto& e : els) deg.push_back(degree_of(e));
    auto s = [&](int a, int b) { return sgn((a + k) * (b + k)); };
    const std::size_t n = els.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const Element &f = els[a], &g = els[b];
            int df = deg[a], dg = deg[b];
            std::string tag = "(" + names[a] + "," + names[b] + ")";
            Element fg = br(f, g);
            out.push_back({"antisymmetry" + tag, fg + s(df, dg) * br(g, f)});
            out.push_back({"d-compatibility" + tag,
                           c.d(fg) - br(c.d(f), g) - sgn(df + k) * br(f, c.d(g))});
            for (std::size_t e = 0; e < n; ++e) {
                const Element& h = els[e];
                std::string tag3 = "(" + names[a] + "," + names[b] + "," + names[e] + ")";
                out.push_back({"jacobi" + tag3, br(f, br(g, h)) - br(br(f, g), h) -
                                                    s(df, dg) * br(g, br(f, h))});
                out.push_back({"leibniz" + tag3,
                               br(f, g * h) - br(f, g) * h - sgn(dg * (df + k)) * (g * br(f, h))});
            }
        }
    return out;
}

Element CoisotropicData::apply(const Element& a) const {
    const Table& s = *source;
    std::vector<std::optional<Element>> img(s.size());
    for (const auto& [n, e] : images) img[s.index(n)] = e;
    return apply_morphism(a, [&](int i) { return img[i] ? &*img[i] : nullptr; }, target);
}

CoisotropicData coisotropic_from_lagrangian(const LagrangianInstance& inst) {
    const auto& t = inst.table;
    auto D = [&](const std::string& n) { return Element::generator(t, (*t)[t->index(n)].vec); };
    CoisotropicData c{inst.base.table, t, inst.k, Element(t), {}};
    for (const auto& L : inst.levels())
        for (std::size_t j = 0; j < L.u.size(); ++j) c.pi += D(L.u[j]) * D(L.v[j]);
    const auto& W = inst.shape.w;
    const LagLevel* top = nullptr;
    for (const auto& L : inst.levels())
        if (L.i == 0) top = &L;
    for (std::size_t j = 0; j < W.size(); ++j) {
        Element qi = inst.q[j].unit_inverse();
        Element Dw = D(W[j]);
        c.pi += Scalar(mpq_class(1, 4)) * qi * Dw * Dw;
        if (!top) continue;
        for (std::size_t jj = 0; jj < top->u.size(); ++jj) {
            Element dq = differentiate(inst.q[j], top->u[jj]);
            if (dq.is_zero()) continue;
            c.pi -= Scalar(mpq_class(1, 2)) * dq * inst.gen(W[j]) * qi * Dw * D(top->v[jj]);
        }
    }
    for (const auto& L : inst.base.levels)
        for (std::size_t j = 0; j < L.x.size(); ++j) {
            const std::string& xt = inst.shape.xt.at(L.x[j]);
            c.images[L.x[j]] = inst.alpha.image(L.x[j]);
            Element y = inst.alpha.image(L.y[j]) + sgn(L.i + 1) * D(xt);
            if (L.i == 0)
                for (std::size_t jj = 0; jj < W.size(); ++jj) {
                    Element dq = differentiate(inst.q[jj], xt);
                    if (dq.is_zero()) continue;
                    y += Scalar(mpq_class(1, 2)) * inst.q[jj].unit_inverse() * dq * inst.gen(W[jj]) * D(W[jj]);
                }
            c.images[L.y[j]] = y;
        }
    return c;
}

ResidualList check_coisotropic(const LagrangianInstance& inst, const CoisotropicData& data) {
    ResidualList out;
    const Cdga& B = inst.B;
    const Cdga& A = inst.base.A;
    out.push_back({"pi_B:d pi", B.d(data.pi)});
    out.push_back({"pi_B:[pi, pi]", schouten(data.pi, data.pi)});
    const Table& s = *data.source;
    for (int g : s.ring_indices()) {
        Element img = data.apply(Element::generator(data.source, g));
        Element lhs = B.d(img) + schouten(data.pi, img);
        out.push_back({"differential:" + s[g].name, lhs - data.apply(A.d(Element::generator(data.source, g)))});
        out.push_back({"projection:" + s[g].name, weight_part(img, 0, 0) - inst.alpha.image(s[g].name)});
    }
    Element piA = bivector_from_darboux(inst.base).pi;
    for (int a : s.ring_indices())
        for (int b : s.ring_indices()) {
            Element f = Element::generator(data.source, a), g = Element::generator(data.source, b);
            Element lhs = data.apply(bracket_from_bivector(piA, inst.k, f, g));
            Element rhs = schouten(data.apply(f), data.apply(g));
            out.push_back({"bracket:{" + s[a].name + "," + s[b].name + "}", rhs - lhs});
        }
    return out;
}

}  // namespace ssw
