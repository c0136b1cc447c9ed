#include "ssw/lagrangian.hpp"

#include <algorithm>
#include <functional>
#include <random>

#include "ssw/derham.hpp"
#include "ssw/error.hpp"
#include "ssw/expr.hpp"
#include "ssw/linalg.hpp"

namespace ssw {

namespace {

Scalar sgn(int e) { return (e % 2 == 0) ? Scalar(1) : Scalar(-1); }
int par(int e) { return ((e % 2) + 2) % 2; }

void require_degree(const Element& e, int deg, const std::string& what) {
    if (e.is_zero()) return;
    auto d = e.degree();
    if (!d || *d != deg || e.form_degree().value_or(1) != 0 || e.vec_weight().value_or(1) != 0)
        throw Error("DegreeMismatch", what + " = " + e.str() + " is not a function of degree " +
                                          std::to_string(deg));
}

Element half_inverse(const Element& q) { return q.unit_inverse() * Scalar(mpq_class(1, 2)); }

Element d_of(const Cdga& c, const std::string& g) {
    const Element* img = c.d_gen(c.table()->index(g));
    return img ? *img : Element(c.table());
}

void fail_on(const ResidualList& r, const std::string& code) {
    for (const auto& x : r)
        if (!x.ok()) throw Error(code, x.label + " residual " + x.value.str(), x.value.str());
}

// Right coefficient of d_dR(g) in a one-form: form = sum c * d_dR(g) + ...
Element right_coefficient(const Element& form, int g) {
    if (form.is_zero()) return form;
    const Table& t = *form.table();
    int dg = t[g].dr;
    int pd = t[dg].parity;
    int pc = par(form.parity().value() - pd);
    return differentiate(form, dg) * sgn(pd * pc);
}

// Monomials of a given form weight and degree whose ring exponents sum to at
// most `bound`; unit exponents are kept nonnegative.
std::vector<Monomial> monomials(const Table& t, int weight, int degree, int bound,
                                const std::vector<int>& allowed) {
    std::vector<Monomial> out;
    Monomial cur;
    std::function<void(std::size_t, int, int, int)> rec = [&](std::size_t pos, int w, int deg, int budget) {
        if (pos == allowed.size()) {
            if (w == weight && deg == degree) out.push_back(cur);
            return;
        }
        int g = allowed[pos];
        const Generator& G = t[g];
        bool form = G.kind == GenKind::Dr;
        int maxe = G.parity ? 1 : (form ? weight - w : budget);
        if (form) maxe = std::min(maxe, weight - w);
        for (int ex = 0; ex <= maxe; ++ex) {
            int nd = deg + ex * G.degree;
            if (nd < degree) break;
            if (ex > 0) cur.push_back({(std::uint32_t)g, ex});
            rec(pos + 1, w + (form ? ex : 0), nd, budget - (form ? 0 : ex));
            if (ex > 0) cur.pop_back();
            if (!form && ex + 1 > budget) break;
        }
    };
    rec(0, 0, 0, bound);
    return out;
}

std::vector<int> ring_and_forms(const Table& t) {
    std::vector<int> r;
    for (std::size_t g = 0; g < t.size(); ++g)
        if (t[g].kind != GenKind::Vec) r.push_back((int)g);
    return r;
}

Element from_monomial(const TablePtr& t, const Monomial& m, const Scalar& c = Scalar(1)) {
    Element e(t);
    e.add_term(m, c);
    return e;
}

using EMatrix = std::vector<std::vector<Element>>;

Element determinant(const EMatrix& m, const TablePtr& t) {
    std::size_t n = m.size();
    if (n == 0) return Element(t, Scalar(1));
    if (n == 1) return m[0][0];
    Element det(t);
    for (std::size_t c = 0; c < n; ++c) {
        if (m[0][c].is_zero()) continue;
        EMatrix minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<Element> row;
            for (std::size_t cc = 0; cc < n; ++cc)
                if (cc != c) row.push_back(m[r][cc]);
            minor.push_back(row);
        }
        det += sgn((int)c) * m[0][c] * determinant(minor, t);
    }
    return det;
}

EMatrix inverse(const EMatrix& m, const TablePtr& t, const std::string& what) {
    std::size_t n = m.size();
    Element det = determinant(m, t);
    if (!det.is_unit()) throw Error("BMatrixNotUnit", what + " has determinant " + det.str(), det.str());
    Element di = det.unit_inverse();
    EMatrix inv(n, std::vector<Element>(n, Element(t)));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            EMatrix minor;
            for (std::size_t rr = 0; rr < n; ++rr) {
                if (rr == c) continue;
                std::vector<Element> row;
                for (std::size_t cc = 0; cc < n; ++cc)
                    if (cc != r) row.push_back(m[rr][cc]);
                minor.push_back(row);
            }
            inv[r][c] = sgn((int)(r + c)) * determinant(minor, t) * di;
        }
    return inv;
}

// Given F: v -> F(v), block triangular in the v's with degree-0 diagonal
// blocks, returns G with F(G(v)) = v. Levels are solved from the most
// negative i upward.
std::map<std::string, Element> invert_v_change(const LagrangianShape& sh,
                                               const std::map<std::string, Element>& F) {
    const auto& t = sh.table;
    std::map<std::string, Element> G;
    std::vector<LagLevel> order = sh.levels;
    std::sort(order.begin(), order.end(), [](const LagLevel& a, const LagLevel& b) { return a.i < b.i; });
    for (const auto& L : order) {
        std::size_t n = L.v.size();
        if (n == 0) continue;
        EMatrix D(n, std::vector<Element>(n, Element(t)));
        std::vector<Element> R;
        for (std::size_t j = 0; j < n; ++j) {
            const Element& f = F.at(L.v[j]);
            Element rest = f;
            for (std::size_t jj = 0; jj < n; ++jj) {
                D[j][jj] = differentiate(f, L.v[jj]);
                rest -= D[j][jj] * Element::generator(t, L.v[jj]);
            }
            R.push_back(rest);
        }
        std::map<std::string, Element> partial = G;
        Morphism sub(t, t, partial);
        EMatrix Di = inverse(D, t, "b-matrix at level " + std::to_string(L.i));
        for (std::size_t j = 0; j < n; ++j) {
            Element g(t);
            for (std::size_t jj = 0; jj < n; ++jj)
                g += Di[j][jj] * (Element::generator(t, L.v[jj]) - sub.apply(R[jj]));
            G[L.v[j]] = g;
        }
    }
    return G;
}

// cdga differential transported along a change of coordinates: phi maps old
// expressions to new ones, F = phi^{-1} on the changed generators.
std::map<std::string, Element> conjugate_differential(const Cdga& B, const Morphism& phi,
                                                      const std::map<std::string, Element>& F) {
    std::map<std::string, Element> diff;
    const auto& t = B.table();
    for (int g : t->ring_indices()) {
        const std::string& name = (*t)[g].name;
        auto it = F.find(name);
        Element img = it != F.end() ? B.d(it->second) : d_of(B, name);
        Element v = phi.apply(img);
        if (!v.is_zero()) diff[name] = v;
    }
    return diff;
}

Morphism compose(const Morphism& phi, const Morphism& alpha, const Cdga& A) {
    std::map<std::string, Element> img;
    for (int g : A.table()->ring_indices()) {
        const std::string& name = (*A.table())[g].name;
        img[name] = phi.apply(alpha.image(name));
    }
    return Morphism(A.table(), phi.target(), img);
}

struct Expansion {
    std::map<std::string, Element> a, b, c;  // keyed by x~, u, v
    Element residual;
};

// psi' = sum a d_dR x~ + sum b d_dR u + sum c d_dR v
Expansion expand(const LagrangianShape& sh, const DarbouxInstance& base, const Element& form) {
    const auto& t = sh.table;
    Expansion ex;
    ex.residual = form;
    auto take = [&](const std::string& g, std::map<std::string, Element>& into) {
        int idx = t->index(g);
        Element c = right_coefficient(form, idx);
        into[g] = c;
        if (!c.is_zero()) ex.residual -= c * de_rham(Element::generator(t, idx));
    };
    for (const auto& L : base.levels)
        for (const auto& x : L.x) take(sh.xt.at(x), ex.a);
    for (const auto& L : sh.levels) {
        for (const auto& u : L.u) take(u, ex.b);
        for (const auto& v : L.v) take(v, ex.c);
    }
    return ex;
}

// Random v-free or unrestricted element of a given degree.
Element random_element(std::mt19937_64& rng, const TablePtr& t, int degree, const std::vector<int>& allowed,
                       int bound, int max_terms) {
    auto mons = monomials(*t, 0, degree, bound, allowed);
    Element e(t);
    if (mons.empty()) return e;
    std::uniform_int_distribution<std::size_t> pick(0, mons.size() - 1);
    std::uniform_int_distribution<int> coef(-2, 2), nterms(0, max_terms);
    int n = nterms(rng);
    for (int i = 0; i < n; ++i) {
        int c = coef(rng);
        if (c == 0) c = 1;
        e += from_monomial(t, mons[pick(rng)], Scalar(c));
    }
    return e;
}

}  // namespace

std::map<int, int> LagrangianInstance::n() const {
    std::map<int, int> r;
    for (const auto& L : shape.levels) r[L.i] = (int)L.u.size();
    if (!shape.w.empty() || variant != Variant::Darboux) r[e] = (int)shape.w.size();
    return r;
}

LagrangianShape lagrangian_shape(const DarbouxInstance& base, const LagrangianSpec& spec, bool weak) {
    const int k = base.k;
    const int e = floor_div(k, 2);
    const int top = weak ? e + 1 : e;
    for (const auto& [deg, cnt] : spec.n) {
        if (deg > 0 || deg < e) throw Error("SchemaError", "n given for degree " + std::to_string(deg));
        if (cnt < 0) throw Error("SchemaError", "negative dimension");
    }
    auto count = [&](int i) { return spec.n.count(i) ? spec.n.at(i) : 0; };
    LagrangianShape sh;
    std::vector<RingGenSpec> specs;
    const Table& A = *base.table;
    std::set<std::string> zero_names;
    for (const auto& [x, img] : spec.alpha0) {
        auto idx = A.find(x);
        if (!idx || A[*idx].degree != 0 || x.empty() || x[0] == 'y')
            throw Error("SchemaError", "alpha0 is given on '" + x + "', not a degree-0 x of the base");
    }
    for (const auto& L : base.levels)
        for (const auto& x : L.x) {
            std::string name = "t" + x;
            if (L.i == 0 && spec.alpha0.count(x)) name = spec.alpha0.at(x);
            sh.xt[x] = name;
            bool inv = L.i == 0 && (A[A.index(x)].invertible || spec.invertible.count(name));
            specs.push_back({name, L.i, inv});
            if (L.i == 0) zero_names.insert(name);
        }
    for (int i = 0; i >= top; --i) {
        LagLevel L;
        L.i = i;
        int cnt = count(i);
        if (weak && i == e) cnt = 0;
        for (int j = 1; j <= cnt; ++j) {
            L.u.push_back(family_name("u", i, j, cnt));
            L.v.push_back(family_name("v", k - 1 - i, j, cnt));
            bool inv = i == 0 && spec.invertible.count(L.u.back());
            specs.push_back({L.u.back(), i, inv});
            specs.push_back({L.v.back(), k - 1 - i, false});
            if (i == 0) zero_names.insert(L.u.back());
        }
        sh.levels.push_back(L);
    }
    if (weak) {
        int nw = spec.n.count(e) ? spec.n.at(e) : (int)spec.q.size();
        if (nw != (int)spec.q.size()) throw Error("SchemaError", "n[e] must equal the number of q entries");
        for (int j = 1; j <= nw; ++j) {
            sh.w.push_back(family_name("w", e, j, nw));
            specs.push_back({sh.w.back(), e, false});
        }
    } else if (!spec.q.empty()) {
        throw Error("SchemaError", "q is only used by the weak form");
    }
    for (const auto& n : spec.invertible)
        if (!zero_names.count(n))
            throw Error("SchemaError", "invertible variable '" + n + "' is not a degree-0 generator of B");
    for (const auto& s : specs)
        if (s.name == "s" || s.name == "t")
            throw Error("SchemaError", "'" + s.name + "' is reserved for the homotopy parameters");
    sh.table = Table::make(specs, k - 1, base.table->field());
    return sh;
}

Morphism alpha_plus(const DarbouxInstance& base, const LagrangianShape& shape) {
    std::map<std::string, Element> img;
    for (const auto& L : base.levels) {
        for (const auto& x : L.x) img[x] = Element::generator(shape.table, shape.xt.at(x));
        for (const auto& y : L.y) img[y] = Element(shape.table);
    }
    return Morphism(base.table, shape.table, img);
}

Element superpotential_residual(const LagrangianInstance& inst) {
    const auto& t = inst.table;
    const Element& P = inst.Psi;
    Morphism ap = alpha_plus(inst.base, inst.shape);
    Element M = ap.apply(inst.split.Phi_plus);
    for (const auto& L : inst.levels())
        for (std::size_t j = 0; j < L.u.size(); ++j) M += differentiate(P, L.u[j]) * differentiate(P, L.v[j]);
    for (std::size_t j = 0; j < inst.shape.w.size(); ++j) {
        Element dw = differentiate(P, inst.shape.w[j]);
        M += Scalar(mpq_class(1, 4)) * inst.q[j].unit_inverse() * dw * dw;
    }
    for (const auto& L : inst.base.levels)
        for (std::size_t j = 0; j < L.x.size(); ++j) {
            Element c = ap.apply(inst.split.comp.at(L.y[j]));
            if (c.is_zero()) continue;
            M += sgn(L.i + 1) * c * differentiate(P, inst.shape.xt.at(L.x[j]));
        }
    (void)t;
    return M;
}

std::map<std::string, Element> lagrangian_differential(const LagrangianInstance& inst) {
    const int k = inst.k;
    const Element& P = inst.Psi;
    Morphism ap = alpha_plus(inst.base, inst.shape);
    std::map<std::string, Element> diff;
    for (const auto& L : inst.base.levels)
        for (std::size_t j = 0; j < L.x.size(); ++j) {
            Element c = ap.apply(inst.split.comp.at(L.y[j]));
            if (!c.is_zero()) diff[inst.shape.xt.at(L.x[j])] = sgn(L.i + 1) * c;
        }
    for (const auto& L : inst.levels()) {
        for (std::size_t j = 0; j < L.u.size(); ++j) {
            diff[L.u[j]] = sgn((L.i + 1) * k) * differentiate(P, L.v[j]);
            Element dv = differentiate(P, L.u[j]);
            if (L.i == 0)
                for (std::size_t jj = 0; jj < inst.shape.w.size(); ++jj) {
                    Element dq = differentiate(inst.q[jj], L.u[j]);
                    if (dq.is_zero()) continue;
                    dv -= inst.gen(inst.shape.w[jj]) * half_inverse(inst.q[jj]) * dq *
                          differentiate(P, inst.shape.w[jj]);
                }
            diff[L.v[j]] = dv;
        }
    }
    for (std::size_t j = 0; j < inst.shape.w.size(); ++j)
        diff[inst.shape.w[j]] = half_inverse(inst.q[j]) * differentiate(P, inst.shape.w[j]);
    return diff;
}

std::map<std::string, Element> lagrangian_alpha_images(const LagrangianInstance& inst) {
    std::map<std::string, Element> img;
    const Element& P = inst.Psi;
    for (const auto& L : inst.base.levels)
        for (std::size_t j = 0; j < L.x.size(); ++j) {
            const std::string& xt = inst.shape.xt.at(L.x[j]);
            img[L.x[j]] = inst.gen(xt);
            Element y = sgn(L.i + 1) * differentiate(P, xt);
            if (L.i == 0)
                for (std::size_t jj = 0; jj < inst.shape.w.size(); ++jj) {
                    Element dq = differentiate(inst.q[jj], xt);
                    if (dq.is_zero()) continue;
                    y += inst.gen(inst.shape.w[jj]) * half_inverse(inst.q[jj]) * dq *
                         differentiate(P, inst.shape.w[jj]);
                }
            img[L.y[j]] = y;
        }
    return img;
}

LagrangianInstance lagrangian_from_shape(const DarbouxInstance& base, const LagrangianShape& shape,
                                         const std::vector<Element>& q, const Element& Psi) {
    if (base.variant != Variant::Darboux)
        throw Error("WrongVariant", "Lagrangian Darboux forms sit over a plain Darboux base");
    LagrangianInstance inst;
    inst.base = base;
    inst.split = split_hamiltonian(base);
    inst.k = base.k;
    inst.e = floor_div(base.k, 2);
    inst.shape = shape;
    inst.table = shape.table;
    inst.q = q;
    const int k = inst.k;
    if (q.size() != shape.w.size()) throw Error("SchemaError", "one q is needed per w");
    if (!shape.w.empty() || mod4(k) == 3) {
        bool strong = true;
        for (std::size_t j = 0; j < q.size(); ++j) {
            require_degree(q[j], 0, "q" + std::to_string(j + 1));
            if (!q[j].is_unit()) throw Error("NotAUnit", "q" + std::to_string(j + 1) + " = " + q[j].str());
            strong = strong && q[j] == Element(inst.table, Scalar(1));
        }
        inst.variant = strong ? Variant::Strong : Variant::Weak;
    }
    inst.Psi = Psi.table() ? Psi : Element(inst.table);
    require_degree(inst.Psi, k, "Psi");

    Element M = superpotential_residual(inst);
    if (!M.is_zero())
        throw Error("SuperpotentialPDEViolated", "superpotential equation residual " + M.str(), M.str());
    inst.B = Cdga(inst.table, lagrangian_differential(inst), true);
    if (!all_zero(inst.B.check_square_zero()))
        throw Error("SquareZeroFailed", "d o d is not zero although the superpotential equation holds");
    inst.alpha = Morphism(base.table, inst.table, lagrangian_alpha_images(inst));

    Element h0(inst.table), psi(inst.table);
    for (const auto& L : inst.levels()) {
        int i = L.i;
        for (std::size_t j = 0; j < L.u.size(); ++j) {
            Element u = inst.gen(L.u[j]), v = inst.gen(L.v[j]);
            h0 += de_rham(u) * de_rham(v);
            psi += Scalar(i) * u * de_rham(v) + sgn((i + 1) * k) * Scalar(k - 1 - i) * v * de_rham(u);
        }
    }
    for (std::size_t j = 0; j < shape.w.size(); ++j) {
        Element w = inst.gen(shape.w[j]);
        h0 += de_rham(q[j] * w) * de_rham(w);
        psi += Scalar(k - 1) * q[j] * w * de_rham(w);
    }
    inst.h0 = h0;
    inst.psi = psi;
    fail_on(check_lagrangian(inst), "IdentityFailed");
    return inst;
}

LagrangianInstance build_lagrangian_darboux(const DarbouxInstance& base, const LagrangianSpec& spec) {
    if (base.k > 0 || (mod4(base.k) == 3 && base.k != 0))
        throw Error("WrongResidue", "Lagrangian Darboux form needs k <= 0 with k != 3 mod 4");
    LagrangianShape sh = lagrangian_shape(base, spec, false);
    return lagrangian_from_shape(base, sh, {}, parse(spec.psi, sh.table));
}

LagrangianInstance build_weak_lagrangian_darboux(const DarbouxInstance& base, const LagrangianSpec& spec) {
    if (base.k >= 0 || mod4(base.k) != 3)
        throw Error("WrongResidue", "weak Lagrangian Darboux form needs k < 0 with k = 3 mod 4");
    LagrangianShape sh = lagrangian_shape(base, spec, true);
    std::vector<Element> q;
    for (const auto& txt : spec.q) q.push_back(parse(txt, sh.table));
    return lagrangian_from_shape(base, sh, q, parse(spec.psi, sh.table));
}

ResidualList check_lagrangian(const LagrangianInstance& inst) {
    ResidualList out;
    const Cdga& B = inst.B;
    const int k = inst.k;
    out.push_back({"superpotential_pde:residual", superpotential_residual(inst)});
    for (const auto& r : B.check_square_zero()) out.push_back({"square_zero:" + r.label, r.value});
    for (const auto& r : check_morphism(inst.alpha, inst.base.A, B)) out.push_back({"morphism:" + r.label, r.value});
    Element aw = inst.alpha.apply(inst.base.omega0);
    out.push_back({"isotropic:d h0 - alpha_* omega0", B.d(inst.h0) - aw});
    out.push_back({"isotropic:d_dR h0", de_rham(inst.h0)});
    Element aPhi = inst.alpha.apply(inst.base.Phi + inst.split.Phi_plus);
    Element aphi = inst.alpha.apply(inst.base.phi + inst.split.phi_plus);
    out.push_back({"lagrangian_triple:d Psi + alpha(Phi + Phi+)", B.d(inst.Psi) + aPhi});
    out.push_back({"lagrangian_triple:d_dR Psi + d psi + alpha_*(phi + phi+)",
                   de_rham(inst.Psi) + B.d(inst.psi) + aphi});
    out.push_back({"lagrangian_triple:d_dR psi - (k-1) h0", de_rham(inst.psi) - Scalar(k - 1) * inst.h0});
    out.push_back({"consistency_chain:(k-1) d h0 - d_dR alpha_*(phi + phi+)",
                   Scalar(k - 1) * B.d(inst.h0) - de_rham(aphi)});
    out.push_back({"consistency_chain:d_dR alpha_*(phi + phi+) - (k-1) alpha_* omega0",
                   de_rham(aphi) - Scalar(k - 1) * aw});
    return out;
}

SuperpotentialSplit split_superpotential(const LagrangianInstance& inst) {
    if (inst.variant != Variant::Darboux)
        throw Error("WrongVariant", "the superpotential splitting needs plain Lagrangian Darboux form");
    const Table& t = *inst.table;
    std::vector<int> vs;
    for (const auto& L : inst.levels())
        for (const auto& v : L.v) vs.push_back(t.index(v));
    SuperpotentialSplit s;
    s.Psi_plus = coefficient_free_of(inst.Psi, vs);
    for (const auto& L : inst.levels())
        for (const auto& v : L.v) {
            int vi = t.index(v);
            Element c = differentiate(inst.Psi, vi) * sgn(t[vi].parity * (L.i + 1));
            if (!c.free_of(vs)) throw Error("NonlinearInV", "Psi is not linear in the v variables", c.str());
            s.comp[v] = c;
        }
    return s;
}

ResidualList check_superpotential_split(const LagrangianInstance& inst, const SuperpotentialSplit& s) {
    ResidualList out;
    const auto& sh = inst.shape;
    Morphism ap = alpha_plus(inst.base, sh);
    Element re = inst.Psi - s.Psi_plus;
    for (const auto& L : inst.levels())
        for (const auto& v : L.v) re -= s.comp.at(v) * inst.gen(v);
    out.push_back({"reassemble", re});

    // sum (-1)^{i+1} Psi^{i+1} df/du + sum (-1)^{i+1} alpha_+(Phi^{i+1}) df/dx~
    auto flow = [&](const Element& f) {
        Element acc(inst.table);
        for (const auto& L : inst.levels())
            for (std::size_t j = 0; j < L.u.size(); ++j)
                acc += sgn(L.i + 1) * s.comp.at(L.v[j]) * differentiate(f, L.u[j]);
        for (const auto& L : inst.base.levels)
            for (std::size_t j = 0; j < L.x.size(); ++j)
                acc += sgn(L.i + 1) * ap.apply(inst.split.comp.at(L.y[j])) * differentiate(f, sh.xt.at(L.x[j]));
        return acc;
    };
    Element aPp = ap.apply(inst.split.Phi_plus);
    out.push_back({"plus", flow(s.Psi_plus) + aPp});
    for (const auto& L : inst.levels())
        for (const auto& v : L.v) out.push_back({"comp:" + v, flow(s.comp.at(v))});

    // d or alpha of a generator re-expressed through the split
    auto through = [&](const std::string& g) {
        Element acc = differentiate(s.Psi_plus, g);
        for (const auto& L : inst.levels())
            for (const auto& v : L.v) acc += differentiate(s.comp.at(v), g) * inst.gen(v);
        return acc;
    };
    for (const auto& L : inst.base.levels)
        for (std::size_t j = 0; j < L.x.size(); ++j) {
            const std::string& xt = sh.xt.at(L.x[j]);
            out.push_back({"alpha:" + L.y[j], inst.alpha.image(L.y[j]) - sgn(L.i + 1) * through(xt)});
            out.push_back({"dxt:" + xt,
                           d_of(inst.B, xt) - sgn(L.i + 1) * ap.apply(inst.split.comp.at(L.y[j]))});
        }
    for (const auto& L : inst.levels())
        for (std::size_t j = 0; j < L.u.size(); ++j) {
            out.push_back({"du:" + L.u[j], d_of(inst.B, L.u[j]) - sgn(L.i + 1) * s.comp.at(L.v[j])});
            out.push_back({"dv:" + L.v[j], d_of(inst.B, L.v[j]) - through(L.u[j])});
        }
    out.push_back({"twist", inst.B.d(s.Psi_plus) + aPp});
    return out;
}

ResidualList verify_isotropic(const LagrangianInstance& inst, const std::vector<Element>& h) {
    ResidualList out;
    const auto& t = inst.table;
    auto at = [&](std::size_t i) { return i < h.size() && h[i].table() ? h[i] : Element(t); };
    std::size_t n = std::max<std::size_t>(h.size(), 1);
    for (std::size_t i = 0; i <= n; ++i) {
        Element r = -inst.B.d(at(i));
        if (i == 0) r += inst.alpha.apply(inst.base.omega0);
        else r -= de_rham(at(i - 1));
        out.push_back({"index " + std::to_string(i), r});
    }
    return out;
}

ResidualList primitive_residuals(const Cdga& B, const std::vector<Element>& gamma, const std::vector<Element>& X) {
    const auto& t = B.table();
    auto get = [&](const std::vector<Element>& v, int i) {
        return i >= 0 && i < (int)v.size() && v[i].table() ? v[i] : Element(t);
    };
    ResidualList out;
    int P = (int)std::max(gamma.size(), X.size());
    for (int p = 0; p <= P; ++p)
        out.push_back({"slot " + std::to_string(p), B.d(get(X, p)) + de_rham(get(X, p - 1)) - get(gamma, p)});
    return out;
}

std::vector<Element> find_primitive(const Cdga& B, int k, const std::vector<Element>& gamma, int bound) {
    const auto& t = B.table();
    const Table& tb = *t;
    const int P = (int)gamma.size() - 1;
    auto g = [&](int p) { return p >= 0 && p <= P && gamma[p].table() ? gamma[p] : Element(t); };
    for (int p = 0; p <= P; ++p) {
        const Element& x = g(p);
        if (x.is_zero()) continue;
        if (x.form_degree() != std::optional<int>(p) || x.degree() != std::optional<int>(k + 1 - p))
            throw Error("DegreeMismatch", "gamma slot " + std::to_string(p) + " must have weight " +
                                              std::to_string(p) + " and degree " + std::to_string(k + 1 - p));
    }
    for (int p = 0; p <= P + 1; ++p) {
        Element r = B.d(g(p)) + de_rham(g(p - 1));
        if (!r.is_zero())
            throw Error("NotClosed", "total differential of gamma in slot " + std::to_string(p) + " is " + r.str(),
                        r.str());
    }
    if (P < 0) return {};
    std::vector<int> gens = ring_and_forms(tb);
    struct Col {
        int slot;
        Monomial m;
    };
    std::vector<Col> cols;
    for (int p = 0; p <= P; ++p)
        for (auto& m : monomials(tb, p, k - p, bound, gens)) cols.push_back({p, m});

    std::map<std::pair<int, Monomial>, int, std::function<bool(const std::pair<int, Monomial>&,
                                                               const std::pair<int, Monomial>&)>>
        rowid([](const std::pair<int, Monomial>& a, const std::pair<int, Monomial>& b) {
            if (a.first != b.first) return a.first < b.first;
            return MonomialLess()(a.second, b.second);
        });
    std::vector<SparseRow> rows;
    std::vector<Scalar> rhs;
    auto row = [&](int eq, const Monomial& m) {
        auto key = std::make_pair(eq, m);
        auto it = rowid.find(key);
        if (it != rowid.end()) return it->second;
        int id = (int)rows.size();
        rowid.emplace(key, id);
        rows.emplace_back();
        rhs.emplace_back();
        return id;
    };
    for (std::size_t c = 0; c < cols.size(); ++c) {
        Element m = from_monomial(t, cols[c].m);
        Element dm = B.d(m), ddr = de_rham(m);
        for (const auto& [mm, v] : dm.terms()) rows[row(cols[c].slot, mm)][(int)c] += v;
        for (const auto& [mm, v] : ddr.terms()) rows[row(cols[c].slot + 1, mm)][(int)c] += v;
    }
    for (int p = 0; p <= P; ++p) {
        Element gp = g(p);
        for (const auto& [mm, v] : gp.terms()) rhs[row(p, mm)] += v;
    }
    for (auto& r : rows)
        for (auto it = r.begin(); it != r.end();)
            it = it->second.is_zero() ? r.erase(it) : std::next(it);
    auto sol = solve_exact(rows, rhs, (int)cols.size());
    if (!sol)
        throw Error("NoPrimitive", "no primitive with ring exponents up to " + std::to_string(bound));
    std::vector<Element> X(P + 1, Element(t));
    for (std::size_t c = 0; c < cols.size(); ++c)
        if (!(*sol)[c].is_zero()) X[cols[c].slot] += from_monomial(t, cols[c].m, (*sol)[c]);
    return X;
}

std::vector<Element> lagrangian_gamma(const LagrangianInstance& inst) {
    return {-inst.alpha.apply(inst.base.Phi + inst.split.Phi_plus),
            -inst.alpha.apply(inst.base.phi + inst.split.phi_plus), Scalar(inst.k - 1) * inst.h0};
}

ResidualList check_raw(const DarbouxInstance& base, const RawLagrangian& raw) {
    ResidualList out;
    HamiltonianSplit sp = split_hamiltonian(base);
    for (const auto& r : raw.B.check_square_zero()) out.push_back({"square_zero:" + r.label, r.value});
    for (const auto& r : check_morphism(raw.alpha, base.A, raw.B)) out.push_back({"morphism:" + r.label, r.value});
    for (const auto& L : base.levels)
        for (const auto& x : L.x)
            out.push_back({"alpha_plus:" + x,
                           raw.alpha.image(x) - Element::generator(raw.shape.table, raw.shape.xt.at(x))});
    out.push_back({"primitive:d Xi + alpha(Phi + Phi+)", raw.B.d(raw.Xi) + raw.alpha.apply(base.Phi + sp.Phi_plus)});
    out.push_back({"primitive:d_dR Xi + d psi + alpha_*(phi + phi+)",
                   de_rham(raw.Xi) + raw.B.d(raw.psi) + raw.alpha.apply(base.phi + sp.phi_plus)});
    return out;
}

Morphism homotopy_morphism(const LagrangianInstance& inst, const Cdga& Bst, const std::map<std::string, Element>& a) {
    const int k = inst.k;
    const auto& T = Bst.table();
    Element s = Element::generator(T, "s"), tt = Element::generator(T, "t");
    Morphism ap = alpha_plus(inst.base, inst.shape);
    auto A_of = [&](const std::string& x) {
        auto it = a.find(inst.shape.xt.at(x));
        return it == a.end() ? Element(T) : transport(it->second, T);
    };
    std::map<std::string, Element> img;
    for (const auto& L : inst.base.levels)
        for (std::size_t j = 0; j < L.x.size(); ++j) {
            const std::string& xt = inst.shape.xt.at(L.x[j]);
            img[L.x[j]] = Element::generator(T, xt);
            const int i = L.i;
            Element aij = A_of(L.x[j]);
            Element y = transport(inst.alpha.image(L.y[j]), T);
            Scalar sg = sgn((i + 1) * (k + 1));
            y -= sg * (s * Bst.d(aij)) + sg * (tt * aij);
            for (const auto& L2 : inst.base.levels)
                for (std::size_t j2 = 0; j2 < L2.x.size(); ++j2) {
                    Element a2 = A_of(L2.x[j2]);
                    if (a2.is_zero()) continue;
                    Element dphi = differentiate(inst.split.comp.at(L2.y[j2]), L.x[j]);
                    if (dphi.is_zero()) continue;
                    y -= sgn(i + (L2.i + 1) * k) * (s * transport(ap.apply(dphi), T) * a2);
                }
            img[L.y[j]] = y;
        }
    return Morphism(inst.base.table, T, img);
}

ResidualList verify_homotopy(const DarbouxInstance& base, const Cdga& Bst, const Morphism& H,
                             const Morphism& alpha_hat, const Morphism& alpha, const Element& hdot0,
                             const Element& h0_hat, const Element& h0) {
    ResidualList out;
    for (const auto& r : check_morphism(H, base.A, Bst)) out.push_back({"morphism:" + r.label, r.value});
    const auto& B = alpha.target();
    Morphism r0 = restrict_homotopy(Bst, B, Scalar(0)), r1 = restrict_homotopy(Bst, B, Scalar(1));
    for (int g : base.table->ring_indices()) {
        const std::string& n = (*base.table)[g].name;
        Element h = H.image(n);
        out.push_back({"s=0:" + n, r0.apply(h) - alpha_hat.image(n)});
        out.push_back({"s=1:" + n, r1.apply(h) - alpha.image(n)});
    }
    out.push_back({"hdot0 s=0", r0.apply(hdot0) - h0_hat});
    out.push_back({"hdot0 s=1", r1.apply(hdot0) - h0});
    out.push_back({"d_dR hdot0", de_rham(hdot0)});
    out.push_back({"d hdot0 - H_* omega0", Bst.d(hdot0) - H.apply(base.omega0)});
    return out;
}

Normalized normalize(const DarbouxInstance& base, const RawLagrangian& raw) {
    const int k = base.k;
    if (par(k)) throw Error("OddK", "the normalizer handles even k only");
    if (k >= 0) throw Error("WrongResidue", "the normalizer needs k < 0");
    if (base.variant != Variant::Darboux) throw Error("WrongVariant", "the base must be in plain Darboux form");
    fail_on(check_raw(base, raw), "PrereqViolated");
    const LagrangianShape& sh = raw.shape;
    const auto& t = sh.table;
    Normalized out;
    Scalar km1(k - 1), inv_km1 = Scalar(k - 1).inverse();
    Cdga B = raw.B;
    Morphism alpha = raw.alpha;
    Element Xi = raw.Xi, psi = raw.psi;

    Expansion ex = expand(sh, base, psi * inv_km1);
    out.steps.push_back({"expand", ex.residual});
    fail_on({out.steps.back()}, "SchemaError");

    // remove the d_dR v terms
    Element G(t);
    for (const auto& L : sh.levels)
        for (const auto& v : L.v) G += sgn(L.i) * ex.c.at(v) * Element::generator(t, v);
    Xi -= km1 * B.d(G);
    psi -= km1 * de_rham(G);
    ex = expand(sh, base, psi * inv_km1);
    for (const auto& [v, c] : ex.c) out.steps.push_back({"gauge:" + v, c});

    // v^ = (-1)^{(i+1)k} b becomes the new coordinate
    std::map<std::string, Element> F;
    for (const auto& L : sh.levels)
        for (std::size_t j = 0; j < L.u.size(); ++j) F[L.v[j]] = sgn((L.i + 1) * k) * ex.b.at(L.u[j]);
    std::map<std::string, Element> Ginv = invert_v_change(sh, F);
    Morphism phi(t, t, Ginv);
    B = Cdga(t, conjugate_differential(B, phi, F), true);
    alpha = compose(phi, alpha, base.A);
    Xi = phi.apply(Xi);
    psi = phi.apply(psi);
    ex = expand(sh, base, psi * inv_km1);
    for (const auto& L : sh.levels)
        for (std::size_t j = 0; j < L.u.size(); ++j) {
            out.steps.push_back({"coordinates:" + L.v[j],
                                 ex.b.at(L.u[j]) - sgn((L.i + 1) * k) * Element::generator(t, L.v[j])});
            out.steps.push_back({"coordinates:" + L.v[j] + " c", ex.c.at(L.v[j])});
        }
    const std::map<std::string, Element> a = ex.a;

    // shift psi to its symmetric form
    Element S(t), target(t);
    for (const auto& L : base.levels)
        for (const auto& x : L.x) {
            const std::string& xt = sh.xt.at(x);
            Element X = Element::generator(t, xt);
            const Element& ax = a.at(xt);
            S += sgn(k - L.i) * Scalar(L.i) * ax * X;
            target += Scalar(k - 1 - L.i) * ax * de_rham(X) + sgn((L.i + 1) * k) * Scalar(L.i) * X * de_rham(ax);
        }
    for (const auto& L : sh.levels)
        for (std::size_t j = 0; j < L.u.size(); ++j) {
            Element u = Element::generator(t, L.u[j]), v = Element::generator(t, L.v[j]);
            S += sgn(L.i) * Scalar(L.i) * u * v;
            target += Scalar(L.i) * u * de_rham(v) + sgn((L.i + 1) * k) * Scalar(k - 1 - L.i) * v * de_rham(u);
        }
    Xi += B.d(S);
    psi += de_rham(S);
    out.steps.push_back({"shifted psi", psi - target});

    Element Psi = Xi;
    for (const auto& L : base.levels)
        for (const auto& x : L.x) {
            const std::string& xt = sh.xt.at(x);
            Psi -= a.at(xt) * d_of(B, xt);
        }

    try {
        out.inst = lagrangian_from_shape(base, sh, {}, Psi);
    } catch (const Error& err) {
        throw Error("NormalizationFailed", std::string("normalized data is not in Darboux form: ") + err.what(),
                    err.residual());
    }
    for (int g : t->ring_indices()) {
        const std::string& n = (*t)[g].name;
        out.steps.push_back({"differential:" + n, d_of(out.inst.B, n) - d_of(B, n)});
    }

    HomotopyCertificate& cert = out.cert;
    cert.Bst = homotopy_algebra(out.inst.B);
    const auto& T = cert.Bst.table();
    cert.H = homotopy_morphism(out.inst, cert.Bst, a);
    Element s = Element::generator(T, "s");
    Element hdot(T), h0(t);
    for (const auto& L : base.levels)
        for (const auto& x : L.x) {
            const std::string& xt = sh.xt.at(x);
            Element ax = transport(a.at(xt), T);
            hdot += de_rham(s * ax) * de_rham(Element::generator(T, xt));
            h0 += de_rham(a.at(xt)) * de_rham(Element::generator(t, xt));
        }
    for (const auto& L : sh.levels)
        for (std::size_t j = 0; j < L.u.size(); ++j) {
            hdot += de_rham(Element::generator(T, L.u[j])) * de_rham(Element::generator(T, L.v[j]));
            h0 += de_rham(Element::generator(t, L.u[j])) * de_rham(Element::generator(t, L.v[j]));
        }
    cert.hdot0 = hdot;
    cert.alpha_hat = out.inst.alpha;
    cert.alpha = alpha;
    cert.h0_hat = out.inst.h0;
    cert.h0 = h0;
    out.steps.push_back({"h0", de_rham(psi) * inv_km1 - h0});
    cert.checks = verify_homotopy(base, cert.Bst, cert.H, out.inst.alpha, alpha, hdot, out.inst.h0, h0);
    fail_on(out.steps, "NormalizationFailed");
    return out;
}

RawLagrangian gauge_obfuscate(const LagrangianInstance& inst, std::uint64_t seed) {
    const int k = inst.k;
    if (inst.variant != Variant::Darboux || par(k) || k >= 0)
        throw Error("WrongVariant", "gauge_obfuscate needs plain Lagrangian Darboux form with k < 0 even");
    std::mt19937_64 rng(seed);
    const LagrangianShape& sh = inst.shape;
    const auto& t = sh.table;
    const Table& tb = *t;
    std::vector<int> all = tb.ring_indices(), vfree;
    std::set<std::string> vnames;
    for (const auto& L : sh.levels)
        for (const auto& v : L.v) vnames.insert(v);
    for (int g : all)
        if (!vnames.count(tb[g].name)) vfree.push_back(g);

    std::map<std::string, Element> a;
    for (const auto& L : inst.base.levels)
        for (const auto& x : L.x) a[sh.xt.at(x)] = random_element(rng, t, k - 1 - L.i, all, 2, 2);

    Cdga Bst = homotopy_algebra(inst.B);
    Morphism H = homotopy_morphism(inst, Bst, a);
    Morphism r1 = restrict_homotopy(Bst, t, Scalar(1));
    std::map<std::string, Element> aimg;
    for (int g : inst.base.table->ring_indices()) {
        const std::string& n = (*inst.base.table)[g].name;
        aimg[n] = r1.apply(H.image(n));
    }
    Morphism alpha(inst.base.table, t, aimg);
    const Cdga& B = inst.B;
    Element Xi = inst.Psi, psi(t);
    for (const auto& L : inst.base.levels)
        for (const auto& x : L.x) {
            const std::string& xt = sh.xt.at(x);
            Xi += a.at(xt) * d_of(B, xt);
        }
    // data in the unshifted form psi = (k-1)(sum a d_dR x~ + sum (-1)^{(i+1)k} v d_dR u)
    for (const auto& L : inst.base.levels)
        for (const auto& x : L.x) {
            const std::string& xt = sh.xt.at(x);
            psi += Scalar(k - 1) * a.at(xt) * de_rham(Element::generator(t, xt));
        }
    Element S(t);
    for (const auto& L : inst.base.levels)
        for (const auto& x : L.x) {
            const std::string& xt = sh.xt.at(x);
            S += sgn(k - L.i) * Scalar(L.i) * a.at(xt) * Element::generator(t, xt);
        }
    for (const auto& L : sh.levels)
        for (std::size_t j = 0; j < L.u.size(); ++j) {
            Element u = Element::generator(t, L.u[j]), v = Element::generator(t, L.v[j]);
            S += sgn(L.i) * Scalar(L.i) * u * v;
            psi += Scalar(k - 1) * sgn((L.i + 1) * k) * v * de_rham(u);
        }
    Xi -= B.d(S);

    // random block-triangular change of the v coordinates
    std::map<std::string, Element> T;
    std::uniform_int_distribution<int> small(-2, 2);
    for (const auto& L : sh.levels) {
        std::size_t n = L.v.size();
        // unit lower times unit upper: determinant one
        std::vector<std::vector<long>> lo(n, std::vector<long>(n, 0)), up = lo, g = lo;
        for (std::size_t r = 0; r < n; ++r) {
            lo[r][r] = up[r][r] = 1;
            for (std::size_t c = 0; c < r; ++c) lo[r][c] = small(rng);
            for (std::size_t c = r + 1; c < n; ++c) up[r][c] = small(rng);
        }
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                for (std::size_t m = 0; m < n; ++m) g[r][c] += lo[r][m] * up[m][c];
        for (std::size_t j = 0; j < n; ++j) {
            Element img(t);
            for (std::size_t jj = 0; jj < n; ++jj)
                if (g[j][jj]) img += Scalar(g[j][jj]) * Element::generator(t, L.v[jj]);
            for (const auto& L2 : sh.levels) {
                if (L2.i >= L.i) continue;
                for (const auto& v2 : L2.v)
                    img += random_element(rng, t, L2.i - L.i, vfree, 1, 1) * Element::generator(t, v2);
            }
            img += random_element(rng, t, k - 1 - L.i, vfree, 2, 1);
            T[L.v[j]] = img;
        }
    }
    std::map<std::string, Element> Tinv = invert_v_change(sh, T);
    Morphism tau(t, t, T);
    Cdga B2(t, conjugate_differential(B, tau, Tinv), true);
    Morphism alpha2 = compose(tau, alpha, inst.base.A);
    Xi = tau.apply(Xi);
    psi = tau.apply(psi);

    // d_dR v terms
    Element G(t);
    for (const auto& L : sh.levels)
        for (const auto& v : L.v) G += sgn(L.i) * random_element(rng, t, L.i, vfree, 2, 1) * Element::generator(t, v);
    Xi += Scalar(k - 1) * B2.d(G);
    psi += Scalar(k - 1) * de_rham(G);

    RawLagrangian raw{sh, B2, alpha2, Xi, psi};
    fail_on(check_raw(inst.base, raw), "ObfuscationFailed");
    return raw;
}

}  // namespace ssw
