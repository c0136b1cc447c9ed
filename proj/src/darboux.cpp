#include "ssw/darboux.hpp"

#include <algorithm>

#include "ssw/derham.hpp"
#include "ssw/error.hpp"
#include "ssw/expr.hpp"

namespace ssw {

namespace {

Scalar sgn(int e) { return (e % 2 == 0) ? Scalar(1) : Scalar(-1); }

void require_degree(const Element& e, int deg, const std::string& what) {
    if (e.is_zero()) return;
    auto d = e.degree();
    if (!d || *d != deg || e.form_degree().value_or(1) != 0 || e.vec_weight().value_or(1) != 0)
        throw Error("DegreeMismatch", what + " = " + e.str() + " is not a function of degree " +
                                          std::to_string(deg));
}

Element half_inverse(const Element& q) { return q.unit_inverse() * Scalar(mpq_class(1, 2)); }

struct Shape {
    std::vector<RingGenSpec> specs;
    std::vector<Level> levels;
    std::vector<std::string> z;
};

Shape darboux_shape(int k, int lo, const std::map<int, int>& m, const std::vector<std::string>& base_vars,
                    const std::set<std::string>& invertible) {
    Shape s;
    int m0 = m.count(0) ? m.at(0) : (int)base_vars.size();
    if (!base_vars.empty() && (int)base_vars.size() != m0)
        throw Error("SchemaError", "base_vars and m[0] disagree");
    for (int i = 0; i >= lo; --i) {
        Level L;
        L.i = i;
        int cnt = i == 0 ? m0 : (m.count(i) ? m.at(i) : 0);
        if (cnt < 0) throw Error("SchemaError", "negative dimension");
        for (int j = 1; j <= cnt; ++j) {
            std::string xn = (i == 0 && !base_vars.empty()) ? base_vars[j - 1] : family_name("x", i, j, cnt);
            std::string yn = family_name("y", k - i, j, cnt);
            L.x.push_back(xn);
            L.y.push_back(yn);
            s.specs.push_back({xn, i, i == 0 && invertible.count(xn) > 0});
            s.specs.push_back({yn, k - i, k - i == 0 && invertible.count(yn) > 0});
        }
        s.levels.push_back(L);
    }
    return s;
}

void validate_levels(const std::map<int, int>& m, int lo, int extra) {
    for (const auto& [deg, cnt] : m) {
        if (deg > 0 || (deg < lo && deg != extra))
            throw Error("SchemaError", "dimension given for degree " + std::to_string(deg) +
                                           " outside the admissible range");
        if (cnt < 0) throw Error("SchemaError", "negative dimension");
    }
}

Element sum_dx_dy(const DarbouxInstance& inst) {
    Element w(inst.table);
    for (const auto& L : inst.levels)
        for (std::size_t j = 0; j < L.x.size(); ++j)
            w += de_rham(inst.gen(L.x[j])) * de_rham(inst.gen(L.y[j]));
    return w;
}

// Installs d, omega0 and phi and runs the builder checks.
void finish(DarbouxInstance& inst) {
    const int k = inst.k;
    const auto& t = inst.table;
    Element M = master_residual(inst);
    if (!M.is_zero())
        throw Error("MasterEquationViolated", "classical master equation residual " + M.str(), M.str());
    bool weak = inst.variant != Variant::Darboux;
    inst.A = Cdga(t, hamiltonian_differential(inst), true);
    if (!all_zero(inst.A.check_square_zero()))
        throw Error("SquareZeroFailed", "d o d is not zero although the master equation holds");

    inst.omega0 = sum_dx_dy(inst);
    Element phi(t);
    for (const auto& L : inst.levels) {
        int i = L.i;
        Scalar s = weak ? sgn(i + 1) : sgn((i + 1) * (k + 1));
        for (std::size_t j = 0; j < L.x.size(); ++j) {
            Element x = inst.gen(L.x[j]), y = inst.gen(L.y[j]);
            phi += Scalar(i) * x * de_rham(y) + s * Scalar(k - i) * y * de_rham(x);
        }
    }
    for (std::size_t j = 0; j < inst.z.size(); ++j) {
        Element z = inst.gen(inst.z[j]);
        inst.omega0 += de_rham(inst.q[j] * z) * de_rham(z);
        phi += Scalar(k) * inst.q[j] * z * de_rham(z);
    }
    inst.phi = phi;
    for (const auto& r : check_symplectic_triple(inst))
        if (!r.ok()) throw Error("IdentityFailed", r.label + " residual " + r.value.str(), r.value.str());
    if (mod4(k) == 2 && inst.variant == Variant::Darboux && inst.A.vdim() % 2 != 0)
        inst.warnings.push_back("odd vdim: no Lagrangians exist");
}

}  // namespace

std::map<std::string, Element> hamiltonian_differential(const DarbouxInstance& inst) {
    const int k = inst.k;
    std::map<std::string, Element> diff;
    bool weak = inst.variant != Variant::Darboux;
    for (const auto& L : inst.levels) {
        int i = L.i;
        for (std::size_t j = 0; j < L.x.size(); ++j) {
            Element dPy = differentiate(inst.Phi, L.y[j]);
            Element dPx = differentiate(inst.Phi, L.x[j]);
            diff[L.x[j]] = dPy * (weak ? sgn(i + 1) : sgn((i + 1) * (k + 1)));
            Element dy = dPx;
            if (weak && i == 0) {
                for (std::size_t jj = 0; jj < inst.z.size(); ++jj) {
                    Element dq = differentiate(inst.q[jj], L.x[j]);
                    if (dq.is_zero()) continue;
                    dy -= inst.gen(inst.z[jj]) * half_inverse(inst.q[jj]) * dq *
                          differentiate(inst.Phi, inst.z[jj]);
                }
            }
            diff[L.y[j]] = dy;
        }
    }
    for (std::size_t j = 0; j < inst.z.size(); ++j)
        diff[inst.z[j]] = half_inverse(inst.q[j]) * differentiate(inst.Phi, inst.z[j]);
    return diff;
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Darboux: return "darboux";
        case Variant::Weak: return "weak";
        default: return "strong";
    }
}

std::string family_name(const std::string& letter, int degree, int j, int count) {
    std::string base = letter;
    if (degree < 0) base += "m" + std::to_string(-degree);
    if (count <= 1) return base;
    return base + (degree < 0 ? "_" : "") + std::to_string(j);
}

int floor_div(int a, int b) {
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

int mod4(int k) { return ((k % 4) + 4) % 4; }

std::map<int, int> DarbouxInstance::m() const {
    std::map<int, int> r;
    for (const auto& L : levels) r[L.i] = (int)L.x.size();
    if (variant != Variant::Darboux) r[d] = (int)z.size();
    return r;
}

std::vector<std::string> DarbouxInstance::degree_zero() const {
    std::vector<std::string> r;
    for (const auto& g : table->gens())
        if (g.kind == GenKind::Ring && g.degree == 0) r.push_back(g.name);
    return r;
}

DarbouxInstance darboux_from_table(int k, TablePtr t, std::vector<Level> levels, const Element& Phi,
                                   bool attest) {
    DarbouxInstance inst;
    inst.k = k;
    inst.d = floor_div(k + 1, 2);
    inst.variant = Variant::Darboux;
    inst.table = std::move(t);
    inst.levels = std::move(levels);
    inst.Phi = Phi.table() ? Phi : Element(inst.table);
    inst.attest_phi_reduced_zero = attest;
    require_degree(inst.Phi, k + 1, "Phi");
    finish(inst);
    return inst;
}

DarbouxInstance build_darboux(const DarbouxSpec& spec) {
    int k = spec.k;
    if (k > 0) throw Error("DegreeMismatch", "k must be nonpositive");
    int d = floor_div(k + 1, 2);
    validate_levels(spec.m, d, d);
    Shape s = darboux_shape(k, d, spec.m, spec.base_vars, spec.invertible);
    for (const auto& n : spec.invertible) {
        bool found = false;
        for (const auto& g : s.specs) found |= g.name == n;
        if (!found) throw Error("SchemaError", "invertible variable '" + n + "' is not a degree-0 generator");
    }
    auto t = Table::make(s.specs, k, spec.field);
    Element Phi = parse(spec.phi, t);
    return darboux_from_table(k, t, s.levels, Phi, spec.attest_phi_reduced_zero);
}

namespace {

DarbouxInstance weak_from_parts(int k, TablePtr t, std::vector<Level> levels, std::vector<std::string> z,
                                std::vector<Element> q, const Element& Phi) {
    DarbouxInstance inst;
    inst.k = k;
    inst.d = k / 2;
    inst.table = std::move(t);
    inst.levels = std::move(levels);
    inst.z = std::move(z);
    inst.q = std::move(q);
    bool strong = true;
    for (std::size_t j = 0; j < inst.q.size(); ++j) {
        require_degree(inst.q[j], 0, "q" + std::to_string(j + 1));
        if (!inst.q[j].is_unit()) throw Error("NotAUnit", "q" + std::to_string(j + 1) + " = " + inst.q[j].str());
        strong = strong && inst.q[j] == Element(inst.table, Scalar(1));
    }
    inst.variant = strong ? Variant::Strong : Variant::Weak;
    inst.Phi = Phi.table() ? Phi : Element(inst.table);
    require_degree(inst.Phi, k + 1, "Phi");
    finish(inst);
    return inst;
}

}  // namespace

DarbouxInstance build_weak_darboux(const DarbouxSpec& spec) {
    int k = spec.k;
    if (k >= 0 || mod4(k) != 2)
        throw Error("WrongResidue", "weak Darboux form needs k < 0 with k = 2 mod 4");
    int d = k / 2;
    validate_levels(spec.m, d + 1, d);
    int md = spec.m.count(d) ? spec.m.at(d) : (int)spec.q.size();
    if (md != (int)spec.q.size()) throw Error("SchemaError", "m[d] must equal the number of q entries");
    std::map<int, int> m = spec.m;
    m.erase(d);
    Shape s = darboux_shape(k, d + 1, m, spec.base_vars, spec.invertible);
    for (int j = 1; j <= md; ++j) {
        s.z.push_back(family_name("z", d, j, md));
        s.specs.push_back({s.z.back(), d, false});
    }
    auto t = Table::make(s.specs, k, spec.field);
    std::vector<Element> q;
    for (const auto& txt : spec.q) q.push_back(parse(txt, t));
    return weak_from_parts(k, t, s.levels, s.z, q, parse(spec.phi, t));
}

Element master_residual(const DarbouxInstance& inst) {
    Element M(inst.table);
    for (const auto& L : inst.levels)
        for (std::size_t j = 0; j < L.x.size(); ++j)
            M += differentiate(inst.Phi, L.x[j]) * differentiate(inst.Phi, L.y[j]);
    for (std::size_t j = 0; j < inst.z.size(); ++j) {
        Element dz = differentiate(inst.Phi, inst.z[j]);
        M += Scalar(mpq_class(1, 4)) * inst.q[j].unit_inverse() * dz * dz;
    }
    return M;
}

ResidualList check_symplectic_triple(const DarbouxInstance& inst) {
    const Cdga& A = inst.A;
    return {
        {"d Phi", A.d(inst.Phi)},
        {"d_dR Phi + d phi", de_rham(inst.Phi) + A.d(inst.phi)},
        {"d_dR phi - k omega0", de_rham(inst.phi) - Scalar(inst.k) * inst.omega0},
    };
}

Element phi_at_origin(const DarbouxInstance& inst) {
    std::map<std::string, Scalar> pt;
    for (const auto& n : inst.degree_zero()) {
        const auto& g = (*inst.table)[inst.table->index(n)];
        pt[n] = g.invertible ? Scalar(1) : Scalar(0);
    }
    return evaluate(inst.Phi, pt);
}

HamiltonianSplit split_hamiltonian(const DarbouxInstance& inst) {
    if (inst.variant != Variant::Darboux)
        throw Error("WrongVariant", "the Hamiltonian splitting needs plain Darboux form");
    const Table& t = *inst.table;
    std::vector<int> ys;
    for (const auto& L : inst.levels)
        for (const auto& y : L.y) ys.push_back(t.index(y));
    HamiltonianSplit s;
    s.Phi_plus = coefficient_free_of(inst.Phi, ys);
    s.phi_plus = Element(inst.table);
    for (const auto& L : inst.levels) {
        for (std::size_t j = 0; j < L.y.size(); ++j) {
            int yi = t.index(L.y[j]);
            int py = t[yi].parity;
            int pc = ((inst.k + 1 - t[yi].degree) % 2 + 2) % 2;
            Element c = differentiate(inst.Phi, yi) * sgn(py * pc);
            if (!c.free_of(ys))
                throw Error("NonlinearInY", "Phi is not linear in the y variables", c.str());
            s.comp[L.y[j]] = c;
            Scalar sg = sgn((L.i + 1) * (inst.k + 1));
            s.phi_plus -= sg * inst.gen(L.y[j]) * de_rham(inst.gen(L.x[j]));
        }
    }
    return s;
}

ResidualList check_split(const DarbouxInstance& inst, const HamiltonianSplit& s) {
    ResidualList out;
    Element re = inst.Phi - s.Phi_plus;
    for (const auto& L : inst.levels)
        for (const auto& y : L.y) re -= s.comp.at(y) * inst.gen(y);
    out.push_back({"reassemble", re});

    auto weighted = [&](const Element& f) {
        Element acc(inst.table);
        for (const auto& L : inst.levels)
            for (std::size_t j = 0; j < L.x.size(); ++j)
                acc += sgn(L.i + 1) * s.comp.at(L.y[j]) * differentiate(f, L.x[j]);
        return acc;
    };
    out.push_back({"plus", weighted(s.Phi_plus)});
    for (const auto& L : inst.levels)
        for (const auto& y : L.y) out.push_back({"comp:" + y, weighted(s.comp.at(y))});

    for (const auto& L : inst.levels) {
        for (std::size_t j = 0; j < L.x.size(); ++j) {
            const Element* dx = inst.A.d_gen(inst.table->index(L.x[j]));
            Element lhs = dx ? *dx : Element(inst.table);
            out.push_back({"dx:" + L.x[j], lhs - sgn(L.i + 1) * s.comp.at(L.y[j])});
            Element rhs = differentiate(s.Phi_plus, L.x[j]);
            for (const auto& L2 : inst.levels)
                for (const auto& y2 : L2.y) rhs += differentiate(s.comp.at(y2), L.x[j]) * inst.gen(y2);
            const Element* dy = inst.A.d_gen(inst.table->index(L.y[j]));
            out.push_back({"dy:" + L.y[j], (dy ? *dy : Element(inst.table)) - rhs});
        }
    }
    return out;
}

ResidualList check_split_triple(const DarbouxInstance& inst, const HamiltonianSplit& s) {
    const Cdga& A = inst.A;
    return {
        {"d Phi+", A.d(s.Phi_plus)},
        {"d_dR Phi+ + d phi+", de_rham(s.Phi_plus) + A.d(s.phi_plus)},
        {"d_dR phi+ + omega0", de_rham(s.phi_plus) + inst.omega0},
    };
}

DarbouxInstance strong_to_darboux(const DarbouxInstance& inst) {
    if (inst.variant != Variant::Strong)
        throw Error("WrongVariant", "strong_to_darboux needs all q equal to 1");
    if (!inst.table->gaussian()) throw Error("FieldLacksI", "the change of variables needs the field Q(i)");
    int md = (int)inst.z.size();
    if (md % 2 != 0) throw Error("OddMiddleDimension", "m_d = " + std::to_string(md) + " is odd");
    const int k = inst.k, d = inst.d;
    std::vector<RingGenSpec> specs;
    for (const auto& r : inst.table->ring_specs())
        if (std::find(inst.z.begin(), inst.z.end(), r.name) == inst.z.end()) specs.push_back(r);
    Level mid;
    mid.i = d;
    int half = md / 2;
    for (int j = 1; j <= half; ++j) {
        mid.x.push_back(family_name("x", d, j, half));
        mid.y.push_back(family_name("y", k - d, j, half));
        specs.push_back({mid.x.back(), d, false});
        specs.push_back({mid.y.back(), k - d, false});
    }
    auto t = Table::make(specs, k, inst.table->field());
    std::map<std::string, Element> img;
    Scalar h(mpq_class(1, 2));
    for (int j = 0; j < half; ++j) {
        Element x = Element::generator(t, mid.x[j]), y = Element::generator(t, mid.y[j]);
        img[inst.z[2 * j]] = (x + y) * h;
        img[inst.z[2 * j + 1]] = (x - y) * (-Scalar::i() * h);
    }
    Morphism sigma(inst.table, t, img);
    std::vector<Level> levels = inst.levels;
    if (half > 0) levels.push_back(mid);
    std::sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) { return a.i > b.i; });
    return darboux_from_table(k, t, levels, sigma.apply(inst.Phi), inst.attest_phi_reduced_zero);
}

CritLocus crit(const std::vector<std::string>& base_vars, const std::string& phi,
               const std::set<std::string>& invertible, const std::string& field) {
    DarbouxSpec s;
    s.k = -1;
    s.base_vars = base_vars;
    s.m[0] = (int)base_vars.size();
    s.invertible = invertible;
    s.field = field;
    s.phi = phi;
    s.attest_phi_reduced_zero = true;
    CritLocus c{build_darboux(s), {}};
    require_degree(c.inst.Phi, 0, "Phi");
    for (const auto& x : base_vars) c.ideal.push_back(differentiate(c.inst.Phi, x));
    return c;
}

CritLocus quadratic_zero_locus(const std::vector<std::string>& base_vars, const std::vector<std::string>& q,
                               const std::vector<std::string>& s, const std::set<std::string>& invertible,
                               const std::string& field) {
    if (q.size() != s.size()) throw Error("SchemaError", "q and s must have the same length");
    const int k = -2, d = -1;
    std::map<int, int> m{{0, (int)base_vars.size()}};
    Shape sh = darboux_shape(k, 0, m, base_vars, invertible);
    int md = (int)q.size();
    for (int j = 1; j <= md; ++j) {
        sh.z.push_back(family_name("z", d, j, md));
        sh.specs.push_back({sh.z.back(), d, false});
    }
    auto t = Table::make(sh.specs, k, field);
    std::vector<Element> qs, ss;
    Element Phi(t), qss(t);
    for (int j = 0; j < md; ++j) {
        qs.push_back(parse(q[j], t));
        ss.push_back(parse(s[j], t));
        require_degree(ss.back(), 0, "s" + std::to_string(j + 1));
        if (!qs.back().is_unit()) throw Error("NotAUnit", "q" + std::to_string(j + 1) + " = " + q[j]);
        Phi += Element::generator(t, sh.z[j]) * ss.back();
        qss += ss.back() * ss.back() * qs.back().unit_inverse();
    }
    if (!qss.is_zero()) throw Error("QssNonzero", "sum of s_j^2/q_j is " + qss.str(), qss.str());
    CritLocus c{weak_from_parts(k, t, sh.levels, sh.z, qs, Phi), ss};
    return c;
}

}  // namespace ssw
