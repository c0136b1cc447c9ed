#include "ssw/pointcheck.hpp"

#include <algorithm>
#include <set>

#include "ssw/derham.hpp"
#include "ssw/error.hpp"
#include "ssw/linalg.hpp"

namespace ssw {

namespace {

std::vector<int> gens_of_degree(const Table& t, int n) {
    std::vector<int> r;
    for (int g : t.ring_indices())
        if (t[g].degree == n) r.push_back(g);
    return r;
}

std::pair<int, int> degree_range(const Table& t) {
    int lo = 0;
    for (int g : t.ring_indices()) lo = std::min(lo, t[g].degree);
    return {lo, 0};
}

// Coefficient of the symbol `sym` in a linear expression, at p.
Scalar coeff_at(const Element& lin, int sym, const ClassicalPoint& p) {
    if (lin.is_zero()) return Scalar(0);
    return value_at(differentiate(lin, sym), p);
}

QMatrix scaled(QMatrix m, const Scalar& s) {
    for (auto& r : m)
        for (auto& v : r) v *= s;
    return m;
}

// Entrywise equality; missing entries count as zero.
bool same(const QMatrix& a, const QMatrix& b) {
    auto at = [](const QMatrix& m, std::size_t i, std::size_t j) {
        return i < m.size() && j < m[i].size() ? m[i][j] : Scalar(0);
    };
    std::size_t rows = std::max(a.size(), b.size()), cols = 0;
    for (const auto& r : a) cols = std::max(cols, r.size());
    for (const auto& r : b) cols = std::max(cols, r.size());
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (at(a, i, j) != at(b, i, j)) return false;
    return true;
}

// Degree shift by k; the shifted differential is -d for every k.
PointwiseComplex shifted(const PointwiseComplex& c, int k) {
    PointwiseComplex r;
    for (const auto& [n, b] : c.basis) r.basis[n - k] = b;
    for (const auto& [n, m] : c.d) r.d[n - k] = scaled(m, Scalar(-1));
    return r;
}

// Block matrix [[a, b], [c, d]] with given block sizes.
QMatrix blocks(std::size_t r1, std::size_t r2, std::size_t c1, std::size_t c2, const QMatrix* a, const QMatrix* b,
               const QMatrix* c, const QMatrix* d) {
    QMatrix m = zero_matrix(r1 + r2, c1 + c2);
    auto put = [&](const QMatrix* x, std::size_t r0, std::size_t c0) {
        if (!x) return;
        for (std::size_t i = 0; i < x->size(); ++i)
            for (std::size_t j = 0; j < (*x)[i].size(); ++j) m[r0 + i][c0 + j] = (*x)[i][j];
    };
    put(a, 0, 0);
    put(b, 0, c1);
    put(c, r1, 0);
    put(d, r1, c1);
    return m;
}

std::vector<SparseRow> sparse(const QMatrix& m) {
    std::vector<SparseRow> rows;
    for (const auto& r : m) {
        SparseRow s;
        for (std::size_t j = 0; j < r.size(); ++j)
            if (!r[j].is_zero()) s[(int)j] = r[j];
        rows.push_back(std::move(s));
    }
    return rows;
}

}  // namespace

QMatrix zero_matrix(std::size_t rows, std::size_t cols) {
    return QMatrix(rows, std::vector<Scalar>(cols, Scalar(0)));
}

std::size_t matrix_rank(const QMatrix& m) { return rank_exact(sparse(m)); }

QMatrix matmul(const QMatrix& a, const QMatrix& b) {
    std::size_t n = a.size(), k = b.size(), c = b.empty() ? 0 : b[0].size();
    QMatrix r = zero_matrix(n, c);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            if (a[i][l].is_zero()) continue;
            for (std::size_t j = 0; j < c; ++j) r[i][j] += a[i][l] * b[l][j];
        }
    return r;
}

bool is_zero_matrix(const QMatrix& m) {
    for (const auto& r : m)
        for (const auto& v : r)
            if (!v.is_zero()) return false;
    return true;
}

std::string matrix_str(const QMatrix& m) {
    std::string s = "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        s += i ? ", [" : "[";
        for (std::size_t j = 0; j < m[i].size(); ++j) s += (j ? ", " : "") + m[i][j].str();
        s += "]";
    }
    return s + "]";
}

void check_point(const Cdga& c, const ClassicalPoint& p) {
    const Table& t = *c.table();
    for (const auto& [name, v] : p) {
        auto idx = t.find(name);
        if (!idx || t[*idx].kind != GenKind::Ring || t[*idx].degree != 0)
            throw Error("InvalidPoint", "'" + name + "' is not a degree-0 generator");
        if (t[*idx].invertible && v.is_zero()) throw Error("InvalidPoint", "unit '" + name + "' set to 0");
    }
    for (int g : t.ring_indices()) {
        if (t[g].degree == 0 && !p.count(t[g].name))
            throw Error("InvalidPoint", "no value for '" + t[g].name + "'");
        if (t[g].degree != -1) continue;
        const Element* dg = c.d_gen(g);
        if (!dg) continue;
        Scalar v = value_at(*dg, p);
        if (!v.is_zero())
            throw Error("InvalidPoint", "d(" + t[g].name + ") = " + dg->str() + " is " + v.str() + " at the point");
    }
}

Scalar value_at(const Element& f, const ClassicalPoint& p) {
    if (f.is_zero()) return Scalar(0);
    return evaluate(f, p).constant_term();
}

std::size_t PointwiseComplex::dim(int n) const {
    auto it = basis.find(n);
    return it == basis.end() ? 0 : it->second.size();
}

QMatrix PointwiseComplex::diff(int n) const {
    auto it = d.find(n);
    if (it != d.end()) return it->second;
    return zero_matrix(dim(n + 1), dim(n));
}

int PointwiseComplex::lo() const { return basis.empty() ? 0 : basis.begin()->first; }
int PointwiseComplex::hi() const { return basis.empty() ? 0 : basis.rbegin()->first; }

bool PointwiseComplex::squares_to_zero() const {
    for (int n = lo() - 1; n <= hi(); ++n)
        if (!is_zero_matrix(matmul(diff(n + 1), diff(n)))) return false;
    return true;
}

long PointwiseComplex::cohomology(int n) const {
    return (long)dim(n) - (long)matrix_rank(diff(n)) - (long)matrix_rank(diff(n - 1));
}

long PointwiseComplex::euler() const {
    long e = 0;
    for (const auto& [n, b] : basis) e += (n % 2 == 0 ? 1 : -1) * (long)b.size();
    return e;
}

PointwiseComplex cotangent_at(const Cdga& c, const ClassicalPoint& p, bool classical) {
    if (classical) check_point(c, p);
    const auto& tp = c.table();
    const Table& t = *tp;
    PointwiseComplex out;
    auto [lo, hi] = degree_range(t);
    for (int n = lo; n <= hi; ++n)
        for (int g : gens_of_degree(t, n)) out.basis[n].push_back("d(" + t[g].name + ")");
    for (int n = lo; n < hi; ++n) {
        auto src = gens_of_degree(t, n), tgt = gens_of_degree(t, n + 1);
        if (src.empty() || tgt.empty()) continue;
        QMatrix m = zero_matrix(tgt.size(), src.size());
        for (std::size_t j = 0; j < src.size(); ++j) {
            const Element* dg = c.d_gen(src[j]);
            if (!dg) continue;
            Element form = de_rham(*dg);
            for (std::size_t i = 0; i < tgt.size(); ++i) m[i][j] = coeff_at(form, t[tgt[i]].dr, p);
        }
        out.d[n] = m;
    }
    return out;
}

PointwiseComplex tangent_at(const Cdga& c, const ClassicalPoint& p, bool classical) {
    if (classical) check_point(c, p);
    const Table& t = *c.table();
    PointwiseComplex out;
    auto [lo, hi] = degree_range(t);
    for (int n = -hi; n <= -lo; ++n)
        for (int g : gens_of_degree(t, -n)) out.basis[n].push_back("D(" + t[g].name + ")");
    for (int n = -hi; n < -lo; ++n) {
        auto src = gens_of_degree(t, -n), tgt = gens_of_degree(t, -n - 1);
        if (src.empty() || tgt.empty()) continue;
        QMatrix m = zero_matrix(tgt.size(), src.size());
        for (std::size_t j = 0; j < src.size(); ++j) {
            Element v = c.d(Element::generator(c.table(), t[src[j]].vec));
            for (std::size_t i = 0; i < tgt.size(); ++i) m[i][j] = coeff_at(v, t[tgt[i]].vec, p);
        }
        out.d[n] = m;
    }
    return out;
}

QMatrix PointwiseMap::at(int n) const {
    auto it = f.find(n);
    if (it != f.end()) return it->second;
    return zero_matrix(tgt.dim(n), src.dim(n));
}

bool PointwiseMap::is_chain_map() const {
    int lo = std::min(src.lo(), tgt.lo()) - 1, hi = std::max(src.hi(), tgt.hi());
    for (int n = lo; n <= hi; ++n)
        if (!same(matmul(at(n + 1), src.diff(n)), matmul(tgt.diff(n), at(n)))) return false;
    return true;
}

// cone^n = src^{n+1} + tgt^n, d(a, b) = (-d a, f a + d b)
PointwiseComplex mapping_cone(const PointwiseMap& m) {
    PointwiseComplex c;
    int lo = std::min(m.src.lo() - 1, m.tgt.lo()), hi = std::max(m.src.hi() - 1, m.tgt.hi());
    for (int n = lo; n <= hi; ++n) {
        std::vector<std::string> b;
        for (const auto& s : m.src.basis.count(n + 1) ? m.src.basis.at(n + 1) : std::vector<std::string>{})
            b.push_back("src:" + s);
        for (const auto& s : m.tgt.basis.count(n) ? m.tgt.basis.at(n) : std::vector<std::string>{})
            b.push_back("tgt:" + s);
        if (!b.empty()) c.basis[n] = b;
    }
    for (int n = lo; n < hi; ++n) {
        QMatrix a = scaled(m.src.diff(n + 1), Scalar(-1));
        QMatrix f = m.at(n + 1);
        QMatrix d = m.tgt.diff(n);
        c.d[n] = blocks(m.src.dim(n + 2), m.tgt.dim(n + 1), m.src.dim(n + 1), m.tgt.dim(n), &a, nullptr, &f, &d);
    }
    return c;
}

bool quasi_iso_by_cone(const PointwiseMap& m) {
    PointwiseComplex c = mapping_cone(m);
    for (const auto& [n, b] : c.basis)
        if (c.cohomology(n) != 0) return false;
    return true;
}

bool quasi_iso_by_cohomology(const PointwiseMap& m) {
    int lo = std::min(m.src.lo(), m.tgt.lo()), hi = std::max(m.src.hi(), m.tgt.hi());
    for (int n = lo; n <= hi; ++n) {
        long hs = m.src.cohomology(n), ht = m.tgt.cohomology(n);
        if (hs != ht) return false;
        if (hs == 0) continue;
        // cycles of src, pushed forward, modulo boundaries of tgt
        std::size_t ns = m.src.dim(n);
        QMatrix dn = m.src.diff(n);
        std::vector<SparseRow> rows = sparse(dn);
        std::vector<std::vector<Scalar>> cycles = nullspace(rows, (int)ns);
        QMatrix fn = m.at(n);
        QMatrix bnd = m.tgt.diff(n - 1);  // columns are boundaries
        std::size_t nt = m.tgt.dim(n);
        QMatrix span = zero_matrix(0, nt);
        for (std::size_t j = 0; j < (bnd.empty() ? 0 : bnd[0].size()); ++j) {
            std::vector<Scalar> col(nt);
            for (std::size_t i = 0; i < nt; ++i) col[i] = bnd[i][j];
            span.push_back(col);
        }
        std::size_t rb = matrix_rank(span);
        for (const auto& z : cycles) {
            std::vector<Scalar> img(nt, Scalar(0));
            for (std::size_t i = 0; i < nt; ++i)
                for (std::size_t j = 0; j < ns; ++j) img[i] += fn[i][j] * z[j];
            span.push_back(img);
        }
        if ((long)(matrix_rank(span) - rb) != ht) return false;
    }
    return true;
}

PointwiseMap symplectic_map_at(const DarbouxInstance& inst, const ClassicalPoint& p, bool classical) {
    const Cdga& A = inst.A;
    const Table& t = *inst.table;
    PointwiseMap m;
    m.src = tangent_at(A, p, classical);
    m.tgt = shifted(cotangent_at(A, p, classical), inst.k);
    for (const auto& [n, b] : m.src.basis) {
        auto src = gens_of_degree(t, -n), tgt = gens_of_degree(t, n + inst.k);
        QMatrix f = zero_matrix(tgt.size(), src.size());
        for (std::size_t j = 0; j < src.size(); ++j) {
            Element theta = differentiate(inst.omega0, t[src[j]].dr);
            for (std::size_t i = 0; i < tgt.size(); ++i) f[i][j] = coeff_at(theta, t[tgt[i]].dr, p);
        }
        m.f[n] = f;
    }
    return m;
}

namespace {

NondegeneracyReport decide(const PointwiseMap& m) {
    NondegeneracyReport r;
    r.chain_map = m.is_chain_map();
    PointwiseComplex cone = mapping_cone(m);
    for (const auto& [n, b] : cone.basis) r.cone_cohomology[n] = cone.cohomology(n);
    r.complexes = m.src.squares_to_zero() && m.tgt.squares_to_zero();
    r.nondegenerate = r.complexes && r.chain_map && quasi_iso_by_cone(m);
    if (!m.src.squares_to_zero()) r.lines.push_back("source complex does not square to zero");
    if (!m.tgt.squares_to_zero()) r.lines.push_back("target complex does not square to zero");
    if (!r.chain_map) r.lines.push_back("the pointwise map does not commute with the differentials");
    for (const auto& [n, h] : r.cone_cohomology)
        if (h) r.lines.push_back("cone cohomology in degree " + std::to_string(n) + " has dimension " + std::to_string(h));
    return r;
}

}  // namespace

NondegeneracyReport symplectic_nondegenerate_at(const DarbouxInstance& inst, const ClassicalPoint& p,
                                                bool classical) {
    return decide(symplectic_map_at(inst, p, classical));
}

PointwiseMap lagrangian_map_at(const LagrangianPointData& data, const ClassicalPoint& p, bool classical) {
    const Cdga& A = *data.A;
    const Cdga& B = *data.B;
    const Table& ta = *A.table();
    const Table& tb = *B.table();
    if (classical) check_point(B, p);
    ClassicalPoint pa;
    for (int g : ta.ring_indices())
        if (ta[g].degree == 0) pa[ta[g].name] = value_at(data.alpha->image(ta[g].name), p);
    PointwiseComplex TB = tangent_at(B, p, classical), TA = tangent_at(A, pa, false);

    // phi: T_B -> T_A, D(b) -> sum_a d alpha(a)/db D(a)
    auto phi = [&](int n) {
        auto src = gens_of_degree(tb, -n), tgt = gens_of_degree(ta, -n);
        QMatrix f = zero_matrix(tgt.size(), src.size());
        for (std::size_t i = 0; i < tgt.size(); ++i) {
            Element img = data.alpha->image(ta[tgt[i]].name);
            for (std::size_t j = 0; j < src.size(); ++j) f[i][j] = coeff_at(img, src[j], p);
        }
        return f;
    };

    PointwiseMap m;
    // fibre F^n = T_B^n + T_A^{n-1}, d(b, a) = (d b, phi b - d a);
    // chi(b, a) = iota_b h0 - alpha_*(iota_a omega0)
    int lo = std::min(TB.lo(), TA.lo() + 1), hi = std::max(TB.hi(), TA.hi() + 1);
    for (int n = lo; n <= hi; ++n) {
        std::vector<std::string> b;
        for (const auto& s : TB.basis.count(n) ? TB.basis.at(n) : std::vector<std::string>{}) b.push_back(s);
        for (const auto& s : TA.basis.count(n - 1) ? TA.basis.at(n - 1) : std::vector<std::string>{})
            b.push_back("A:" + s);
        if (!b.empty()) m.src.basis[n] = b;
    }
    for (int n = lo; n < hi; ++n) {
        QMatrix dB = TB.diff(n), ph = phi(n), dA = scaled(TA.diff(n - 1), Scalar(-1));
        m.src.d[n] = blocks(TB.dim(n + 1), TA.dim(n), TB.dim(n), TA.dim(n - 1), &dB, nullptr, &ph, &dA);
    }
    m.tgt = shifted(cotangent_at(B, p, classical), data.k - 1);

    for (const auto& [n, basis] : m.src.basis) {
        auto bsrc = gens_of_degree(tb, -n), asrc = gens_of_degree(ta, 1 - n);
        auto tgt = gens_of_degree(tb, n + data.k - 1);
        QMatrix f = zero_matrix(tgt.size(), bsrc.size() + asrc.size());
        for (std::size_t j = 0; j < bsrc.size(); ++j) {
            Element theta = differentiate(data.h0, tb[bsrc[j]].dr);
            for (std::size_t i = 0; i < tgt.size(); ++i) f[i][j] = coeff_at(theta, tb[tgt[i]].dr, p);
        }
        for (std::size_t j = 0; j < asrc.size(); ++j) {
            Element theta = data.alpha->apply(differentiate(data.omega0, ta[asrc[j]].dr));
            // -(-1)^{|a|}; odd |a| only meets nonzero entries away from the origin
            Scalar s = ta[asrc[j]].degree % 2 == 0 ? Scalar(-1) : Scalar(1);
            for (std::size_t i = 0; i < tgt.size(); ++i)
                f[i][bsrc.size() + j] = s * coeff_at(theta, tb[tgt[i]].dr, p);
        }
        m.f[n] = f;
    }
    return m;
}

NondegeneracyReport lagrangian_nondegenerate_at(const LagrangianPointData& data, const ClassicalPoint& p,
                                                bool classical) {
    return decide(lagrangian_map_at(data, p, classical));
}

NondegeneracyReport lagrangian_nondegenerate_at(const LagrangianInstance& inst, const ClassicalPoint& p,
                                                bool classical) {
    LagrangianPointData data{&inst.base.A, &inst.B, &inst.alpha, inst.k, inst.base.omega0, inst.h0};
    NondegeneracyReport r = lagrangian_nondegenerate_at(data, p, classical);
    // pairing blocks: coefficient of d_dR u d_dR v in h0
    const Table& t = *inst.table;
    for (const auto& L : inst.levels()) {
        QMatrix b = zero_matrix(L.u.size(), L.v.size());
        for (std::size_t i = 0; i < L.u.size(); ++i)
            for (std::size_t j = 0; j < L.v.size(); ++j) {
                Element c = differentiate(differentiate(inst.h0, t[t.index(L.u[i])].dr), t[t.index(L.v[j])].dr);
                b[i][j] = value_at(c, p);
            }
        r.b_matrices[L.i] = b;
        r.lines.push_back("pairing block at level " + std::to_string(L.i) + ": " + matrix_str(b));
    }
    if (inst.k % 2 != 0) {
        int e = (inst.k - 1) / 2;
        std::vector<std::string> a, b;
        if (!inst.shape.w.empty()) {
            a = b = inst.shape.w;
        } else {
            for (const auto& L : inst.levels())
                if (L.i == e) a = L.u, b = L.v;
        }
        r.middle = zero_matrix(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j)
                r.middle[i][j] =
                    value_at(differentiate(differentiate(inst.h0, t[t.index(a[i])].dr), t[t.index(b[j])].dr), p);
        r.middle_kind = ((inst.k % 4) + 4) % 4 == 3 ? "symmetric" : "antisymmetric";
        r.lines.push_back(r.middle_kind + " middle block in degree " + std::to_string(e) + ": " +
                          matrix_str(r.middle));
    }
    return r;
}

NondegeneracyReport lagrangian_nondegenerate_at(const DarbouxInstance& base, const RawLagrangian& raw,
                                                const ClassicalPoint& p, bool classical) {
    if (base.k == 1) throw Error("DegreeMismatch", "k = 1 has no isotropic primitive");
    Element h0 = de_rham(raw.psi) * Scalar(base.k - 1).inverse();
    LagrangianPointData data{&base.A, &raw.B, &raw.alpha, base.k, base.omega0, h0};
    return lagrangian_nondegenerate_at(data, p, classical);
}

}  // namespace ssw
