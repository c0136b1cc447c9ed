#include "doctest.h"

#include <functional>

#include "ssw/darboux.hpp"
#include "ssw/derham.hpp"
#include "ssw/error.hpp"
#include "ssw/expr.hpp"
#include "ssw/lagrangian.hpp"
#include "ssw/pointcheck.hpp"

using namespace ssw;

namespace {

Element P(const std::string& s, const TablePtr& t) { return parse(s, t); }

DarbouxSpec dspec(int k, std::map<int, int> m, const std::string& phi) {
    DarbouxSpec s;
    s.k = k;
    s.m = std::move(m);
    s.phi = phi;
    return s;
}

LagrangianSpec lspec(std::map<int, int> n, const std::string& psi, std::vector<std::string> q = {}) {
    LagrangianSpec s;
    s.n = std::move(n);
    s.psi = psi;
    s.q = std::move(q);
    return s;
}

std::string code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

// Classical points on a small rational grid, in a fixed order.
std::vector<ClassicalPoint> grid_points(const Cdga& c, std::size_t want) {
    const Table& t = *c.table();
    std::vector<std::string> names;
    for (int g : t.ring_indices())
        if (t[g].degree == 0) names.push_back(t[g].name);
    const std::vector<Scalar> vals{Scalar(0), Scalar(1), Scalar(-1), Scalar(2), Scalar::from_string("1/2"),
                                   Scalar(-3)};
    std::vector<ClassicalPoint> out;
    std::function<void(std::size_t, ClassicalPoint&)> rec = [&](std::size_t i, ClassicalPoint& p) {
        if (out.size() >= want) return;
        if (i == names.size()) {
            if (code_of([&] { check_point(c, p); }).empty()) out.push_back(p);
            return;
        }
        for (const auto& v : vals) {
            p[names[i]] = v;
            rec(i + 1, p);
        }
    };
    ClassicalPoint p;
    rec(0, p);
    return out;
}

// Every sample has at least three classical points on the grid.
std::vector<DarbouxInstance> sample_darboux() {
    std::vector<DarbouxInstance> v;
    v.push_back(build_darboux(dspec(0, {{0, 2}}, "0")));
    v.push_back(build_darboux(dspec(-1, {{0, 2}}, "x1^3")));
    v.push_back(build_darboux(dspec(-1, {{0, 2}}, "x1^2*x2")));
    v.push_back(build_darboux(dspec(-2, {{0, 2}, {-1, 1}}, "(x1^2 - x1)*ym1")));
    v.push_back(build_darboux(dspec(-3, {{0, 2}, {-1, 1}}, "(x1^2 - 1)*ym2")));
    v.push_back(build_darboux(dspec(-4, {{0, 2}, {-1, 1}, {-2, 1}}, "(x1^2 - 1)*ym3")));
    DarbouxSpec w = dspec(-2, {{0, 2}, {-1, 2}}, "zm1_1*x1 + zm1_2*x1");
    w.q = {"1", "-1"};
    v.push_back(build_weak_darboux(w));
    DarbouxSpec wu = dspec(-2, {{0, 2}, {-1, 2}}, "zm1_1*x + zm1_2*x");
    wu.base_vars = {"u", "x"};
    wu.invertible = {"u"};
    wu.q = {"u", "-u"};
    v.push_back(build_weak_darboux(wu));
    return v;
}

std::vector<LagrangianInstance> sample_lagrangians() {
    std::vector<LagrangianInstance> v;
    auto k0 = build_darboux(dspec(0, {{0, 1}}, "0"));
    v.push_back(build_lagrangian_darboux(k0, lspec({{0, 1}}, "tx*u^2")));
    auto weak = build_darboux(dspec(-1, {{0, 1}}, "-x^2"));
    v.push_back(build_weak_lagrangian_darboux(weak, lspec({{0, 1}, {-1, 1}}, "2*tx*wm1", {"1"})));
    LagrangianSpec wq = lspec({{0, 1}, {-1, 1}}, "2*u*tx*wm1", {"u^2"});
    wq.invertible = {"u"};
    v.push_back(build_weak_lagrangian_darboux(weak, wq));
    auto conormal = build_darboux(dspec(-2, {{0, 1}, {-1, 1}}, "0"));
    v.push_back(build_lagrangian_darboux(conormal, lspec({{0, 1}, {-1, 1}}, "tx*u*vm2 + u^2*vm2")));
    v.push_back(build_lagrangian_darboux(conormal, lspec({{0, 1}, {-1, 1}}, "(tx^2 - u^2)*vm2")));
    auto ham = build_darboux(dspec(-2, {{0, 1}, {-1, 1}}, "x^2*ym1"));
    v.push_back(build_lagrangian_darboux(ham, lspec({{0, 1}, {-1, 1}}, "(tx + tx^3)*vm2 + u*tx*vm2")));
    std::map<int, int> n4{{0, 1}, {-1, 1}, {-2, 1}};
    auto k4 = build_darboux(dspec(-4, {{0, 1}, {-1, 1}, {-2, 1}}, "0"));
    v.push_back(build_lagrangian_darboux(k4, lspec(n4, "u*um1*vm3 + tx*txm1*vm3")));
    auto k4h = build_darboux(dspec(-4, {{0, 1}, {-1, 1}, {-2, 1}}, "x^2*ym3"));
    v.push_back(build_lagrangian_darboux(k4h, lspec(n4, "0")));
    return v;
}

LagrangianPointData data_of(const LagrangianInstance& inst) {
    return {&inst.base.A, &inst.B, &inst.alpha, inst.k, inst.base.omega0, inst.h0};
}

void check_complexes(const PointwiseMap& m) {
    CHECK(m.src.squares_to_zero());
    CHECK(m.tgt.squares_to_zero());
    CHECK(mapping_cone(m).squares_to_zero());
    CHECK(quasi_iso_by_cone(m) == quasi_iso_by_cohomology(m));
}

}  // namespace

TEST_CASE("cotangent complex of the critical locus of x^3") {
    auto inst = build_darboux(dspec(-1, {{0, 1}}, "x^3"));
    auto c0 = cotangent_at(inst.A, {{"x", Scalar(0)}});
    CHECK(c0.basis.at(-1) == std::vector<std::string>{"d(ym1)"});
    CHECK(c0.basis.at(0) == std::vector<std::string>{"d(x)"});
    CHECK(c0.diff(-1) == QMatrix{{Scalar(0)}});
    CHECK(code_of([&] { cotangent_at(inst.A, {{"x", Scalar(1)}}); }) == "InvalidPoint");
    auto c1 = cotangent_at(inst.A, {{"x", Scalar(1)}}, false);
    CHECK(c1.diff(-1) == QMatrix{{Scalar(6)}});
    auto t1 = tangent_at(inst.A, {{"x", Scalar(1)}}, false);
    CHECK(t1.basis.at(1) == std::vector<std::string>{"D(ym1)"});
    CHECK(t1.diff(0) == QMatrix{{Scalar(-6)}});
    CHECK(c0.cohomology(-1) == 1);
    CHECK(c0.cohomology(0) == 1);
    CHECK(c1.cohomology(0) == 0);
    CHECK(c0.euler() == 0);
}

TEST_CASE("zero differential gives zero matrices") {
    auto inst = build_darboux(dspec(-3, {{0, 2}, {-1, 1}}, "0"));
    for (const auto& p : grid_points(inst.A, 3)) {
        for (const auto& c : {cotangent_at(inst.A, p), tangent_at(inst.A, p)}) {
            for (const auto& [n, m] : c.d) CHECK(is_zero_matrix(m));
            long total = 0;
            for (const auto& [n, b] : c.basis) {
                CHECK(c.cohomology(n) == (long)b.size());
                total += (long)b.size();
            }
            CHECK(total == 6);
        }
    }
}

TEST_CASE("tangent differential is the signed transpose of the cotangent one") {
    for (const auto& inst : sample_darboux()) {
        const Table& t = *inst.table;
        for (const auto& p : grid_points(inst.A, 3)) {
            auto L = cotangent_at(inst.A, p);
            auto T = tangent_at(inst.A, p);
            for (int n = L.lo(); n < L.hi(); ++n) {
                QMatrix J = L.diff(n), D = T.diff(-n - 1);
                // D(g) for |g| = n + 1 maps to D(g') for |g'| = n
                for (std::size_t i = 0; i < J.size(); ++i)
                    for (std::size_t j = 0; j < J[i].size(); ++j) {
                        Scalar s = ((n + 1) % 2 == 0) ? Scalar(-1) : Scalar(1);
                        CHECK_MESSAGE(D[j][i] == s * J[i][j], t.shift() << " " << n);
                    }
            }
        }
    }
}

TEST_CASE("built darboux forms are nondegenerate at classical points") {
    for (const auto& inst : sample_darboux()) {
        auto pts = grid_points(inst.A, 4);
        CHECK(pts.size() >= 3);
        for (const auto& p : pts) {
            auto m = symplectic_map_at(inst, p);
            check_complexes(m);
            auto r = symplectic_nondegenerate_at(inst, p);
            CHECK_MESSAGE(r.chain_map, inst.omega0.str());
            CHECK_MESSAGE(r.nondegenerate, inst.omega0.str());
            for (const auto& [n, h] : r.cone_cohomology) CHECK(h == 0);
        }
    }
}

TEST_CASE("corrupted symplectic forms are degenerate") {
    auto inst = build_darboux(dspec(-1, {{0, 2}}, "x1^2*x2"));
    auto t = inst.table;
    auto pts = grid_points(inst.A, 3);
    REQUIRE(pts.size() >= 3);
    auto dropped = inst;
    dropped.omega0 = P("d(x1)*d(ym1_1)", t);
    REQUIRE(dropped.omega0 != inst.omega0);
    auto zero = inst;
    zero.omega0 = Element(t);
    for (const auto& p : pts) {
        auto a = symplectic_nondegenerate_at(dropped, p);
        CHECK_FALSE(a.nondegenerate);
        CHECK(quasi_iso_by_cone(symplectic_map_at(dropped, p)) ==
              quasi_iso_by_cohomology(symplectic_map_at(dropped, p)));
        CHECK_FALSE(symplectic_nondegenerate_at(zero, p).nondegenerate);
        check_complexes(symplectic_map_at(zero, p));
    }
}

TEST_CASE("built lagrangians are nondegenerate at classical points") {
    auto insts = sample_lagrangians();
    CHECK(insts.size() == 8);
    std::size_t total = 0;
    for (const auto& inst : insts) {
        auto pts = grid_points(inst.B, 4);
        CHECK_MESSAGE(pts.size() >= 3, inst.Psi.str());
        total += pts.size();
        for (const auto& p : pts) {
            check_complexes(lagrangian_map_at(data_of(inst), p));
            auto r = lagrangian_nondegenerate_at(inst, p);
            CHECK_MESSAGE(r.chain_map, inst.Psi.str());
            CHECK_MESSAGE(r.nondegenerate, inst.Psi.str());
            for (const auto& [i, b] : r.b_matrices) {
                for (std::size_t a = 0; a < b.size(); ++a)
                    for (std::size_t c = 0; c < b[a].size(); ++c) CHECK(b[a][c] == Scalar(a == c ? 1 : 0));
            }
            CHECK(r.middle_kind == (inst.k % 2 ? "symmetric" : ""));
        }
    }
}

TEST_CASE("odd-degree base pairs at even k enter the chain map") {
    std::map<int, int> n4{{0, 1}, {-1, 1}, {-2, 1}};
    auto k4 = build_darboux(dspec(-4, n4, "0"));
    auto inst = build_lagrangian_darboux(k4, lspec(n4, "2*tx*txm1*u*vm3 - 2*tx*vm4 - 2*u*vm4"));
    for (const auto& [tx, u] : std::vector<std::pair<long, long>>{{-1, 1}, {2, -2}, {0, 0}}) {
        ClassicalPoint p{{"tx", Scalar(tx)}, {"u", Scalar(u)}};
        auto m = lagrangian_map_at(data_of(inst), p);
        check_complexes(m);
        CHECK(m.is_chain_map());
        CHECK(lagrangian_nondegenerate_at(inst, p).nondegenerate);
    }
}

TEST_CASE("weak lagrangian middle block") {
    auto weak = build_darboux(dspec(-1, {{0, 1}}, "-x^2"));
    LagrangianSpec wq = lspec({{0, 1}, {-1, 1}}, "2*u*tx*wm1", {"u^2"});
    wq.invertible = {"u"};
    auto inst = build_weak_lagrangian_darboux(weak, wq);
    auto r = lagrangian_nondegenerate_at(inst, {{"tx", Scalar(0)}, {"u", Scalar(2)}});
    CHECK(r.nondegenerate);
    // h0 = d(u^2 wm1) d(wm1), second derivative in wm1 is 2 q
    CHECK(r.middle == QMatrix{{Scalar(8)}});
    CHECK(r.middle_kind == "symmetric");
}

TEST_CASE("corrupted lagrangian data is degenerate") {
    for (const auto& inst : sample_lagrangians()) {
        const auto& t = inst.table;
        for (const auto& L : inst.levels()) {
            for (std::size_t j = 0; j < L.u.size(); ++j) {
                auto d = data_of(inst);
                Element term = de_rham(inst.gen(L.u[j])) * de_rham(inst.gen(L.v[j]));
                d.h0 = inst.h0 - term;
                for (const auto& p : grid_points(inst.B, 3)) {
                    auto m = lagrangian_map_at(d, p);
                    CHECK(quasi_iso_by_cone(m) == quasi_iso_by_cohomology(m));
                    CHECK_FALSE(lagrangian_nondegenerate_at(d, p).nondegenerate);
                }
            }
        }
        if (!inst.shape.w.empty()) {
            auto d = data_of(inst);
            d.h0 = Element(t);
            for (const auto& p : grid_points(inst.B, 3)) CHECK_FALSE(lagrangian_nondegenerate_at(d, p).nondegenerate);
        }
    }
}

TEST_CASE("mismatched pairing counts") {
    auto base = build_darboux(dspec(-2, {{0, 1}}, "0"));
    auto t = Table::make({{"tx", 0}, {"u_1", 0}, {"u_2", 0}, {"vm3", -3}}, -3);
    Cdga B(t, {});
    Morphism alpha(base.table, t, {{"x", P("tx", t)}, {"ym2", Element(t)}});
    for (const auto& h : {"d(u_1)*d(vm3)", "d(u_2)*d(vm3)", "d(u_1)*d(vm3) + d(u_2)*d(vm3)"}) {
        LagrangianPointData d{&base.A, &B, &alpha, -2, base.omega0, P(h, t)};
        for (const auto& p : grid_points(B, 3)) {
            auto m = lagrangian_map_at(d, p);
            check_complexes(m);
            CHECK(m.is_chain_map());
            CHECK_FALSE(lagrangian_nondegenerate_at(d, p).nondegenerate);
        }
    }
}

TEST_CASE("raw gauge data") {
    for (const auto& inst : sample_lagrangians()) {
        if (inst.k == 0) continue;
        RawLagrangian raw{inst.shape, inst.B, inst.alpha, inst.Psi, inst.psi};
        for (const auto& p : grid_points(inst.B, 3)) CHECK(lagrangian_nondegenerate_at(inst.base, raw, p).nondegenerate);
        if (inst.k % 2 == 0) {
            auto obf = gauge_obfuscate(inst, 7);
            for (const auto& p : grid_points(obf.B, 3))
                CHECK_MESSAGE(lagrangian_nondegenerate_at(inst.base, obf, p).nondegenerate, inst.Psi.str());
        }
    }
}

TEST_CASE("invalid points") {
    auto inst = build_darboux(dspec(-1, {{0, 1}}, "x^3"));
    CHECK(code_of([&] { check_point(inst.A, {}); }) == "InvalidPoint");
    CHECK(code_of([&] { check_point(inst.A, {{"x", Scalar(0)}, {"q", Scalar(0)}}); }) == "InvalidPoint");
    CHECK(code_of([&] { check_point(inst.A, {{"x", Scalar(0)}, {"ym1", Scalar(0)}}); }) == "InvalidPoint");
    CHECK(code_of([&] { check_point(inst.A, {{"x", Scalar(2)}}); }) == "InvalidPoint");
    CHECK(code_of([&] { symplectic_nondegenerate_at(inst, {{"x", Scalar(2)}}); }) == "InvalidPoint");
    CHECK(code_of([&] { check_point(inst.A, {{"x", Scalar(0)}}); }).empty());

    DarbouxSpec wu = dspec(-2, {{0, 2}, {-1, 2}}, "zm1_1*x + zm1_2*x");
    wu.base_vars = {"u", "x"};
    wu.invertible = {"u"};
    wu.q = {"u", "-u"};
    auto w = build_weak_darboux(wu);
    CHECK(code_of([&] { check_point(w.A, {{"u", Scalar(0)}, {"x", Scalar(0)}}); }) == "InvalidPoint");
    CHECK(code_of([&] { check_point(w.A, {{"u", Scalar(3)}, {"x", Scalar(0)}}); }).empty());

    auto lag = sample_lagrangians()[3];
    CHECK(code_of([&] { lagrangian_nondegenerate_at(lag, {{"tx", Scalar(0)}}); }) == "InvalidPoint");
}

TEST_CASE("cone and cohomology deciders on small maps") {
    PointwiseComplex a, b;
    a.basis[0] = {"e"};
    b.basis[0] = {"f"};
    PointwiseMap iso{a, b, {{0, QMatrix{{Scalar(3)}}}}};
    CHECK(quasi_iso_by_cone(iso));
    CHECK(quasi_iso_by_cohomology(iso));
    PointwiseMap zero{a, b, {{0, QMatrix{{Scalar(0)}}}}};
    CHECK_FALSE(quasi_iso_by_cone(zero));
    CHECK_FALSE(quasi_iso_by_cohomology(zero));
    // acyclic source and target: any chain map is a quasi-isomorphism
    PointwiseComplex c;
    c.basis[0] = {"e0"};
    c.basis[1] = {"e1"};
    c.d[0] = QMatrix{{Scalar(1)}};
    PointwiseMap z{c, c, {}};
    CHECK(z.is_chain_map());
    CHECK(quasi_iso_by_cone(z));
    CHECK(quasi_iso_by_cohomology(z));
    CHECK(mapping_cone(z).squares_to_zero());
}

TEST_CASE("diagnostic points off the classical locus") {
    auto crit = build_darboux(dspec(-1, {{0, 1}}, "x^3"));
    CHECK(code_of([&] { symplectic_nondegenerate_at(crit, {{"x", Scalar(1)}}); }) == "InvalidPoint");
    for (long v : {1L, 2L, -3L}) {
        auto r = symplectic_nondegenerate_at(crit, {{"x", Scalar(v)}}, false);
        CHECK(r.complexes);
        CHECK(r.chain_map);
        CHECK(r.nondegenerate);
    }
    auto weak = build_darboux(dspec(-1, {{0, 1}}, "-x^2"));
    auto inst = build_weak_lagrangian_darboux(weak, lspec({{-1, 1}}, "2*tx*wm1", {"1"}));
    CHECK(lagrangian_nondegenerate_at(inst, {{"tx", Scalar(0)}}).nondegenerate);
    for (long v : {1L, -1L}) {
        auto r = lagrangian_nondegenerate_at(inst, {{"tx", Scalar(v)}}, false);
        CHECK(r.chain_map);
        CHECK(r.nondegenerate);
    }
}
