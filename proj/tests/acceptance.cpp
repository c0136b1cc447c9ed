// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iterator>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "laws.hpp"
#include "ssw/poisson.hpp"

using namespace ssw;
using fixtures::data_path;
using fixtures::json_files;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;
    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

std::string first_failure(const Report& r) {
    for (const auto& c : r.checks)
        if (c.status == "fail") return c.name + (c.residual.empty() ? "" : " = " + c.residual);
    return "";
}

int threads() { return threads_from_env(); }

std::vector<std::string> golden() { return json_files("golden"); }

const DarbouxInstance& base_of(const BuiltInstance& b) { return b.lag ? b.lag->base : *b.base; }

Verdict identity_suite() {
    Verdict v;
    VerifyOptions opt;
    opt.threads = threads();
    int n = 0;
    for (const auto& path : golden()) {
        Report r = run_verify(load_instance(path), opt);
        if (!r.passed()) v.fail(path + ": " + first_failure(r));
        n += (int)r.count("pass");
    }
    v.detail = v.ok ? std::to_string(golden().size()) + " instances, " + std::to_string(n) + " zero residuals" : v.detail;
    return v;
}

Verdict mutations() {
    Verdict v;
    nlohmann::json expected = fixtures::read_json(data_path("mutations/expected.json"));
    int rejected = 0;
    for (const auto& path : json_files("mutations")) {
        std::string name = std::filesystem::path(path).filename().string();
        Report r = run_verify(load_instance(path));
        const CheckResult* c = r.find(expected.at(name).at("check").get<std::string>());
        if (r.passed() || !c || c->status != "fail") {
            v.fail(name + " not rejected");
            continue;
        }
        if (c->residual != expected.at(name).at("residual").get<std::string>()) {
            v.fail(name + " residual " + c->residual);
            continue;
        }
        ++rejected;
    }
    if (rejected != 20) v.fail(std::to_string(rejected) + " of 20 rejected");
    if (v.ok) v.detail = "20 rejected with their residuals";
    return v;
}

std::vector<InstanceFile> generated(const std::string& family, int k, int count) {
    std::vector<InstanceFile> out;
    for (int seed = 0; seed < count; ++seed) out.push_back(gen_instance(k, family, seed));
    return out;
}

Verdict generator_soundness() {
    Verdict v;
    VerifyOptions opt;
    opt.threads = threads();
    int n = 0;
    for (auto [family, k] : std::vector<std::pair<std::string, int>>{{"conormal", -2}, {"conormal", -4}, {"critlocus", -1}}) {
        auto files = generated(family, k, 50);
        auto reports = verify_batch(files, opt);
        for (std::size_t i = 0; i < reports.size(); ++i, ++n)
            if (!reports[i].passed()) v.fail(family + " k=" + std::to_string(k) + " seed " + std::to_string(i) + ": " + first_failure(reports[i]));
    }
    if (v.ok) v.detail = std::to_string(n) + " instances";
    return v;
}

Verdict brackets() {
    Verdict v;
    int tables = 0, structures = 0;
    for (const auto& path : golden()) {
        BuiltInstance b = build_instance(load_instance(path));
        const DarbouxInstance& base = base_of(b);
        Element pi = bivector_from_darboux(base).pi;
        if (base.variant == Variant::Darboux) {
            if (!all_zero(check_bracket_table(base, pi))) v.fail(path + ": bracket table");
            ++tables;
        }
        int k = base.k;
        Bracket br = [pi, k](const Element& a, const Element& c) { return bracket_from_bivector(pi, k, a, c); };
        if (!all_zero(check_p_structure(base.A, br, k))) v.fail(path + ": axioms");
        ++structures;
    }
    if (tables == 0) v.fail("no plain Darboux golden instance");
    if (v.ok) v.detail = std::to_string(tables) + " bracket tables, " + std::to_string(structures) + " axiom sweeps";
    return v;
}

Verdict poisson_coisotropic() {
    Verdict v;
    int pis = 0, cois = 0;
    bool weak_k2 = false;
    for (const auto& path : golden()) {
        BuiltInstance b = build_instance(load_instance(path));
        const DarbouxInstance& base = base_of(b);
        StrictPoissonData p = bivector_from_darboux(base);
        if (!p.ok()) v.fail(path + ": d pi or [pi, pi]");
        ++pis;
        weak_k2 = weak_k2 || (base.variant != Variant::Darboux && base.k == -2);
        if (b.lag) {
            if (!all_zero(check_coisotropic(*b.lag, coisotropic_from_lagrangian(*b.lag)))) v.fail(path + ": coisotropic");
            ++cois;
        }
    }
    if (!weak_k2) v.fail("no weak k = -2 golden instance");
    if (v.ok) v.detail = std::to_string(pis) + " bivectors, " + std::to_string(cois) + " coisotropic structures";
    return v;
}

Verdict nondegeneracy() {
    Verdict v;
    VerifyOptions opt;
    opt.threads = threads();
    opt.groups = {"nondegenerate"};
    for (const auto& path : golden()) {
        InstanceFile f = load_instance(path);
        Report r = run_verify(f, opt);
        // loci like Crit(x^3) have a single rational point; the declared
        // diagnostic points make up the count
        int classical = 0, good = 0;
        auto count = [&](const std::map<std::string, PointValues>& pts, int& tally) {
            for (const auto& [name, _] : pts) {
                const CheckResult* c = r.find("nondegenerate:" + name);
                tally += c && c->status == "pass";
            }
        };
        count(f.points, classical);
        good = classical;
        count(f.diagnostic_points, good);
        if (classical < 1 || good < 3)
            v.fail(path + ": " + std::to_string(classical) + " classical and " + std::to_string(good) + " total nondegenerate points");
    }
    int caught = 0;
    for (const auto& path : json_files("corrupt")) {
        fixtures::CorruptOutcome o = fixtures::run_corrupt(path);
        bool ok = o.applied && !o.verdicts.empty();
        for (const auto& [_, nd] : o.verdicts) ok = ok && !nd;
        for (const auto& [_, nd] : o.baseline) ok = ok && nd;
        if (!ok) v.fail(o.name + " not detected");
        caught += ok;
    }
    if (caught != 10) v.fail(std::to_string(caught) + " of 10 corruptions detected");
    if (v.ok) v.detail = "3+ points on every golden instance, 10 corruptions detected";
    return v;
}

// Flip the sign of one term of e.
Element flip_term(const Element& e, std::size_t i) {
    auto it = std::next(e.terms().begin(), (long)i);
    Element t(e.table());
    t.add_term(it->first, it->second);
    return e - Scalar(2) * t;
}

Verdict normalization() {
    Verdict v;
    int n = 0, mutants = 0;
    for (int k : {-2, -4})
        for (int seed = 0; seed < 25; ++seed) {
            std::string tag = "k=" + std::to_string(k) + " seed " + std::to_string(seed);
            InstanceFile raw = gen_instance(k, "obfuscated", seed);
            NormalizeOutcome out = run_normalize(raw, threads());
            if (!out.output) {
                v.fail(tag + ": " + first_failure(out.report));
                continue;
            }
            BuiltInstance b = build_instance(raw);
            Normalized nz = normalize(*b.base, *b.raw);
            const HomotopyCertificate& c = nz.cert;
            auto check = [&](const Morphism& H, const Element& hdot0) {
                return all_zero(verify_homotopy(*b.base, c.Bst, H, c.alpha_hat, c.alpha, hdot0, c.h0_hat, c.h0));
            };
            if (!check(c.H, c.hdot0)) v.fail(tag + ": certificate rejected");
            for (std::size_t i = 0; i < c.hdot0.terms().size(); ++i, ++mutants)
                if (check(c.H, flip_term(c.hdot0, i))) v.fail(tag + ": hdot0 sign flip accepted");
            const Table& a = *c.H.source();
            for (int g : a.ring_indices()) {
                Element img = c.H.image(a[g].name);
                for (std::size_t i = 0; i < img.terms().size(); ++i, ++mutants)
                    if (check(c.H.with_image(a[g].name, flip_term(img, i)), c.hdot0))
                        v.fail(tag + ": H(" + a[g].name + ") sign flip accepted");
            }
            ++n;
        }
    if (v.ok) v.detail = std::to_string(n) + " round trips, " + std::to_string(mutants) + " mutants rejected";
    return v;
}

Verdict vdim_parity() {
    Verdict v;
    std::vector<InstanceFile> files;
    for (auto [family, k] : std::vector<std::pair<std::string, int>>{
             {"conormal", -2}, {"conormal", -4}, {"critlocus", -1}, {"quadratic", -2}, {"obfuscated", -2}, {"obfuscated", -4}})
        for (auto& f : generated(family, k, 25)) files.push_back(f);
    for (const auto& f : files) {
        BuiltInstance b = build_instance(f);
        const DarbouxInstance& base = *b.base;
        long x = base.A.vdim();
        if (!vdim_parity_check(f.k, Role::Symplectic, x).ok) v.fail(f.role + ": symplectic verdict");
        if (base.variant == Variant::Darboux) {
            // paired generators at degrees i and k - i: equal parity for k even, opposite for k odd
            long pairs = 0;
            for (const auto& [d, m] : f.m) pairs += (d % 2 ? -1 : 1) * m;
            long want = f.k % 2 ? 0 : 2 * pairs;
            if (x != want) v.fail(f.role + ": vdim " + std::to_string(x) + ", expected " + std::to_string(want));
        }
        const Cdga* B = b.lag ? &b.lag->B : b.raw ? &b.raw->B : nullptr;
        if (B) {
            long l = B->vdim();
            if (!vdim_parity_check(f.k, Role::Lagrangian, x, l).ok) v.fail(f.role + ": lagrangian verdict");
            if (f.k % 2 == 0 && 2 * l != x) v.fail(f.role + ": vdim L " + std::to_string(l) + " vs vdim X " + std::to_string(x));
        }
    }
    if (v.ok) v.detail = std::to_string(files.size()) + " generated instances";
    return v;
}

Verdict kernel_laws() {
    Verdict v;
    for (const auto& law : laws::all()) {
        laws::Outcome o = laws::run(law, 10000);
        if (o.failures) v.fail(law.name + ": " + std::to_string(o.failures) + " failures, first " + o.first);
    }
    if (v.ok) v.detail = std::to_string(laws::all().size()) + " laws x 10000 cases";
    return v;
}

struct Criterion {
    int id;
    std::string name;
    double limit;  // seconds, 0 for none
    std::function<Verdict()> run;
};

}  // namespace

int main() {
    std::vector<Criterion> all{
        {1, "calibration identity suite", 5, identity_suite},
        {2, "master-equation gating", 0, mutations},
        {3, "generator soundness", 60, generator_soundness},
        {4, "bracket table reproduction", 0, brackets},
        {5, "poisson and coisotropic structures", 0, poisson_coisotropic},
        {6, "nondegeneracy", 0, nondegeneracy},
        {7, "normalization round trip", 120, normalization},
        {8, "vdim parity", 0, vdim_parity},
        {9, "kernel laws", 0, kernel_laws},
    };
    int failed = 0;
    for (const auto& c : all) {
        auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.fail(std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit > 0 && secs >= c.limit) {
            std::ostringstream os;
            os << "took " << secs << "s, limit " << c.limit << "s";
            v.fail(os.str());
        }
        char timing[64];
        if (c.limit > 0)
            std::snprintf(timing, sizeof timing, "%.2fs < %.0fs", secs, c.limit);
        else
            std::snprintf(timing, sizeof timing, "%.2fs", secs);
        std::cout << (v.ok ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << " (" << timing << "): " << v.detail
                  << std::endl;
        failed += !v.ok;
    }
    return failed ? 1 : 0;
}
