#pragma once

// Loaders for the data/ fixtures shared by the workbench and acceptance tests.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ssw/expr.hpp"
#include "ssw/pointcheck.hpp"
#include "ssw/workbench.hpp"

namespace fixtures {

inline std::string data_path(const std::string& rel) { return std::string(SSW_DATA_DIR) + "/" + rel; }

inline std::vector<std::string> json_files(const std::string& dir) {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(data_path(dir)))
        if (e.path().extension() == ".json" && e.path().filename() != "expected.json") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

inline nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    return nlohmann::json::parse(in);
}

struct CorruptOutcome {
    std::string name;
    bool applied = true;  // every deleted term was present
    std::vector<std::pair<std::string, bool>> verdicts;  // point -> nondegenerate
    std::vector<std::pair<std::string, bool>> baseline;  // same points, uncorrupted data
};

// Subtracting a term must remove exactly one monomial.
inline bool remove_term(ssw::Element& e, const std::string& term) {
    ssw::Element t = ssw::parse(term, e.table());
    ssw::Element r = e - t;
    bool ok = t.terms().size() == 1 && r.terms().size() + 1 == e.terms().size();
    e = r;
    return ok;
}

inline CorruptOutcome run_corrupt(const std::string& path) {
    using namespace ssw;
    nlohmann::json j = read_json(path);
    CorruptOutcome out;
    out.name = std::filesystem::path(path).stem().string();
    if (j.contains("instance")) {
        InstanceFile f = load_instance(data_path(j["instance"].get<std::string>()));
        BuiltInstance b = build_instance(f);
        // classical points only: off the locus both complexes are acyclic
        std::vector<std::pair<std::string, ClassicalPoint>> pts;
        for (const auto& n : j["points"]) pts.push_back({n, point_values(f.points.at(n))});
        DarbouxInstance base = b.lag ? b.lag->base : *b.base;
        for (const auto& t : j.value("omega0_delete", std::vector<std::string>{}))
            out.applied = remove_term(base.omega0, t) && out.applied;
        if (b.lag) {
            Element h0 = b.lag->h0;
            for (const auto& t : j.value("h0_delete", std::vector<std::string>{}))
                out.applied = remove_term(h0, t) && out.applied;
            LagrangianPointData d{&b.lag->base.A, &b.lag->B, &b.lag->alpha, b.lag->k, base.omega0, h0};
            for (const auto& [n, p] : pts) {
                out.verdicts.push_back({n, lagrangian_nondegenerate_at(d, p).nondegenerate});
                out.baseline.push_back({n, lagrangian_nondegenerate_at(*b.lag, p).nondegenerate});
            }
        } else {
            for (const auto& [n, p] : pts) {
                out.verdicts.push_back({n, symplectic_nondegenerate_at(base, p).nondegenerate});
                out.baseline.push_back({n, symplectic_nondegenerate_at(*b.base, p).nondegenerate});
            }
        }
        return out;
    }
    // hand-built B whose pairing counts differ from the base
    InstanceFile bf;
    bf.role = "darboux";
    bf.k = j["base"]["k"].get<int>();
    for (const auto& [d, c] : j["base"]["m"].items()) bf.m[std::stoi(d)] = c.get<int>();
    bf.Phi = j["base"]["Phi"].get<std::string>();
    bf.base_vars = j["base"]["base_vars"].get<std::vector<std::string>>();
    DarbouxInstance base = *build_instance(bf).base;
    std::vector<RingGenSpec> gens;
    for (const auto& [n, d] : j["B_generators"].items()) gens.push_back({n, d.get<int>(), false});
    TablePtr t = Table::make(gens, bf.k - 1);
    Cdga B(t, {});
    std::map<std::string, Element> images;
    for (const auto& [g, e] : j["alpha"].items()) images[g] = parse(e.get<std::string>(), t);
    Morphism alpha(base.table, t, images);
    LagrangianPointData d{&base.A, &B, &alpha, bf.k, base.omega0, parse(j["h0"].get<std::string>(), t)};
    for (const auto& [n, v] : j["points"].items()) {
        ClassicalPoint p;
        for (const auto& [g, s] : v.items()) p[g] = Scalar::from_string(s.get<std::string>());
        out.verdicts.push_back({n, lagrangian_nondegenerate_at(d, p).nondegenerate});
    }
    return out;
}

}  // namespace fixtures
