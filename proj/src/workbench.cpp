#include "ssw/workbench.hpp"

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "ssw/darboux.hpp"
#include "ssw/derham.hpp"
#include "ssw/expr.hpp"
#include "ssw/lagrangian.hpp"
#include "ssw/pointcheck.hpp"
#include "ssw/poisson.hpp"

namespace ssw {

using nlohmann::json;

namespace {

const std::set<std::string> kRoles{"darboux", "weak_darboux", "lagrangian", "weak_lagrangian", "lagrangian_raw"};

[[noreturn]] void schema(const std::string& msg) { throw Error("SchemaError", msg); }

const json& want(const json& j, const char* key, json::value_t type, const char* what) {
    if (!j.contains(key)) schema(std::string("missing key '") + key + "'");
    const json& v = j.at(key);
    if (v.type() != type && !(type == json::value_t::number_integer && v.is_number_unsigned()))
        schema(std::string("'") + key + "' must be " + what);
    return v;
}

std::vector<std::string> string_list(const json& j, const char* key) {
    std::vector<std::string> out;
    if (!j.contains(key)) return out;
    for (const auto& v : want(j, key, json::value_t::array, "a list of strings")) {
        if (!v.is_string()) schema(std::string("'") + key + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::map<std::string, std::string> string_map(const json& j, const char* key) {
    std::map<std::string, std::string> out;
    if (!j.contains(key)) return out;
    for (const auto& [name, v] : want(j, key, json::value_t::object, "an object").items()) {
        if (!v.is_string()) schema(std::string("'") + key + "." + name + "' must be a string");
        out[name] = v.get<std::string>();
    }
    return out;
}

std::map<int, int> degree_map(const json& j, const char* key) {
    std::map<int, int> out;
    if (!j.contains(key)) return out;
    for (const auto& [deg, v] : want(j, key, json::value_t::object, "an object").items()) {
        int d = 0;
        std::size_t used = 0;
        try {
            d = std::stoi(deg, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != deg.size() || deg.empty()) schema(std::string("'") + key + "' keys must be integers");
        if (!v.is_number_integer() || v.get<long>() < 0) schema(std::string("'") + key + "' values must be counts");
        out[d] = v.get<int>();
    }
    return out;
}

std::map<std::string, PointValues> point_map(const json& j, const char* key) {
    std::map<std::string, PointValues> out;
    if (!j.contains(key)) return out;
    for (const auto& [name, v] : want(j, key, json::value_t::object, "an object").items()) {
        if (!v.is_object()) schema(std::string("point '") + name + "' must be an object");
        for (const auto& [g, val] : v.items()) {
            if (!val.is_string()) schema("point '" + name + "." + g + "' must be a rational string");
            out[name][g] = val.get<std::string>();
        }
    }
    return out;
}

}  // namespace

InstanceFile parse_instance(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error("JsonError", e.what());
    }
    if (!j.is_object()) schema("instance must be a JSON object");
    static const std::set<std::string> known{
        "schema_version", "field",  "k",     "role",   "base_vars", "invertible_vars",         "m",
        "n",              "Phi",    "Psi",   "alpha0", "q",         "points",                  "diagnostic_points",
        "B_d",            "alpha",  "psi",   "certificate",        "attest_phi_reduced_zero"};
    for (const auto& [key, v] : j.items())
        if (!known.count(key)) schema("unknown key '" + key + "'");
    if (want(j, "schema_version", json::value_t::string, "a string").get<std::string>() != kSchemaVersion)
        schema(std::string("schema_version must be \"") + kSchemaVersion + "\"");
    InstanceFile f;
    f.role = want(j, "role", json::value_t::string, "a string").get<std::string>();
    if (!kRoles.count(f.role)) schema("unknown role '" + f.role + "'");
    f.k = want(j, "k", json::value_t::number_integer, "an integer").get<int>();
    if (f.k > 0) schema("k must be <= 0");
    if (j.contains("field")) f.field = want(j, "field", json::value_t::string, "a string").get<std::string>();
    if (f.field != "Q" && f.field != "Q(i)") schema("field must be \"Q\" or \"Q(i)\"");
    f.base_vars = string_list(j, "base_vars");
    f.invertible_vars = string_list(j, "invertible_vars");
    f.m = degree_map(j, "m");
    f.n = degree_map(j, "n");
    if (j.contains("Phi")) f.Phi = want(j, "Phi", json::value_t::string, "a string").get<std::string>();
    if (j.contains("Psi")) f.Psi = want(j, "Psi", json::value_t::string, "a string").get<std::string>();
    if (j.contains("psi")) f.psi = want(j, "psi", json::value_t::string, "a string").get<std::string>();
    f.alpha0 = string_map(j, "alpha0");
    f.q = string_list(j, "q");
    f.points = point_map(j, "points");
    f.diagnostic_points = point_map(j, "diagnostic_points");
    for (const auto& [name, v] : f.diagnostic_points)
        if (f.points.count(name)) schema("point '" + name + "' declared twice");
    if (j.contains("attest_phi_reduced_zero"))
        f.attest_phi_reduced_zero = want(j, "attest_phi_reduced_zero", json::value_t::boolean, "a boolean").get<bool>();
    f.B_d = string_map(j, "B_d");
    f.alpha = string_map(j, "alpha");
    if (j.contains("certificate")) f.certificate = j.at("certificate");
    if (f.m.empty()) schema("'m' is required");
    bool lag = f.role != "darboux" && f.role != "weak_darboux";
    if (lag && f.n.empty()) schema("'n' is required for role " + f.role);
    if (!lag && !f.n.empty()) schema("'n' only applies to Lagrangian roles");
    if (f.role == "lagrangian_raw" && f.alpha.empty()) schema("'alpha' is required for role lagrangian_raw");
    if (f.role != "lagrangian_raw" && (!f.B_d.empty() || !f.alpha.empty() || j.contains("psi")))
        schema("'B_d', 'alpha' and 'psi' only apply to role lagrangian_raw");
    if ((f.role == "weak_darboux" || f.role == "weak_lagrangian") && f.q.empty())
        schema("'q' is required for role " + f.role);
    if (f.role != "weak_darboux" && f.role != "weak_lagrangian" && !f.q.empty())
        schema("'q' only applies to weak roles");
    return f;
}

InstanceFile load_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IOError", "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

json to_json(const InstanceFile& f) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["role"] = f.role;
    j["k"] = f.k;
    j["field"] = f.field;
    if (!f.base_vars.empty()) j["base_vars"] = f.base_vars;
    if (!f.invertible_vars.empty()) j["invertible_vars"] = f.invertible_vars;
    auto degs = [](const std::map<int, int>& m) {
        json o = json::object();
        for (const auto& [d, c] : m) o[std::to_string(d)] = c;
        return o;
    };
    j["m"] = degs(f.m);
    if (!f.n.empty()) j["n"] = degs(f.n);
    j["Phi"] = f.Phi;
    if (f.role != "darboux" && f.role != "weak_darboux") j["Psi"] = f.Psi;
    if (!f.alpha0.empty()) j["alpha0"] = f.alpha0;
    if (!f.q.empty()) j["q"] = f.q;
    if (!f.points.empty()) j["points"] = f.points;
    if (!f.diagnostic_points.empty()) j["diagnostic_points"] = f.diagnostic_points;
    if (f.attest_phi_reduced_zero) j["attest_phi_reduced_zero"] = true;
    if (f.role == "lagrangian_raw") {
        j["B_d"] = f.B_d;
        j["alpha"] = f.alpha;
        j["psi"] = f.psi;
    }
    if (!f.certificate.is_null()) j["certificate"] = f.certificate;
    return j;
}

std::string dump_instance(const InstanceFile& f) { return to_json(f).dump(2) + "\n"; }

void save_instance(const InstanceFile& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("IOError", "cannot write " + path);
    out << dump_instance(f);
    if (!out) throw Error("IOError", "write failed for " + path);
}

bool is_input_error(const Error& e) {
    static const std::set<std::string> input{"JsonError",  "SchemaError", "IOError",    "UnknownGenerator",
                                             "BadName",    "BadField",    "BadRational", "BadPoint",
                                             "BadGenerator", "UnsupportedFamily", "UnknownCheck", "UnknownPoint",
                                             "InvalidPoint"};
    return dynamic_cast<const ParseError*>(&e) != nullptr || input.count(e.code()) > 0;
}

bool Report::passed() const { return count("fail") == 0; }

std::size_t Report::count(const std::string& status) const {
    std::size_t c = 0;
    for (const auto& r : checks) c += r.status == status;
    return c;
}

const CheckResult* Report::find(const std::string& name) const {
    for (const auto& r : checks)
        if (r.name == name) return &r;
    return nullptr;
}

json Report::to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["role"] = role;
    j["k"] = k;
    j["status"] = passed() ? "pass" : "fail";
    j["summary"] = {{"pass", count("pass")}, {"fail", count("fail")}, {"skipped", count("skipped")}};
    json cs = json::array();
    for (const auto& r : checks) {
        json c;
        c["name"] = r.name;
        c["equation_ref"] = r.group;
        c["status"] = r.status;
        if (!r.residual.empty()) c["residual"] = r.residual;
        if (!r.point.empty()) c["point"] = r.point;
        if (!r.detail.empty()) c["detail"] = r.detail;
        cs.push_back(c);
    }
    j["checks"] = cs;
    return j;
}

std::string Report::text() const {
    std::ostringstream os;
    for (const auto& r : checks) {
        os << (r.status == "pass" ? "PASS " : r.status == "fail" ? "FAIL " : "SKIP ") << r.name;
        if (!r.residual.empty()) os << "  residual: " << r.residual;
        if (!r.detail.empty()) os << "  (" << r.detail << ")";
        os << "\n";
    }
    os << role << " k=" << k << ": " << count("pass") << " passed, " << count("fail") << " failed, "
       << count("skipped") << " skipped\n";
    return os.str();
}

int threads_from_env() {
    if (const char* s = std::getenv("SSW_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(s, &end, 10);
        if (end != s && *end == '\0' && v > 0) return (int)v;
    }
    return omp_get_max_threads();
}

// ---------------------------------------------------------------------------
// building instances from files

namespace {

bool lagrangian_role(const std::string& role) { return role != "darboux" && role != "weak_darboux"; }

std::vector<std::string> base_degree_zero(const InstanceFile& f) {
    if (!f.base_vars.empty()) return f.base_vars;
    std::vector<std::string> out;
    int m0 = f.m.count(0) ? f.m.at(0) : 0;
    for (int j = 1; j <= m0; ++j) out.push_back(family_name("x", 0, j, m0));
    return out;
}

DarbouxInstance build_base(const InstanceFile& f) {
    DarbouxSpec s;
    s.k = f.k;
    s.m = f.m;
    s.base_vars = f.base_vars;
    s.field = f.field;
    s.phi = f.Phi;
    s.attest_phi_reduced_zero = f.attest_phi_reduced_zero;
    auto zero = base_degree_zero(f);
    for (const auto& v : f.invertible_vars)
        if (!lagrangian_role(f.role) || std::find(zero.begin(), zero.end(), v) != zero.end()) s.invertible.insert(v);
    if (f.role == "weak_darboux") {
        s.q = f.q;
        return build_weak_darboux(s);
    }
    return build_darboux(s);
}

LagrangianSpec lag_spec(const InstanceFile& f) {
    LagrangianSpec s;
    s.n = f.n;
    s.alpha0 = f.alpha0;
    s.psi = f.Psi;
    auto zero = base_degree_zero(f);
    for (const auto& v : f.invertible_vars)
        if (std::find(zero.begin(), zero.end(), v) == zero.end()) s.invertible.insert(v);
    if (f.role == "weak_lagrangian") s.q = f.q;
    return s;
}

RawLagrangian build_raw(const DarbouxInstance& base, const InstanceFile& f) {
    LagrangianSpec s = lag_spec(f);
    s.psi = "0";
    LagrangianShape sh = lagrangian_shape(base, s, false);
    const auto& t = sh.table;
    std::map<std::string, Element> d, a;
    for (const auto& [g, e] : f.B_d) d[g] = parse(e, t);
    for (const auto& [g, e] : f.alpha) a[g] = parse(e, t);
    for (const auto& [g, e] : d) t->index(g);
    for (const auto& [g, e] : f.alpha) base.table->index(g);
    Cdga B(t, d);
    Morphism alpha(base.table, t, a);
    return {sh, B, alpha, parse(f.Psi, t), parse(f.psi, t)};
}

std::string group_of_build_error(const std::string& code) {
    if (code == "MasterEquationViolated") return "master_equation";
    if (code == "SuperpotentialPDEViolated") return "superpotential_pde";
    if (code == "SquareZeroFailed") return "square_zero";
    if (code == "DegreeMismatch") return "degree";
    return "build";
}

void build_on(BuiltInstance& b, const InstanceFile& f) {
    if (f.role == "lagrangian") b.lag = build_lagrangian_darboux(*b.base, lag_spec(f));
    if (f.role == "weak_lagrangian") b.lag = build_weak_lagrangian_darboux(*b.base, lag_spec(f));
    if (f.role == "lagrangian_raw") b.raw = build_raw(*b.base, f);
}

// The base is built first; a failing builder is reported as a failed check.
struct BuildOutcome {
    BuiltInstance built;
    std::optional<CheckResult> failure;
};

BuildOutcome build(const InstanceFile& f) {
    BuildOutcome out;
    std::string stage = lagrangian_role(f.role) ? "base " : "";
    try {
        out.built.base = build_base(f);
        stage = "";
        build_on(out.built, f);
    } catch (const Error& e) {
        if (is_input_error(e)) throw;
        std::string g = group_of_build_error(e.code());
        out.failure = CheckResult{g + ":build", g, "fail", e.residual(), "", stage + e.what()};
    }
    return out;
}

// ---------------------------------------------------------------------------
// check tasks

struct Task {
    std::vector<std::string> groups;
    std::function<std::vector<CheckResult>()> run;
};

std::vector<CheckResult> from_residuals(const std::string& group, const ResidualList& rs,
                                        const std::string& prefix = "") {
    std::vector<CheckResult> out;
    for (const auto& r : rs) {
        std::string g = group;
        std::string name = r.label;
        auto colon = name.find(':');
        if (group.empty() && colon != std::string::npos) g = name.substr(0, colon);
        if (name.rfind(g + ":", 0) != 0) name = g + ":" + name;
        out.push_back({prefix + name, prefix + g, r.ok() ? "pass" : "fail", r.ok() ? "" : r.value.str(), "", ""});
    }
    return out;
}

CheckResult skipped(const std::string& group, const std::string& why) {
    return {group, group, "skipped", "", "", why};
}

CheckResult from_parity(const ParityVerdict& v) {
    return {"vdim_parity", "vdim_parity", v.ok ? "pass" : "fail", "", "", v.rule};
}

std::string join(const std::vector<std::string>& lines) {
    std::string s;
    for (const auto& l : lines) s += (s.empty() ? "" : "; ") + l;
    return s;
}

CheckResult from_nondegeneracy(const std::string& point, bool classical, const NondegeneracyReport& r) {
    std::vector<std::string> lines = r.lines;
    if (!classical) lines.insert(lines.begin(), "diagnostic point");
    return {"nondegenerate:" + point, "nondegenerate", r.nondegenerate ? "pass" : "fail", "", point, join(lines)};
}

struct NamedPoint {
    std::string name;
    ClassicalPoint p;
    bool classical;
};

bool same_values(const ClassicalPoint& a, const ClassicalPoint& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [g, v] : a) {
        auto it = b.find(g);
        if (it == b.end() || it->second != v) return false;
    }
    return true;
}

std::vector<NamedPoint> selected_points(const InstanceFile& f, const VerifyOptions& opt) {
    std::vector<NamedPoint> out;
    for (const auto& [name, v] : f.points)
        if (!opt.point || *opt.point == name) out.push_back({name, point_values(v), true});
    for (const auto& [name, v] : f.diagnostic_points)
        if (!opt.point || *opt.point == name) out.push_back({name, point_values(v), false});
    if (opt.point && out.empty()) throw Error("UnknownPoint", "no point named '" + *opt.point + "'");
    return out;
}

struct PointScreen {
    std::vector<NamedPoint> kept;
    std::vector<CheckResult> checks;
};

// Malformed points are input errors; declared points off the classical locus
// fail the classical_point check and are dropped from the pointwise checks.
PointScreen screen_points(const Cdga& c, const std::vector<NamedPoint>& pts) {
    PointScreen out;
    const Table& t = *c.table();
    for (const auto& np : pts) {
        for (const auto& [g, v] : np.p) {
            auto idx = t.find(g);
            if (!idx || t[*idx].kind != GenKind::Ring || t[*idx].degree != 0)
                throw Error("BadPoint", "point '" + np.name + "': '" + g + "' is not a degree-0 generator");
        }
        for (int g : t.ring_indices())
            if (t[g].degree == 0 && !np.p.count(t[g].name))
                throw Error("BadPoint", "point '" + np.name + "': no value for '" + t[g].name + "'");
        if (!np.classical) {
            out.kept.push_back(np);
            continue;
        }
        std::string name = "classical_point:" + np.name;
        try {
            check_point(c, np.p);
            out.checks.push_back({name, "classical_point", "pass", "", np.name, ""});
            out.kept.push_back(np);
        } catch (const Error& e) {
            out.checks.push_back({name, "classical_point", "fail", "", np.name, e.what()});
        }
    }
    return out;
}

std::vector<Task> darboux_tasks(const InstanceFile& f, const DarbouxInstance& inst, const std::vector<NamedPoint>& pts) {
    std::vector<Task> tasks;
    const DarbouxInstance* I = &inst;
    tasks.push_back({{"master_equation"}, [I] {
                         return from_residuals("master_equation", {{"Phi", master_residual(*I)}});
                     }});
    tasks.push_back({{"square_zero"}, [I] { return from_residuals("square_zero", I->A.check_square_zero()); }});
    tasks.push_back({{"darboux_triple"}, [I] { return from_residuals("darboux_triple", check_symplectic_triple(*I)); }});
    tasks.push_back({{"hamiltonian_split"}, [I]() -> std::vector<CheckResult> {
                         if (I->variant != Variant::Darboux)
                             return {skipped("hamiltonian_split", "needs a plain Darboux form")};
                         auto s = split_hamiltonian(*I);
                         auto a = from_residuals("hamiltonian_split", check_split(*I, s));
                         auto b = from_residuals("hamiltonian_split", check_split_triple(*I, s));
                         a.insert(a.end(), b.begin(), b.end());
                         return a;
                     }});
    if (f.k == -1) {
        std::vector<NamedPoint> cl;
        for (const auto& np : pts)
            if (np.classical) cl.push_back(np);
        tasks.push_back({{"reduced_locus"}, [I, cl]() {
                             std::vector<CheckResult> out;
                             auto at = [&](const std::string& name, const ClassicalPoint& p) {
                                 Scalar v = value_at(I->Phi, p);
                                 out.push_back({"reduced_locus:" + name, "reduced_locus", v.is_zero() ? "pass" : "fail",
                                                v.is_zero() ? "" : v.str(), name, "Phi at the point"});
                             };
                             ClassicalPoint origin;
                             const Table& t = *I->table;
                             for (int g : t.ring_indices())
                                 if (t[g].degree == 0) origin[t[g].name] = Scalar(t[g].invertible ? 1 : 0);
                             bool classical = true;
                             try {
                                 check_point(I->A, origin);
                             } catch (const Error&) {
                                 classical = false;
                             }
                             for (const auto& np : cl)
                                 if (same_values(np.p, origin)) classical = false;
                             if (classical) at("origin", origin);
                             for (const auto& np : cl) at(np.name, np.p);
                             if (out.empty()) out.push_back(skipped("reduced_locus", "no classical point to test"));
                             return out;
                         }});
    }
    tasks.push_back({{"poisson"}, [I] { return from_residuals("poisson", bivector_from_darboux(*I).checks); }});
    tasks.push_back({{"bracket_table"}, [I]() -> std::vector<CheckResult> {
                         if (I->variant != Variant::Darboux)
                             return {skipped("bracket_table", "closed form only for the plain Darboux form")};
                         return from_residuals("bracket_table", check_bracket_table(*I, bivector_from_darboux(*I).pi));
                     }});
    tasks.push_back({{"p_structure"}, [I] {
                         Element pi = bivector_from_darboux(*I).pi;
                         int k = I->k;
                         Bracket br = [pi, k](const Element& a, const Element& b) {
                             return bracket_from_bivector(pi, k, a, b);
                         };
                         return from_residuals("p_structure", check_p_structure(I->A, br, k));
                     }});
    tasks.push_back({{"vdim_parity"}, [I] {
                         return std::vector<CheckResult>{from_parity(vdim_parity_check(I->k, Role::Symplectic, I->A.vdim()))};
                     }});
    for (const auto& np : pts)
        tasks.push_back({{"nondegenerate"}, [I, np] {
                             return std::vector<CheckResult>{
                                 from_nondegeneracy(np.name, np.classical, symplectic_nondegenerate_at(*I, np.p, np.classical))};
                         }});
    return tasks;
}

const std::vector<std::string> kLagrangianGroups{"superpotential_pde", "square_zero",       "morphism",
                                                 "isotropic",          "lagrangian_triple", "consistency_chain"};

std::vector<Task> lagrangian_tasks(const LagrangianInstance& inst, const std::vector<NamedPoint>& pts) {
    std::vector<Task> tasks;
    const LagrangianInstance* I = &inst;
    tasks.push_back({{"base"}, [I] {
                         ResidualList rs{{"master_equation", master_residual(I->base)}};
                         for (auto& r : I->base.A.check_square_zero()) rs.push_back({"square_zero:" + r.label, r.value});
                         for (auto& r : check_symplectic_triple(I->base)) rs.push_back({"darboux_triple:" + r.label, r.value});
                         return from_residuals("base", rs);
                     }});
    tasks.push_back({kLagrangianGroups, [I] { return from_residuals("", check_lagrangian(*I)); }});
    tasks.push_back({{"conormal_split"}, [I]() -> std::vector<CheckResult> {
                         if (I->variant == Variant::Weak) return {skipped("conormal_split", "weak form")};
                         try {
                             auto s = split_superpotential(*I);
                             return from_residuals("conormal_split", check_superpotential_split(*I, s));
                         } catch (const Error& e) {
                             if (e.code() == "WrongVariant") return {skipped("conormal_split", e.what())};
                             throw;
                         }
                     }});
    tasks.push_back({{"coisotropic"}, [I] {
                         return from_residuals("coisotropic", check_coisotropic(*I, coisotropic_from_lagrangian(*I)));
                     }});
    tasks.push_back({{"vdim_parity"}, [I] {
                         return std::vector<CheckResult>{
                             from_parity(vdim_parity_check(I->k, Role::Lagrangian, I->base.A.vdim(), I->B.vdim()))};
                     }});
    for (const auto& np : pts)
        tasks.push_back({{"nondegenerate"}, [I, np] {
                             return std::vector<CheckResult>{
                                 from_nondegeneracy(np.name, np.classical, lagrangian_nondegenerate_at(*I, np.p, np.classical))};
                         }});
    return tasks;
}

std::vector<Task> raw_tasks(const DarbouxInstance& base, const RawLagrangian& raw, const std::vector<NamedPoint>& pts) {
    std::vector<Task> tasks;
    const DarbouxInstance* A = &base;
    const RawLagrangian* R = &raw;
    tasks.push_back({{"raw"}, [A, R] { return from_residuals("raw", check_raw(*A, *R)); }});
    for (const auto& np : pts)
        tasks.push_back({{"nondegenerate"}, [A, R, np] {
                             return std::vector<CheckResult>{from_nondegeneracy(
                                 np.name, np.classical, lagrangian_nondegenerate_at(*A, *R, np.p, np.classical))};
                         }});
    return tasks;
}

std::vector<CheckResult> guarded(const Task& t) {
    try {
        return t.run();
    } catch (const Error& e) {
        std::string g = t.groups.size() == 1 ? t.groups[0] : "identities";
        return {{g + ":error", g, "fail", e.residual(), "", e.what()}};
    }
}

std::vector<CheckResult> run_tasks(const std::vector<Task>& tasks, int threads) {
    std::vector<std::vector<CheckResult>> parts(tasks.size());
    const long n = (long)tasks.size();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long i = 0; i < n; ++i) parts[i] = guarded(tasks[i]);
    std::vector<CheckResult> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<CheckResult> run_tasks_serial(const std::vector<Task>& tasks) {
    std::vector<CheckResult> out;
    for (const auto& t : tasks) {
        auto p = guarded(t);
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

Report verify_impl(const InstanceFile& f, const VerifyOptions& opt, bool serial) {
    auto known = check_groups(f.role);
    for (const auto& g : opt.groups)
        if (std::find(known.begin(), known.end(), g) == known.end())
            throw Error("UnknownCheck", "no check group '" + g + "' for role " + f.role);
    Report rep;
    rep.role = f.role;
    rep.k = f.k;
    auto pts = selected_points(f, opt);
    BuildOutcome b = build(f);
    if (b.failure) {
        rep.checks.push_back(*b.failure);
        return rep;
    }
    const BuiltInstance& B = b.built;
    std::vector<Task> tasks;
    PointScreen ps = screen_points(B.lag ? B.lag->B : B.raw ? B.raw->B : B.base->A, pts);
    if (opt.groups.empty() || opt.groups.count("classical_point"))
        rep.checks.insert(rep.checks.end(), ps.checks.begin(), ps.checks.end());
    if (B.lag)
        tasks = lagrangian_tasks(*B.lag, ps.kept);
    else if (B.raw)
        tasks = raw_tasks(*B.base, *B.raw, ps.kept);
    else
        tasks = darboux_tasks(f, *B.base, ps.kept);
    if (!opt.groups.empty()) {
        std::vector<Task> kept;
        for (auto& t : tasks)
            for (const auto& g : t.groups)
                if (opt.groups.count(g)) {
                    kept.push_back(t);
                    break;
                }
        tasks = std::move(kept);
    }
    auto results = serial ? run_tasks_serial(tasks) : run_tasks(tasks, std::max(1, opt.threads));
    for (auto& r : results) {
        std::string top = r.group.substr(0, r.group.find(':'));
        if (opt.groups.empty() || opt.groups.count(top)) rep.checks.push_back(std::move(r));
    }
    return rep;
}

Report input_failure(const InstanceFile& f, const Error& e) {
    Report r;
    r.role = f.role;
    r.k = f.k;
    r.checks.push_back({"input:" + e.code(), "input", "fail", "", "", e.what()});
    return r;
}

}  // namespace

BuiltInstance build_instance(const InstanceFile& f) {
    BuiltInstance b;
    b.base = build_base(f);
    build_on(b, f);
    return b;
}

ClassicalPoint point_values(const PointValues& v) {
    ClassicalPoint p;
    for (const auto& [g, s] : v) {
        try {
            p[g] = Scalar::from_string(s);
        } catch (const Error& e) {
            throw Error("BadPoint", "value of '" + g + "': " + e.what());
        }
    }
    return p;
}

std::vector<std::string> check_groups(const std::string& role) {
    if (role == "darboux" || role == "weak_darboux")
        return {"master_equation", "square_zero",   "darboux_triple", "hamiltonian_split",
                "reduced_locus",   "poisson",       "bracket_table",  "p_structure",
                "vdim_parity",     "classical_point", "nondegenerate"};
    if (role == "lagrangian_raw") return {"raw", "classical_point", "nondegenerate"};
    std::vector<std::string> g{"base"};
    g.insert(g.end(), kLagrangianGroups.begin(), kLagrangianGroups.end());
    for (const char* s : {"conormal_split", "coisotropic", "vdim_parity", "classical_point", "nondegenerate"})
        g.push_back(s);
    return g;
}

Report run_verify(const InstanceFile& f, const VerifyOptions& opt) { return verify_impl(f, opt, false); }
Report run_verify_serial(const InstanceFile& f, const VerifyOptions& opt) { return verify_impl(f, opt, true); }

std::vector<Report> verify_batch(const std::vector<InstanceFile>& files, const VerifyOptions& opt) {
    std::vector<Report> out(files.size());
    const long n = (long)files.size();
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, opt.threads))
    for (long i = 0; i < n; ++i) {
        try {
            out[i] = verify_impl(files[i], opt, true);
        } catch (const Error& e) {
            out[i] = input_failure(files[i], e);
        }
    }
    return out;
}

std::vector<Report> verify_batch_serial(const std::vector<InstanceFile>& files, const VerifyOptions& opt) {
    std::vector<Report> out;
    for (const auto& f : files) {
        try {
            out.push_back(verify_impl(f, opt, true));
        } catch (const Error& e) {
            out.push_back(input_failure(f, e));
        }
    }
    return out;
}

Report run_point_check(const InstanceFile& f, const std::string& point) {
    VerifyOptions opt;
    opt.point = point;
    auto pts = selected_points(f, opt);
    const NamedPoint& np = pts.front();
    Report rep;
    rep.role = f.role;
    rep.k = f.k;
    BuildOutcome b = build(f);
    if (b.failure) {
        rep.checks.push_back(*b.failure);
        return rep;
    }
    const BuiltInstance& B = b.built;
    PointScreen ps = screen_points(B.lag ? B.lag->B : B.raw ? B.raw->B : B.base->A, pts);
    rep.checks = ps.checks;
    if (ps.kept.empty()) return rep;
    PointwiseMap m;
    NondegeneracyReport r;
    if (B.lag) {
        m = lagrangian_map_at({&B.lag->base.A, &B.lag->B, &B.lag->alpha, B.lag->k, B.lag->base.omega0, B.lag->h0},
                              np.p, np.classical);
        r = lagrangian_nondegenerate_at(*B.lag, np.p, np.classical);
    } else if (B.raw) {
        r = lagrangian_nondegenerate_at(*B.base, *B.raw, np.p, np.classical);
        Element h0 = de_rham(B.raw->psi) * Scalar(f.k - 1).inverse();
        m = lagrangian_map_at({&B.base->A, &B.raw->B, &B.raw->alpha, f.k, B.base->omega0, h0}, np.p, np.classical);
    } else {
        m = symplectic_map_at(*B.base, np.p, np.classical);
        r = symplectic_nondegenerate_at(*B.base, np.p, np.classical);
    }
    rep.checks.push_back(from_nondegeneracy(np.name, np.classical, r));
    auto add = [&](const std::string& name, bool ok, const std::string& detail) {
        rep.checks.push_back({name + ":" + np.name, name, ok ? "pass" : "fail", "", np.name, detail});
    };
    add("chain_map", r.chain_map, "");
    add("squares_to_zero", r.complexes, "");
    add("cone_vs_cohomology", quasi_iso_by_cone(m) == quasi_iso_by_cohomology(m), "");
    for (const auto& [n, mat] : m.f)
        rep.checks.push_back({"matrix:" + std::to_string(n), "matrix", "pass", "", np.name, matrix_str(mat)});
    return rep;
}

// ---------------------------------------------------------------------------
// generators

namespace {

using Rng = std::mt19937_64;

int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

int nonzero(Rng& rng, int r) {
    int c = pick(rng, -r, r - 1);
    return c >= 0 ? c + 1 : c;
}

// Random homogeneous polynomial of degree d in vars, never zero.
std::string homogeneous(Rng& rng, const std::vector<std::string>& vars, int d, int terms) {
    std::map<std::vector<int>, int> coeff;
    for (int t = 0; t < terms; ++t) {
        std::vector<int> e(vars.size(), 0);
        for (int s = 0; s < d; ++s) e[pick(rng, 0, (int)vars.size() - 1)]++;
        coeff[e] += nonzero(rng, 3);
    }
    std::string out;
    for (const auto& [e, c] : coeff) {
        if (c == 0) continue;
        std::string mono = std::to_string(c);
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (e[i]) mono += "*" + vars[i] + (e[i] > 1 ? "^" + std::to_string(e[i]) : "");
        out += (out.empty() ? "" : " + ") + mono;
    }
    if (out.empty()) out = vars[0] + (d > 1 ? "^" + std::to_string(d) : "");
    return out;
}

std::vector<std::string> names_x(int m) {
    std::vector<std::string> v;
    for (int j = 1; j <= m; ++j) v.push_back(family_name("x", 0, j, m));
    return v;
}

// Up to three classical points from a small grid, then diagnostic points to
// reach three in total.
// Up to three classical points from a small grid, then diagnostic points to
// reach three in total. A diagnostic point is kept only where the pointwise
// complexes square to zero and the map between them is a chain map.
void fill_points(InstanceFile& f) {
    BuiltInstance b = build_instance(f);
    const Cdga& c = b.lag ? b.lag->B : b.raw ? b.raw->B : b.base->A;
    auto map_at = [&](const ClassicalPoint& p) {
        if (b.lag)
            return lagrangian_map_at({&b.lag->base.A, &b.lag->B, &b.lag->alpha, b.lag->k, b.lag->base.omega0, b.lag->h0},
                                     p, false);
        if (b.raw)
            return lagrangian_map_at({&b.base->A, &b.raw->B, &b.raw->alpha, f.k, b.base->omega0,
                                      de_rham(b.raw->psi) * Scalar(f.k - 1).inverse()},
                                     p, false);
        return symplectic_map_at(*b.base, p, false);
    };
    auto well_posed = [&](const ClassicalPoint& p) {
        PointwiseMap m = map_at(p);
        return m.src.squares_to_zero() && m.tgt.squares_to_zero() && m.is_chain_map();
    };
    const Table& t = *c.table();
    std::vector<int> zero;
    for (int g : t.ring_indices())
        if (t[g].degree == 0) zero.push_back(g);
    const std::vector<long> grid{0, 1, -1, 2, -2, 3};
    std::vector<ClassicalPoint> good, other;
    std::vector<std::size_t> idx(zero.size(), 0);
    while (true) {
        ClassicalPoint p;
        for (std::size_t i = 0; i < zero.size(); ++i) p[t[zero[i]].name] = Scalar(grid[idx[i]]);
        bool ok = true;
        try {
            check_point(c, p);
        } catch (const Error&) {
            ok = false;
        }
        bool unit_zero = false;
        for (int g : zero)
            if (t[g].invertible && p[t[g].name].is_zero()) unit_zero = true;
        if (ok && good.size() < 3) good.push_back(p);
        if (!ok && !unit_zero && good.size() + other.size() < 3 && well_posed(p)) other.push_back(p);
        std::size_t i = 0;
        while (i < idx.size() && ++idx[i] == grid.size()) idx[i++] = 0;
        if (i == idx.size() || good.size() >= 3) break;
    }
    auto values = [](const ClassicalPoint& p) {
        PointValues v;
        for (const auto& [g, s] : p) v[g] = s.str();
        return v;
    };
    f.points.clear();
    f.diagnostic_points.clear();
    for (std::size_t i = 0; i < good.size(); ++i) f.points["p" + std::to_string(i)] = values(good[i]);
    for (std::size_t i = 0; good.size() + i < 3 && i < other.size(); ++i)
        f.diagnostic_points["q" + std::to_string(i)] = values(other[i]);
}

InstanceFile gen_critlocus(std::uint64_t seed, const GenParams& p) {
    Rng rng(seed);
    int m = std::max(1, p.size);
    auto vars = names_x(m);
    InstanceFile f;
    f.role = "darboux";
    f.k = -1;
    f.m = {{0, m}};
    // homogeneous, so Phi vanishes on its critical locus
    f.Phi = homogeneous(rng, vars, pick(rng, 2, 3), pick(rng, 1, 3));
    f.attest_phi_reduced_zero = true;
    fill_points(f);
    return f;
}

InstanceFile gen_quadratic(std::uint64_t seed, const GenParams& p) {
    Rng rng(seed);
    int m = std::max(1, p.size);
    auto vars = names_x(m);
    int pairs = pick(rng, 1, 2);
    InstanceFile f;
    f.role = "weak_darboux";
    f.k = -2;
    f.m = {{0, m}, {-1, 2 * pairs}};
    std::string phi;
    for (int j = 0; j < pairs; ++j) {
        int r = nonzero(rng, 3);
        f.q.push_back(std::to_string(r));
        f.q.push_back(std::to_string(-r));
        // s_j equal within a pair so that sum s^2/q cancels
        std::string s = "(" + homogeneous(rng, vars, pick(rng, 1, 2), pick(rng, 1, 2)) + ")";
        for (int h = 0; h < 2; ++h)
            phi += (phi.empty() ? "" : " + ") + family_name("z", -1, 2 * j + h + 1, 2 * pairs) + "*" + s;
    }
    f.Phi = phi;
    fill_points(f);
    return f;
}

std::map<int, int> even_levels(int k, int size) {
    std::map<int, int> m;
    for (int i = 0; i >= k / 2; --i) m[i] = i == 0 ? size : 1;
    return m;
}

InstanceFile gen_conormal(int k, std::uint64_t seed, const GenParams& p) {
    Rng rng(seed);
    InstanceFile f;
    f.role = "lagrangian";
    f.k = k;
    f.m = even_levels(k, 1);
    f.n = even_levels(k, std::max(1, p.size));
    f.Phi = "0";
    DarbouxInstance base = build_base(f);
    LagrangianShape sh = lagrangian_shape(base, lag_spec(f), false);
    std::vector<std::string> zero;  // x~ and u in degree 0
    for (int g : sh.table->ring_indices())
        if ((*sh.table)[g].degree == 0) zero.push_back((*sh.table)[g].name);
    std::vector<std::string> vk, vk1, txm1;  // v of degree k and k + 1, x~ of degree -1
    for (const auto& L : sh.levels) {
        if (L.i == -1) vk = L.v;
        if (L.i == -2) vk1 = L.v;
    }
    for (const auto& [x, xt] : sh.xt)
        if ((*sh.table)[sh.table->index(xt)].degree == -1) txm1.push_back(xt);
    for (int attempt = 0; attempt < 200; ++attempt) {
        // psi linear in v with coefficients pure in the degree-0 coordinates
        std::string psi;
        for (const auto& v : vk)
            if (pick(rng, 0, 3))
                psi += (psi.empty() ? "" : " + ") + std::string("(") +
                       homogeneous(rng, zero, pick(rng, 1, 2), pick(rng, 1, 3)) + ")*" + v;
        for (const auto& v : vk1)
            for (const auto& x : txm1)
                if (pick(rng, 0, 1))
                    psi += (psi.empty() ? "" : " + ") + std::string("(") +
                           homogeneous(rng, zero, pick(rng, 1, 2), 1) + ")*" + x + "*" + v;
        if (psi.empty()) continue;
        f.Psi = psi;
        try {
            LagrangianInstance inst = build_lagrangian_darboux(base, lag_spec(f));
            f.Psi = inst.Psi.str();
            fill_points(f);
            return f;
        } catch (const Error& e) {
            if (is_input_error(e)) throw;
        }
    }
    throw Error("GenerationFailed", "no conormal superpotential accepted for seed " + std::to_string(seed));
}

InstanceFile raw_file(const InstanceFile& src, const RawLagrangian& raw) {
    InstanceFile f = src;
    f.role = "lagrangian_raw";
    f.Psi = raw.Xi.str();
    f.psi = raw.psi.str();
    f.B_d.clear();
    f.alpha.clear();
    const Table& t = *raw.B.table();
    for (int g : t.ring_indices())
        if (const Element* d = raw.B.d_gen(g))
            if (!d->is_zero()) f.B_d[t[g].name] = d->str();
    const Table& a = *raw.alpha.source();
    for (int g : a.ring_indices()) f.alpha[a[g].name] = raw.alpha.image(a[g].name).str();
    fill_points(f);
    return f;
}

}  // namespace

InstanceFile gen_instance(int k, const std::string& family, std::uint64_t seed, const GenParams& p) {
    if (family == "critlocus") {
        if (k != -1) throw Error("UnsupportedFamily", "critlocus needs k = -1");
        return gen_critlocus(seed, p);
    }
    if (family == "quadratic") {
        if (k != -2) throw Error("UnsupportedFamily", "quadratic needs k = -2");
        return gen_quadratic(seed, p);
    }
    if (family == "conormal" || family == "obfuscated") {
        if (k >= 0 || k % 2 != 0) throw Error("UnsupportedFamily", family + " needs k < 0 even");
        InstanceFile f = gen_conormal(k, seed, p);
        if (family == "conormal") return f;
        DarbouxInstance base = build_base(f);
        LagrangianInstance inst = build_lagrangian_darboux(base, lag_spec(f));
        return raw_file(f, gauge_obfuscate(inst, seed));
    }
    throw Error("UnsupportedFamily", "unknown family '" + family + "'");
}

NormalizeOutcome run_normalize(const InstanceFile& f, int threads) {
    NormalizeOutcome out;
    out.report.role = f.role;
    out.report.k = f.k;
    if (f.role != "lagrangian_raw") throw Error("SchemaError", "normalize needs role lagrangian_raw");
    BuildOutcome b = build(f);
    if (b.failure) {
        out.report.checks.push_back(*b.failure);
        return out;
    }
    Normalized nz;
    try {
        nz = normalize(*b.built.base, *b.built.raw);
    } catch (const Error& e) {
        out.report.checks.push_back({"normalize:" + e.code(), "normalize", "fail", e.residual(), "", e.what()});
        return out;
    }
    for (auto& r : from_residuals("normalize", nz.steps)) out.report.checks.push_back(r);
    for (auto& r : from_residuals("certificate", nz.cert.checks)) out.report.checks.push_back(r);
    if (!out.report.passed()) return out;

    InstanceFile o = f;
    o.role = "lagrangian";
    o.Psi = nz.inst.Psi.str();
    o.psi = "0";
    o.B_d.clear();
    o.alpha.clear();
    fill_points(o);
    json cert;
    cert["hdot0"] = nz.cert.hdot0.str();
    json H = json::object();
    const Table& a = *nz.cert.H.source();
    for (int g : a.ring_indices()) H[a[g].name] = nz.cert.H.image(a[g].name).str();
    cert["H"] = H;
    json checks = json::array();
    for (const auto& r : nz.cert.checks) checks.push_back(r.label);
    cert["checks"] = checks;
    o.certificate = cert;

    VerifyOptions opt;
    opt.threads = threads;
    Report again = run_verify(o, opt);
    for (auto& r : again.checks) {
        r.name = "output/" + r.name;
        out.report.checks.push_back(r);
    }
    if (out.report.passed()) out.output = o;
    return out;
}

}  // namespace ssw
