#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "ssw/workbench.hpp"

using namespace ssw;
using fixtures::data_path;

namespace {

struct Run {
    int code;
    std::string out;
};

Run cli(const std::string& args) {
    std::string cmd = std::string(SSW_CLI) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tmp(const std::string& name) { return std::string(SSW_TMP_DIR) + "/" + name; }

std::string code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

bool input_error(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return is_input_error(e);
    }
    return false;
}

const char* kMinimal = R"({"schema_version": "ssw-1", "role": "darboux", "k": -1, "m": {"0": 1}, "Phi": "x^2"})";

}  // namespace

TEST_CASE("instance schema") {
    auto f = parse_instance(kMinimal);
    CHECK(f.role == "darboux");
    CHECK(f.m == std::map<int, int>{{0, 1}});
    CHECK(parse_instance(dump_instance(f)).Phi == "x^2");
    CHECK(dump_instance(parse_instance(dump_instance(f))) == dump_instance(f));

    auto with = [](const std::string& extra) {
        std::string s = kMinimal;
        return s.substr(0, s.size() - 1) + ", " + extra + "}";
    };
    CHECK(code_of([&] { parse_instance("{"); }) == "JsonError");
    CHECK(code_of([&] { parse_instance("[1]"); }) == "SchemaError");
    CHECK(code_of([&] { parse_instance(with(R"("colour": 1)")); }) == "SchemaError");
    CHECK(code_of([&] { parse_instance(with(R"("n": {"0": 1})")); }) == "SchemaError");
    CHECK(code_of([&] { parse_instance(with(R"("q": ["1"])")); }) == "SchemaError");
    CHECK(code_of([&] { parse_instance(with(R"("field": "R")")); }) == "SchemaError");
    CHECK(code_of([&] { parse_instance(with(R"("points": {"a": {"x": 0}})")); }) == "SchemaError");
    CHECK(code_of([&] { parse_instance(R"({"schema_version": "ssw-0", "role": "darboux", "k": -1, "m": {"0": 1}})"); }) ==
          "SchemaError");
    CHECK(code_of([&] { parse_instance(R"({"schema_version": "ssw-1", "role": "darboux", "k": -1, "m": {"x": 1}})"); }) ==
          "SchemaError");
    CHECK(code_of([&] { parse_instance(R"({"schema_version": "ssw-1", "role": "lagrangian", "k": -1, "m": {"0": 1}})"); }) ==
          "SchemaError");
    CHECK(code_of([&] { load_instance(data_path("no/such/file.json")); }) == "IOError");

    // expressions are checked against the tables when the instance is built
    auto bad = parse_instance(with(R"("points": {"a": {"x": "1/0"}})"));
    CHECK(code_of([&] { run_verify(bad); }) == "BadPoint");
    auto unknown = parse_instance(R"({"schema_version": "ssw-1", "role": "darboux", "k": -1, "m": {"0": 1}, "Phi": "w^2"})");
    CHECK(input_error([&] { run_verify(unknown); }));
    auto wrong = parse_instance(with(R"("points": {"a": {"y": "1"}})"));
    CHECK(code_of([&] { run_verify(wrong); }) == "BadPoint");
    CHECK(code_of([&] { run_verify(parse_instance(kMinimal), {{"no_such_group"}, {}, 1}); }) == "UnknownCheck");
    VerifyOptions only;
    only.point = "nowhere";
    CHECK(code_of([&] { run_verify(parse_instance(kMinimal), only); }) == "UnknownPoint");
}

TEST_CASE("golden files verify") {
    auto files = fixtures::json_files("golden");
    CHECK(files.size() == 8);
    for (const auto& path : files) {
        InstanceFile f = load_instance(path);
        Report r = run_verify(f);
        CHECK_MESSAGE(r.passed(), path << "\n" << r.text());
        CHECK(r.exit_code() == 0);
        std::size_t nondeg = 0;
        for (const auto& c : r.checks) nondeg += c.group == "nondegenerate" && c.status == "pass";
        CHECK_MESSAGE(nondeg >= 3, path);
        for (const auto& g : check_groups(f.role)) {
            if (g == "reduced_locus" && f.k != -1) continue;
            bool seen = false;
            for (const auto& c : r.checks) seen = seen || c.group == g;
            CHECK_MESSAGE(seen, path << " " << g);
        }
        // files are stored in canonical form
        CHECK_MESSAGE(slurp(path) == nlohmann::json::parse(slurp(path)).dump(2) + "\n", path);
    }
}

TEST_CASE("crit x^3 report") {
    Report r = run_verify(load_instance(data_path("golden/crit_x3.json")));
    REQUIRE(r.find("master_equation:Phi"));
    CHECK(r.find("reduced_locus:origin")->status == "pass");
    CHECK(r.find("nondegenerate:origin")->detail.empty());
    CHECK(r.find("nondegenerate:two")->detail == "diagnostic point");
    CHECK(r.find("vdim_parity")->status == "pass");
    auto j = r.to_json();
    CHECK(j["schema_version"] == "ssw-1");
    CHECK(j["status"] == "pass");
    CHECK(j["checks"][0].contains("equation_ref"));

    VerifyOptions opt;
    opt.groups = {"nondegenerate"};
    opt.point = "one";
    Report one = run_verify(load_instance(data_path("golden/crit_x3.json")), opt);
    REQUIRE(one.checks.size() == 1);
    CHECK(one.checks[0].name == "nondegenerate:one");
}

TEST_CASE("weak golden files skip the closed-form checks") {
    Report q = run_verify(load_instance(data_path("golden/quadratic_k2.json")));
    CHECK(q.find("hamiltonian_split")->status == "skipped");
    CHECK(q.find("bracket_table")->status == "skipped");
    Report w = run_verify(load_instance(data_path("golden/weak_lagrangian_k1.json")));
    CHECK(w.find("conormal_split")->status == "skipped");
    CHECK(w.find("coisotropic:bracket:{x,ym1}")->status == "pass");
}

TEST_CASE("mutation fixtures fail with the documented check") {
    auto expected = fixtures::read_json(data_path("mutations/expected.json"));
    auto files = fixtures::json_files("mutations");
    CHECK(files.size() == 20);
    CHECK(expected.size() == 20);
    for (const auto& path : files) {
        std::string name = std::filesystem::path(path).filename().string();
        REQUIRE_MESSAGE(expected.contains(name), name);
        Report r = run_verify(load_instance(path));
        CHECK(r.exit_code() == 1);
        const CheckResult* c = r.find(expected[name]["check"].get<std::string>());
        REQUIRE_MESSAGE(c, name << "\n" << r.text());
        CHECK(c->status == "fail");
        CHECK_MESSAGE(c->residual == expected[name]["residual"].get<std::string>(), name);
        CHECK(c->detail.find(c->residual) != std::string::npos);
    }
}

TEST_CASE("hand-computed mutation residuals") {
    // weak k=-2 master equation: sum_j s_j^2 / (4 q_j)
    auto quad = [](const std::string& q1, const std::string& q2, const std::string& phi) {
        InstanceFile f = load_instance(data_path("golden/quadratic_k2.json"));
        f.q = {q1, q2};
        f.Phi = phi;
        return run_verify(f).find("master_equation:build")->residual;
    };
    CHECK(quad("1", "-1", "zm1_1*x + 2*zm1_2*x") == "-3/4*x^2");
    CHECK(quad("1", "1", "zm1_1*x + zm1_2*x") == "1/2*x^2");
    CHECK(quad("1", "-2", "zm1_1*x + zm1_2*x") == "1/8*x^2");
    CHECK(quad("1", "-1", "zm1_1*x + zm1_2*x^2") == "-1/4*x^4 + 1/4*x^2");
    // weak k=-1 Lagrangian over Phi = -x^2: -tx^2 + (dPsi/dw)^2 / (4 q)
    InstanceFile w = load_instance(data_path("golden/weak_lagrangian_k1.json"));
    w.Psi = "3*tx*wm1";
    CHECK(run_verify(w).find("superpotential_pde:build")->residual == "5/4*tx^2");
    w.Psi = "2*tx*wm1";
    w.q = {"2"};
    CHECK(run_verify(w).find("superpotential_pde:build")->residual == "-1/2*tx^2");
}

TEST_CASE("single-term sign flip of Psi") {
    InstanceFile f = load_instance(data_path("golden/twisted_conormal_k2.json"));
    CHECK(run_verify(f).passed());
    f.Psi = "tx*vm2 - txm1*um1";
    Report r = run_verify(f);
    CHECK(r.exit_code() == 1);
    REQUIRE(r.checks.size() == 1);
    CHECK(r.checks[0].name == "superpotential_pde:build");
    CHECK(r.checks[0].residual == "2*tx*txm1");
}

TEST_CASE("declared points off the classical locus fail") {
    InstanceFile f = load_instance(data_path("golden/conormal_k2.json"));
    f.Psi = "(tx^2 + u^2)*vm2";
    Report r = run_verify(f);
    CHECK(r.exit_code() == 1);
    CHECK(r.find("classical_point:origin")->status == "pass");
    CHECK(r.find("classical_point:diagonal")->status == "fail");
    CHECK(r.find("nondegenerate:diagonal") == nullptr);
    CHECK(r.find("nondegenerate:origin")->status == "pass");

    InstanceFile c = load_instance(data_path("golden/crit_x3.json"));
    c.Phi = "x^3 + 1";
    Report rc = run_verify(c);
    CHECK(rc.find("reduced_locus:origin")->status == "fail");
    CHECK(rc.find("reduced_locus:origin")->residual == "1");
}

TEST_CASE("corruption fixtures are degenerate") {
    auto files = fixtures::json_files("corrupt");
    CHECK(files.size() == 10);
    for (const auto& path : files) {
        auto o = fixtures::run_corrupt(path);
        CHECK_MESSAGE(o.applied, o.name);
        CHECK_MESSAGE(!o.verdicts.empty(), o.name);
        for (const auto& [p, ok] : o.verdicts) CHECK_MESSAGE(!ok, o.name << " at " << p);
        for (const auto& [p, ok] : o.baseline) CHECK_MESSAGE(ok, o.name << " uncorrupted at " << p);
    }
}

TEST_CASE("parallel and serial verification agree") {
    std::vector<InstanceFile> files;
    for (const auto& path : fixtures::json_files("golden")) files.push_back(load_instance(path));
    for (const auto& path : fixtures::json_files("mutations")) files.push_back(load_instance(path));
    for (const auto& f : files) {
        VerifyOptions opt;
        opt.threads = 4;
        CHECK(run_verify(f, opt).to_json() == run_verify_serial(f, opt).to_json());
    }
    VerifyOptions opt;
    opt.threads = 3;
    files.push_back(parse_instance(R"({"schema_version": "ssw-1", "role": "darboux", "k": -1, "m": {"0": 1}, "Phi": "w"})"));
    auto a = verify_batch(files, opt), b = verify_batch_serial(files, opt);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].to_json() == b[i].to_json());
    CHECK(a.back().checks.at(0).group == "input");
}

TEST_CASE("generator") {
    CHECK(dump_instance(gen_instance(-2, "conormal", 5)) == dump_instance(gen_instance(-2, "conormal", 5)));
    CHECK(dump_instance(gen_instance(-2, "conormal", 5)) != dump_instance(gen_instance(-2, "conormal", 6)));
    CHECK(dump_instance(gen_instance(-4, "obfuscated", 2)) == dump_instance(gen_instance(-4, "obfuscated", 2)));
    CHECK(code_of([] { gen_instance(-2, "critlocus", 1); }) == "UnsupportedFamily");
    CHECK(code_of([] { gen_instance(-1, "quadratic", 1); }) == "UnsupportedFamily");
    CHECK(code_of([] { gen_instance(-3, "conormal", 1); }) == "UnsupportedFamily");
    CHECK(code_of([] { gen_instance(0, "obfuscated", 1); }) == "UnsupportedFamily");
    CHECK(code_of([] { gen_instance(-2, "hyperbolic", 1); }) == "UnsupportedFamily");

    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        InstanceFile f = gen_instance(-2, "conormal", seed);
        Report r = run_verify(f);
        CHECK_MESSAGE(r.passed(), seed << "\n" << r.text());
        CHECK(!f.points.empty());
    }
    GenParams wide;
    wide.size = 2;
    for (const auto& [k, fam] : std::vector<std::pair<int, std::string>>{
             {-1, "critlocus"}, {-2, "quadratic"}, {-4, "conormal"}, {-6, "conormal"}, {-2, "obfuscated"}})
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            InstanceFile f = gen_instance(k, fam, seed, wide);
            CHECK_MESSAGE(run_verify(f).passed(), fam << " " << k << " " << seed);
            CHECK(parse_instance(dump_instance(f)).role == f.role);
        }
}

TEST_CASE("normalize") {
    auto obf = run_normalize(load_instance(data_path("golden/obfuscated_k2.json")));
    REQUIRE_MESSAGE(obf.output, obf.report.text());
    CHECK(obf.report.passed());
    CHECK(obf.output->role == "lagrangian");
    CHECK(obf.output->certificate.contains("H"));
    CHECK(obf.output->certificate.contains("hdot0"));
    CHECK(run_verify(*obf.output).passed());
    CHECK(run_verify(parse_instance(dump_instance(*obf.output))).passed());

    InstanceFile plain = load_instance(data_path("normalize/already_darboux_k2.json"));
    auto same = run_normalize(plain);
    REQUIRE(same.output);
    CHECK(same.output->Psi == plain.Psi);
    InstanceFile golden = load_instance(data_path("golden/conormal_k2.json"));
    CHECK(same.output->Psi == build_instance(golden).lag->Psi.str());

    auto bad = run_normalize(load_instance(data_path("normalize/nonunit_bmatrix.json")));
    CHECK_FALSE(bad.output);
    REQUIRE(bad.report.checks.size() == 1);
    CHECK(bad.report.checks[0].name == "normalize:BMatrixNotUnit");
    CHECK(bad.report.checks[0].detail.find("determinant tx") != std::string::npos);

    CHECK(code_of([&] { run_normalize(golden); }) == "SchemaError");
}

TEST_CASE("point check") {
    Report r = run_point_check(load_instance(data_path("golden/weak_lagrangian_k1.json")), "u_one");
    CHECK(r.passed());
    CHECK(r.find("nondegenerate:u_one")->detail.find("symmetric middle block") != std::string::npos);
    CHECK(r.find("chain_map:u_one")->status == "pass");
    CHECK(r.find("cone_vs_cohomology:u_one")->status == "pass");
    bool matrices = false;
    for (const auto& c : r.checks) matrices = matrices || c.group == "matrix";
    CHECK(matrices);
    Report raw = run_point_check(load_instance(data_path("golden/obfuscated_k4.json")), "p0");
    CHECK(raw.passed());
    CHECK(code_of([] { run_point_check(load_instance(data_path("golden/crit_x3.json")), "nope"); }) == "UnknownPoint");
}

TEST_CASE("command line") {
    std::string golden = data_path("golden/crit_x3.json");
    Run ok = cli("verify " + golden);
    CHECK(ok.code == 0);
    CHECK(ok.out.find("PASS master_equation:Phi") != std::string::npos);

    Run js = cli("verify --json " + golden);
    CHECK(js.code == 0);
    auto j = nlohmann::json::parse(js.out);
    CHECK(j["status"] == "pass");
    CHECK(cli("verify --json " + golden).out == js.out);
    CHECK(nlohmann::json::parse(cli("verify " + golden + " --pretty").out) == j);

    Run mut = cli("verify --json " + data_path("mutations/weak_lag_psi_scale.json"));
    CHECK(mut.code == 1);
    CHECK(nlohmann::json::parse(mut.out)["checks"][0]["residual"] == "5/4*tx^2");

    {
        std::ofstream(tmp("malformed.json")) << "{\"schema_version\": ";
    }
    CHECK(cli("verify " + tmp("malformed.json")).code == 2);
    CHECK(cli("verify " + data_path("golden/missing.json")).code == 2);
    CHECK(cli("verify --checks nonsense " + golden).code == 2);
    CHECK(cli("verify --point nowhere " + golden).code == 2);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("").code == 2);

    Run checks = cli("verify --json --checks master_equation,vdim_parity " + golden);
    auto cj = nlohmann::json::parse(checks.out);
    CHECK(cj["checks"].size() == 2);

    Run batch = cli("verify --json " + golden + " " + data_path("mutations/k2_units.json"));
    CHECK(batch.code == 1);
    CHECK(nlohmann::json::parse(batch.out).size() == 2);
    CHECK(cli("verify " + golden + " " + tmp("malformed.json")).code == 2);

    CHECK(cli("gen --k -2 --family conormal --seed 9 -o " + tmp("g1.json")).code == 0);
    CHECK(cli("gen --k -2 --family conormal --seed 9 -o " + tmp("g2.json")).code == 0);
    CHECK(slurp(tmp("g1.json")) == slurp(tmp("g2.json")));
    CHECK(slurp(tmp("g1.json")) == dump_instance(gen_instance(-2, "conormal", 9)));
    CHECK(cli("gen --k -2 --family critlocus --seed 9 -o " + tmp("g3.json")).code == 2);
    CHECK(cli("verify " + tmp("g1.json")).code == 0);

    CHECK(cli("normalize " + data_path("golden/obfuscated_k4.json") + " -o " + tmp("n.json")).code == 0);
    CHECK(cli("verify " + tmp("n.json")).code == 0);
    std::remove(tmp("nn.json").c_str());
    Run nonunit = cli("normalize --json " + data_path("normalize/nonunit_bmatrix.json") + " -o " + tmp("nn.json"));
    CHECK(nonunit.code == 1);
    CHECK(nonunit.out.find("determinant") != std::string::npos);
    CHECK_FALSE(std::ifstream(tmp("nn.json")).good());

    Run pc = cli("point-check " + data_path("golden/conormal_k2.json") + " --point diagonal");
    CHECK(pc.code == 0);
    CHECK(pc.out.find("PASS nondegenerate:diagonal") != std::string::npos);
    CHECK(cli("point-check " + golden).code == 2);
}
