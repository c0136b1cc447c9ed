#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssw/darboux.hpp"
#include "ssw/error.hpp"
#include "ssw/lagrangian.hpp"
#include "ssw/pointcheck.hpp"

namespace ssw {

inline constexpr const char* kSchemaVersion = "ssw-1";

using PointValues = std::map<std::string, std::string>;

// One instance per file. Roles: darboux, weak_darboux, lagrangian,
// weak_lagrangian, lagrangian_raw. For the Lagrangian roles m, Phi and
// base_vars describe the base; invertible_vars naming base generators go to
// the base, the others to B. q belongs to the role's own weak form.
struct InstanceFile {
    std::string field = "Q";
    int k = 0;
    std::string role;
    std::vector<std::string> base_vars, invertible_vars;
    std::map<int, int> m, n;
    std::string Phi = "0", Psi = "0";
    std::map<std::string, std::string> alpha0;
    std::vector<std::string> q;
    std::map<std::string, PointValues> points;
    // evaluated without the classical-point check, for loci with few rational points
    std::map<std::string, PointValues> diagnostic_points;
    bool attest_phi_reduced_zero = false;
    // lagrangian_raw: d on B, alpha on base generators, and the primitive psi
    // (Psi carries the raw Xi)
    std::map<std::string, std::string> B_d, alpha;
    std::string psi = "0";
    nlohmann::json certificate;  // written by normalize
};

// Throws JsonError or SchemaError.
InstanceFile parse_instance(const std::string& text);
InstanceFile load_instance(const std::string& path);
nlohmann::json to_json(const InstanceFile& f);
// Sorted keys, two-space indent, trailing newline.
std::string dump_instance(const InstanceFile& f);
void save_instance(const InstanceFile& f, const std::string& path);

// base is always set; lag for the Lagrangian roles, raw for lagrangian_raw.
struct BuiltInstance {
    std::optional<DarbouxInstance> base;
    std::optional<LagrangianInstance> lag;
    std::optional<RawLagrangian> raw;
};

// Runs the builders; their rejections propagate as Error.
BuiltInstance build_instance(const InstanceFile& f);
ClassicalPoint point_values(const PointValues& v);

// Malformed input (exit code 2) as opposed to a failed verification.
bool is_input_error(const Error& e);

struct CheckResult {
    std::string name;
    std::string group;
    std::string status;  // pass, fail, skipped
    std::string residual;
    std::string point;
    std::string detail;
};

struct Report {
    std::string role;
    int k = 0;
    std::vector<CheckResult> checks;
    bool passed() const;
    int exit_code() const { return passed() ? 0 : 1; }
    std::size_t count(const std::string& status) const;
    const CheckResult* find(const std::string& name) const;
    nlohmann::json to_json() const;
    std::string text() const;
};

struct VerifyOptions {
    std::set<std::string> groups;  // empty: every group
    std::optional<std::string> point;
    int threads = 1;
};

std::vector<std::string> check_groups(const std::string& role);

// Check groups run as independent tasks; run_verify spreads them over
// opt.threads OpenMP threads, run_verify_serial is the single-threaded twin.
Report run_verify(const InstanceFile& f, const VerifyOptions& opt = {});
Report run_verify_serial(const InstanceFile& f, const VerifyOptions& opt = {});

// One report per file; input errors become a single failing "input" check.
std::vector<Report> verify_batch(const std::vector<InstanceFile>& files, const VerifyOptions& opt);
std::vector<Report> verify_batch_serial(const std::vector<InstanceFile>& files, const VerifyOptions& opt);

// Nondegeneracy at one declared point, with the pointwise matrices in detail.
Report run_point_check(const InstanceFile& f, const std::string& point);

struct GenParams {
    int size = 1;  // degree-0 base generators
};

// Families: critlocus (k = -1), quadratic (k = -2), conormal and obfuscated
// (k < 0 even). Throws UnsupportedFamily.
InstanceFile gen_instance(int k, const std::string& family, std::uint64_t seed, const GenParams& p = {});

struct NormalizeOutcome {
    Report report;
    std::optional<InstanceFile> output;  // set only when the output verifies
};

NormalizeOutcome run_normalize(const InstanceFile& f, int threads = 1);

// SSW_THREADS, falling back to the OpenMP default.
int threads_from_env();

}  // namespace ssw
