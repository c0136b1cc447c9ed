// ssw: verify, normalize and generate instance files.
//
// Exit codes: 0 all checks pass, 1 verification failure, 2 input error.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssw/workbench.hpp"

namespace {

struct Output {
    bool json = false;
    bool pretty = false;
};

void emit(const nlohmann::json& j, const std::string& text, const Output& o) {
    if (o.pretty)
        std::cout << j.dump(2) << "\n";
    else if (o.json)
        std::cout << j.dump() << "\n";
    else
        std::cout << text;
}

std::set<std::string> split_list(const std::string& s) {
    std::set<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.insert(item);
    return out;
}

int input_error(const std::string& what) {
    std::cerr << "ssw: " << what << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact verification of shifted symplectic and Lagrangian Darboux data"};
    app.require_subcommand(1);
    Output out;
    app.add_flag("--json", out.json, "print reports as JSON");
    app.add_flag("--pretty", out.pretty, "print reports as indented JSON");

    std::vector<std::string> files;
    std::string checks, point, output;
    int k = 0, size = 1;
    std::uint64_t seed = 0;
    std::string family;

    auto* verify = app.add_subcommand("verify", "run the identity suite on instance files");
    verify->add_option("file", files, "instance files")->required();
    verify->add_option("--checks", checks, "comma-separated check groups");
    verify->add_option("--point", point, "only this declared point");
    verify->add_flag("--json", out.json);
    verify->add_flag("--pretty", out.pretty);

    std::string file;
    auto* normalize = app.add_subcommand("normalize", "bring raw Lagrangian data into Darboux form");
    normalize->add_option("file", file, "lagrangian_raw instance")->required();
    normalize->add_option("-o,--output", output, "normalized instance")->required();
    normalize->add_flag("--json", out.json);
    normalize->add_flag("--pretty", out.pretty);

    auto* gen = app.add_subcommand("gen", "generate a random instance");
    gen->add_option("--k", k, "shift")->required();
    gen->add_option("--family", family, "conormal, critlocus, quadratic or obfuscated")->required();
    gen->add_option("--seed", seed, "seed")->required();
    gen->add_option("--size", size, "degree-0 base generators")->check(CLI::PositiveNumber);
    gen->add_option("-o,--output", output, "output file")->required();

    auto* pc = app.add_subcommand("point-check", "pointwise nondegeneracy at one declared point");
    pc->add_option("file", file, "instance file")->required();
    pc->add_option("--point", point, "point name")->required();
    pc->add_flag("--json", out.json);
    pc->add_flag("--pretty", out.pretty);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const int threads = ssw::threads_from_env();
    try {
        if (*verify) {
            ssw::VerifyOptions opt;
            opt.groups = split_list(checks);
            if (!point.empty()) opt.point = point;
            opt.threads = threads;
            if (files.size() == 1) {
                ssw::Report r = ssw::run_verify(ssw::load_instance(files[0]), opt);
                emit(r.to_json(), r.text(), out);
                return r.exit_code();
            }
            std::vector<ssw::InstanceFile> inst;
            for (const auto& f : files) inst.push_back(ssw::load_instance(f));
            auto reports = ssw::verify_batch(inst, opt);
            nlohmann::json all = nlohmann::json::array();
            std::string text;
            int rc = 0;
            for (std::size_t i = 0; i < reports.size(); ++i) {
                auto j = reports[i].to_json();
                j["file"] = files[i];
                all.push_back(j);
                text += "== " + files[i] + "\n" + reports[i].text();
                rc = std::max(rc, reports[i].exit_code());
                for (const auto& c : reports[i].checks)
                    if (c.group == "input") rc = 2;
            }
            emit(all, text, out);
            return rc;
        }
        if (*normalize) {
            auto res = ssw::run_normalize(ssw::load_instance(file), threads);
            if (res.output) ssw::save_instance(*res.output, output);
            emit(res.report.to_json(), res.report.text(), out);
            return res.output ? 0 : 1;
        }
        if (*gen) {
            ssw::GenParams p;
            p.size = size;
            ssw::save_instance(ssw::gen_instance(k, family, seed, p), output);
            return 0;
        }
        if (*pc) {
            ssw::Report r = ssw::run_point_check(ssw::load_instance(file), point);
            emit(r.to_json(), r.text(), out);
            return r.exit_code();
        }
    } catch (const ssw::Error& e) {
        if (ssw::is_input_error(e)) return input_error(e.what());
        std::cerr << "ssw: " << e.what() << "\n";
        if (!e.residual().empty()) std::cerr << "residual: " << e.residual() << "\n";
        return 1;
    }
    return 2;
}
