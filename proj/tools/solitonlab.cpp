// Command-line front end: run scenarios, list and verify catalog entries.
//
// Exit codes: 0 all hard checks passed, 1 a hard check failed or a task
// errored, 2 invalid configuration or usage.

#include "solitonlab/catalog.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace solitonlab;

namespace {

constexpr int kExitConfig = 2;

std::filesystem::path output_dir(const Scenario& sc, const std::string& flag)
{
    if (const char* env = std::getenv("SOLITONLAB_OUT"); env && *env)
        return env;
    if (!flag.empty())
        return flag;
    if (!sc.output.empty())
        return sc.output;
    return std::filesystem::path("out") / sc.name;
}

int cmd_run(const std::string& path, const std::string& out_flag, bool parallel, const std::string& resolution)
{
    Scenario sc = load_scenario(path);
    apply_resolution(sc, resolution_from_string(resolution));
    const std::filesystem::path dir = output_dir(sc, out_flag);
    std::filesystem::create_directories(dir);
    std::ofstream log(dir / "run.log");
    log << "config " << path << ", resolution " << resolution << (parallel ? ", parallel" : "") << '\n';

    RunOptions opt;
    opt.parallel = parallel;
    opt.log = &log;
    const RunResult r = run_scenario(sc, opt);
    write_outputs(r, dir);
    r.write_summary(std::cout);
    std::cout << "report: " << (dir / "report.json").string() << '\n';
    return r.exit_code;
}

int cmd_list(bool exact_only, bool schouten_only, bool as_json)
{
    std::vector<SolitonInstance> entries;
    for (auto& s : catalog::builtin()) {
        if (exact_only && s.exactness != Exactness::Exact)
            continue;
        if (schouten_only && !s.is_schouten())
            continue;
        entries.push_back(std::move(s));
    }
    if (as_json) {
        std::cout << catalog_document(entries).dump(2) << '\n';
        return 0;
    }
    std::cout << std::left << std::setw(17) << "id" << std::setw(4) << "n" << std::setw(11) << "rho"
              << std::setw(9) << "lambda" << std::setw(11) << "class" << std::setw(15) << "exactness"
              << "parameters\n";
    for (const auto& s : entries)
        std::cout << std::left << std::setw(17) << s.id << std::setw(4) << s.dim() << std::setw(11)
                  << std::setprecision(6) << s.rho << std::setw(9) << s.lambda << std::setw(11)
                  << to_string(s.soliton_class()) << std::setw(15) << to_string(s.exactness)
                  << s.parameters.dump() << '\n';
    return 0;
}

int cmd_verify(const std::string& id)
{
    Scenario sc;
    sc.name = "verify-" + id;
    sc.soliton = catalog::build(id, nullptr, "/params");
    sc.tasks = {"identity-audit", "lemma21", "riccati"};
    if (sc.soliton.is_schouten())
        sc.tasks.push_back("schouten-bounds");
    sc.params.r_max = 2.0;
    sc.params.h = 1e-2;
    const RunResult r = run_scenario(sc);
    r.write_summary(std::cout);
    return r.exit_code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Audits for gradient rho-Einstein solitons"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a scenario file");
    std::string config_path, out_dir, resolution = "default";
    bool parallel = false;
    run->add_option("config", config_path, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "output directory (SOLITONLAB_OUT takes precedence)");
    run->add_flag("--parallel", parallel, "run independent tasks concurrently");
    run->add_option("--resolution", resolution, "numerical resolution")
        ->check(CLI::IsMember({"low", "default", "high"}));

    auto* cat = app.add_subcommand("catalog", "built-in soliton catalog");
    cat->require_subcommand(1);
    auto* list = cat->add_subcommand("list", "list catalog entries");
    bool exact_only = false, schouten_only = false, as_json = false;
    list->add_flag("--exact", exact_only, "only entries verified to be exact solitons");
    list->add_flag("--schouten", schouten_only, "only entries with rho = 1/(2(n-1))");
    list->add_flag("--json", as_json, "print the catalog document");

    auto* verify = app.add_subcommand("verify", "audit one catalog entry");
    std::string verify_id;
    verify->add_option("id", verify_id, "catalog id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run)
            return cmd_run(config_path, out_dir, parallel, resolution);
        if (*list)
            return cmd_list(exact_only, schouten_only, as_json);
        if (*verify)
            return cmd_verify(verify_id);
    } catch (const ConfigError& e) {
        std::cerr << "config error at \"" << e.pointer() << "\": " << e.message() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
