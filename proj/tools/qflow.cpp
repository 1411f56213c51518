#include <qflow/commands.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <thread>

int main(int argc, char** argv)
{
    CLI::App app{"qflow: volume-preserving curvature flows of convex bodies"};
    app.require_subcommand(1);
    app.footer(std::string("Output root defaults to $") + qflow::kOutputRootEnv + " (else ./qflow-out).\n"
               "Exit: 0 ok, 1 audit/check failed, 2 config or input error, 3 step failure.");

    std::string run_cfg;
    auto* run = app.add_subcommand("run", "run a configured flow and audit it");
    run->add_option("config", run_cfg, "config file")->required();

    std::string suite;
    std::optional<std::uint64_t> seed;
    auto* verify = app.add_subcommand("verify", "randomized identity and inequality suites");
    verify->add_option("suite", suite, "algebra | body | static-inequalities | all")->required();
    verify->add_option("--seed", seed, "random seed (printed when drawn)");

    std::string sweep_cfg;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto* sweep = app.add_subcommand("sweep", "run the Cartesian product of list-valued config entries");
    sweep->add_option("config", sweep_cfg, "config file with [v1, v2, ...] lists")->required();
    sweep->add_option("--jobs,-j", jobs, "concurrent cells")->check(CLI::PositiveNumber);

    std::string report_dir;
    auto* report = app.add_subcommand("report", "re-audit a results directory from its series.csv");
    report->add_option("dir", report_dir, "results directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qflow::exit_config;
    }

    try {
        if (*run)
            return qflow::cmd_run(run_cfg, std::cout, std::cerr);
        if (*verify)
            return qflow::cmd_verify(suite, seed, std::cout, std::cerr);
        if (*sweep)
            return qflow::cmd_sweep(sweep_cfg, jobs, std::cout, std::cerr);
        return qflow::cmd_report(report_dir, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qflow::exit_config;
    }
}
