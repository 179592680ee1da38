#include "heightlab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace heightlab;
    CLI::App app{"Canonical heights and stability for sections of Wehler K3 families"};
    RunConfig cfg;
    std::string command;
    std::vector<double> radii;
    app.add_option("command", command, "command")
        ->required()
        ->check(CLI::IsMember(command_names()));
    app.add_option("--family", cfg.family_path, "family JSON file")->required();
    app.add_option("--max-n", cfg.max_n, "iterates (height bound for periodic-classes)");
    app.add_option("--max-period", cfg.max_period, "period search bound");
    app.add_option("--gap-eps", cfg.gap_eps, "height gap for the stability test");
    app.add_option("--depth", cfg.depth, "Green potential depth");
    app.add_option("--grid", cfg.grid, "points per circle");
    app.add_option("--radii", radii, "r1,r2")->delimiter(',')->expected(2);
    app.add_option("--primes", cfg.primes, "shadow primes");
    app.add_option("--seed", cfg.seed, "sampling seed");
    app.add_option("--threads", cfg.threads, "worker threads");
    app.add_flag("--strict", cfg.strict, "exit 4 on inconclusive reports");
    app.add_option("--out", cfg.output, "output path (.csv for CSV, - for stdout)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }
    cfg.command = parse_command(command);
    if (radii.size() == 2) cfg.r1 = radii[0], cfg.r2 = radii[1];

    RunResult r = run(cfg);
    if (!r.message.empty()) std::cerr << "heightlab: " << r.message << "\n";
    return r.exit_code;
}
