#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "surfstokes/harness.hpp"
#include "surfstokes/parallel.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Stokes and Navier-Stokes flow on closed surfaces"};
    std::string config_path;
    std::string scenario;
    std::string out_dir;
    long long seed = -1;
    app.add_option("config", config_path, "config file (key = value lines)")->required()->check(CLI::ExistingFile);
    app.add_option("--scenario", scenario, "scenario name or 'all'");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
    CLI11_PARSE(app, argc, argv);

    surfstokes::RunConfig config;
    try {
        config = surfstokes::parse_config(config_path);
        if (!scenario.empty()) {
            const auto text = "scenario = " + scenario + "\n";
            config.scenario = surfstokes::parse_config_text(text, "--scenario").scenario;
        }
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (seed >= 0) config.sim.seed = static_cast<std::uint64_t>(seed);
        surfstokes::configured_threads();
    } catch (const std::exception& e) {
        std::cerr << "surfstokes: " << e.what() << '\n';
        return 2;
    }

    bool all_passed = true;
    const auto run = [&](const std::string& name) {
        const auto report = surfstokes::run_scenario(name, config);
        std::cout << surfstokes::format_report(report) << std::flush;
        all_passed = all_passed && report.passed();
    };
    if (config.scenario == "all") {
        for (const auto& name : surfstokes::scenario_names()) run(name);
    } else {
        run(config.scenario);
    }
    std::cout << (all_passed ? "all criteria passed" : "some criteria failed") << '\n';
    return all_passed ? 0 : 1;
}
