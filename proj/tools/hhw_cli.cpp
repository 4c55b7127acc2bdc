#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hhw/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Hybrid tree/finite-difference pricer for Heston-Hull-White models"};
    app.require_subcommand(1);

    std::string config;
    std::string out_path;
    int threads = 0;
    for (const auto& [name, help] : {
             std::pair{"price", "Tree/finite-difference prices, one row per sweep point"},
             std::pair{"mc", "Hybrid Monte Carlo estimates with 95% confidence half-widths"},
             std::pair{"ratio", "Convergence ratios over successively doubled grids"},
             std::pair{"smile", "Implied volatilities across strikes"},
         }) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "Run configuration file")->required();
        sub->add_option("--out", out_path, "CSV output path (default: stdout)");
        sub->add_option("--threads", threads, "Worker threads, 0 for all cores")
            ->check(CLI::NonNegativeNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : hhw::cli::kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const hhw::cli::CommandOptions options{threads};
    if (out_path.empty()) return hhw::cli::run_command(command, config, options, std::cout, std::cerr);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "config error: cannot write '" << out_path << "'\n";
        return hhw::cli::kExitConfig;
    }
    return hhw::cli::run_command(command, config, options, out, std::cerr);
}
