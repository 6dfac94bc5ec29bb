#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "runner.hpp"

namespace fs = std::filesystem;
using namespace pelllab;

namespace {

int default_threads() {
    if (const char* env = std::getenv("PELL_LAB_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
        spdlog::warn("ignoring PELL_LAB_THREADS={}", env);
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

int cmd_run(const std::string& config, const std::string& out_dir, int threads,
            std::optional<std::uint64_t> seed_override) {
    cli::Config cfg;
    try {
        cfg = cli::load_config(config);
    } catch (const cli::ConfigError& e) {
        std::cerr << "pell-lab: " << (e.file().empty() ? config : e.file());
        if (e.line() > 0) std::cerr << ":" << e.line() << ":" << e.column();
        std::cerr << ": " << e.what() << "\n";
        return 2;
    }
    spdlog::info("{} scenarios, {} threads", cfg.scenarios.size(), threads);
    cli::RunReport rep = cli::run(cfg, threads, seed_override);
    for (const auto& s : rep.scenarios) {
        spdlog::info("{} [{}]: {}", s.name, cli::to_string(s.kind), cli::to_string(s.status));
        if (!s.error.empty()) spdlog::warn("{}: {}", s.name, s.error);
    }
    if (cfg.emit_plots) cli::emit_plots_data(rep, out_dir);
    fs::create_directories(out_dir);
    const fs::path path = fs::path(out_dir) / "report.json";
    std::ofstream(path) << cli::dump_report(rep);
    std::cout << path.string() << "\n";
    for (const auto& s : rep.scenarios) std::cout << cli::to_string(s.status) << "  " << s.name << "\n";
    return rep.exit_code();
}

int cmd_regions(double p, std::optional<double> kappa, const std::string& out) {
    const auto cp = CutoffParams::make(p, kappa);
    std::ofstream os(out);
    if (!os) {
        std::cerr << "pell-lab: cannot write " << out << "\n";
        return 2;
    }
    write_region_csv(os, cp);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pell-lab: numerical checks for p-elliptic operators and the heat-flow method"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "log progress to stderr");

    auto* run = app.add_subcommand("run", "run the scenarios of a JSON config");
    std::string config, out_dir = "pell-lab-out";
    int threads = 0;
    std::optional<std::uint64_t> seed_override;
    run->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out-dir", out_dir, "output directory");
    run->add_option("--threads", threads, "worker threads (default: PELL_LAB_THREADS or all cores)");
    run->add_option("--seed-override", seed_override, "replace every scenario seed");
    run->add_flag("--verbose", verbose, "log progress to stderr");

    auto* regions = app.add_subcommand("regions", "write the region map of the cut-off as CSV");
    double p = 3.0;
    std::optional<double> kappa;
    std::string out;
    regions->add_option("--p", p, "exponent")->required();
    regions->add_option("--kappa", kappa, "region width");
    regions->add_option("--out", out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    spdlog::set_default_logger(spdlog::stderr_color_mt("pell-lab"));
    spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

    try {
        if (*run) return cmd_run(config, out_dir, threads > 0 ? threads : default_threads(), seed_override);
        return cmd_regions(p, kappa, out);
    } catch (const std::exception& e) {
        std::cerr << "pell-lab: " << e.what() << "\n";
        return 2;
    }
}
