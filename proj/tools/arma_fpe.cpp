#include "armafpe/cli/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

unsigned resolve_threads(const std::optional<unsigned>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("ARMA_FPE_THREADS")) {
        try {
            return static_cast<unsigned>(std::stoul(env));
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring malformed ARMA_FPE_THREADS='" << env << "'\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace armafpe::cli;

    CLI::App app{"Conditional least squares for ARMA models: simulation, fitting, FPE order "
                 "selection and Monte Carlo experiments"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::string data;
    std::string kind;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool timing = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed, "Override the seed in the config");
    };

    auto* simulate = app.add_subcommand("simulate", "Simulate a series and write t,y,eps CSV");
    add_common(simulate);
    simulate->add_option("--out", out, "Output CSV path")->required();

    auto* fit = app.add_subcommand("fit", "Fit an ARMA model to a t,y CSV");
    add_common(fit);
    fit->add_option("--data", data, "Input CSV with t,y columns")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", out, "Output JSON summary path")->required();

    auto* select = app.add_subcommand("select", "Choose among candidate orders by FPE");
    add_common(select);
    select->add_option("--data", data, "Input CSV with t,y columns")->required()->check(CLI::ExistingFile);
    select->add_option("--out", out, "Output JSON summary path")->required();

    auto* mc = app.add_subcommand("mc", "Run a Monte Carlo experiment");
    add_common(mc);
    mc->add_option("kind", kind, "Experiment kind")
        ->required()
        ->check(CLI::IsMember({"moments", "mspe", "eig", "select"}));
    mc->add_option("--out", out, "Output directory")->required();
    mc->add_option("--threads", threads, "Worker threads (0 = auto); results do not depend on it");
    mc->add_flag("--timing", timing, "Record wall-clock duration in the manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigParse;
    }

    RunOptions options;
    options.seed = seed;
    options.threads = resolve_threads(threads);
    options.record_timing = timing;

    if (simulate->parsed()) return cmd_simulate(config, out, options, std::cerr);
    if (fit->parsed()) return cmd_fit(config, data, out, options, std::cerr);
    if (select->parsed()) return cmd_select(config, data, out, options, std::cerr);
    return cmd_mc(config, kind, out, options, std::cerr);
}
