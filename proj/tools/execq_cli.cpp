#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "execq/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Optimal execution quoting: closed-form quotes, simulation and "
                 "Monte Carlo verification"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string figure_id;
    execq::cli::CommonFlags flags;
    std::uint64_t seed_flag = 0;
    long paths_flag = 0;
    bool list_figures = false;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "experiment config (JSON)")
                ->required()
                ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "output directory (default: config output.dir)");
        cmd->add_option("--seed", seed_flag, "override mc.seed");
        cmd->add_option("--paths", paths_flag, "override mc.n_paths");
        cmd->add_option("--threads", flags.threads, "worker threads (default 1)");
    };

    auto* quote = app.add_subcommand("quote", "quote curves over the signal ladder");
    add_common(quote, true);
    auto* surface = app.add_subcommand("surface", "quote surface over time and inventory");
    add_common(surface, true);
    auto* verify = app.add_subcommand("verify", "closed form vs Monte Carlo verification");
    add_common(verify, true);
    auto* asym = app.add_subcommand("asymptotics", "long-horizon growth rates");
    add_common(asym, true);
    auto* repro = app.add_subcommand("reproduce", "preconfigured experiment families");
    repro->add_option("--figure", figure_id, "figure family id");
    repro->add_flag("--list", list_figures, "list known figure ids");
    add_common(repro, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? execq::cli::kExitOk : execq::cli::kExitValidation;
    }

    try {
        for (auto* cmd : {quote, surface, verify, asym}) {
            if (!cmd->parsed()) continue;
            if (cmd->count("--seed")) flags.seed = seed_flag;
            if (cmd->count("--paths")) flags.n_paths = paths_flag;
            const auto cfg = execq::ExperimentConfig::load(config_path);
            const std::filesystem::path dir = out_dir.empty() ? cfg.output_dir : out_dir;
            if (cmd == quote) return execq::cli::run_quote(cfg, dir, flags);
            if (cmd == surface) return execq::cli::run_surface(cfg, dir, flags);
            if (cmd == verify) return execq::cli::run_verify(cfg, dir, flags);
            return execq::cli::run_asymptotics(cfg, dir, flags);
        }
        if (repro->parsed()) {
            if (list_figures) {
                for (const auto& id : execq::cli::reproduce_figure_ids())
                    std::cout << id << "\n";
                return execq::cli::kExitOk;
            }
            if (figure_id.empty())
                throw execq::ConfigError("reproduce requires --figure or --list");
            const std::filesystem::path dir = out_dir.empty() ? "out" : out_dir;
            return execq::cli::run_reproduce(figure_id, dir, flags);
        }
    } catch (...) {
        return execq::cli::exit_code_for_current_exception();
    }
    return execq::cli::kExitOk;
}
