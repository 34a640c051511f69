#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qhhg/scenario.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string output_dir;
    int threads = 0;
    bool dump_matrices = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file (JSON)")
        ->required();
    cmd->add_option("--output", args.output_dir,
                    "output directory (overrides the config)");
    cmd->add_option("--threads", args.threads,
                    "worker threads for sector evolution, 0 = auto");
    cmd->add_flag("--dump-matrices", args.dump_matrices,
                  "write each sector's interaction matrix as CSV");
}

qhhg::RunOptions to_options(const CommonArgs& args) {
    qhhg::RunOptions options;
    if (!args.output_dir.empty())
        options.output_dir = args.output_dir;
    options.threads = args.threads;
    options.dump_matrices = args.dump_matrices;
    return options;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulator and analytics for quantised-field harmonic "
                 "generation"};
    app.require_subcommand(1);

    CommonArgs evolve_args, parametric_args, wigner_args, validate_args;
    CLI::App* evolve =
        app.add_subcommand("evolve", "evolve the full state and write the "
                                     "requested observable tables");
    add_common(evolve, evolve_args);
    CLI::App* parametric = app.add_subcommand(
        "parametric", "closed-form mode predictions and pulse waveforms");
    add_common(parametric, parametric_args);
    CLI::App* wigner = app.add_subcommand(
        "wigner", "phase-space grid of one mode at one time");
    add_common(wigner, wigner_args);
    CLI::App* validate = app.add_subcommand(
        "validate", "run the oracle battery against the simulator");
    add_common(validate, validate_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (evolve->parsed()) {
            const auto config = qhhg::load_config(evolve_args.config_path);
            const auto manifest =
                qhhg::run_scenario(config, to_options(evolve_args));
            std::printf("evolve: %d sectors (max dimension %d), %zu outputs\n",
                        manifest.sector_count, manifest.max_sector_dimension,
                        manifest.outputs.size());
        } else if (parametric->parsed()) {
            const auto config = qhhg::load_config(parametric_args.config_path);
            const auto manifest =
                qhhg::run_parametric(config, to_options(parametric_args));
            std::printf("parametric: %zu outputs\n", manifest.outputs.size());
        } else if (wigner->parsed()) {
            const auto config = qhhg::load_config(wigner_args.config_path);
            const auto manifest =
                qhhg::run_wigner(config, to_options(wigner_args));
            std::printf("wigner: %zu outputs\n", manifest.outputs.size());
        } else if (validate->parsed()) {
            const auto config = qhhg::load_config(validate_args.config_path);
            const auto report =
                qhhg::run_validate(config, to_options(validate_args));
            std::fputs(qhhg::validation_table(report).c_str(), stdout);
            if (!report.all_passed())
                return 3;
        }
    } catch (const qhhg::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const qhhg::SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
