#include "dmem/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Sub-class manifold modelling and diversity-regularized embedding for hyperspectral patches"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_override;
    bool force = false;

    const char* commands[][2] = {
        {"prepare", "extract and normalize patches, split train/test"},
        {"cluster", "build per-class kNN graphs and partition into sub-classes"},
        {"train", "train the embedding network"},
        {"evaluate", "score the test split and write metrics"},
        {"map", "render classification and ground-truth maps"},
        {"sweep", "run the full pipeline over a parameter grid"},
        {"debug-loss", "log every step's loss terms"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_override, "output directory (overrides 'out' in the config)");
        sub->add_flag("--force", force, "overwrite existing outputs");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? dmem::kExitOk : dmem::kExitConfig;
    }

    dmem::CommandContext ctx;
    ctx.force = force;
    ctx.log = &std::cout;
    try {
        ctx.config = dmem::load_run_config(config_path);
    } catch (const dmem::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return dmem::exit_code_for(e.kind());
    }
    if (!out_override.empty()) ctx.out_dir = out_override;
    else if (ctx.config.out) ctx.out_dir = *ctx.config.out;
    else ctx.out_dir = "out";

    return dmem::run_command(app.get_subcommands().front()->get_name(), ctx, std::cerr);
}
