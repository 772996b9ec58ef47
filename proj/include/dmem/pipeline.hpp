#pragma once

#include "dmem/config.hpp"
#include "dmem/dataset.hpp"
#include "dmem/eval.hpp"
#include "dmem/manifold.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dmem {

// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitInput = 2, kExitNumeric = 3, kExitConfig = 4 };

int exit_code_for(ErrorKind kind);

// Normalized patches of every labelled pixel (or synthetic sample).
struct PatchStore {
    std::uint32_t window = 1;
    std::uint32_t bands = 0;
    std::uint32_t num_classes = 0;
    std::vector<Patch> patches;
};

// "HSIP", u32 version, u32 count, u32 window, u32 bands, u32 num_classes,
// then per patch: u32 row, u32 col, u32 label, window*window*bands f32.
void save_patch_store(const PatchStore& store, const std::filesystem::path& path);
PatchStore load_patch_store(const std::filesystem::path& path);

// Row-major matrix of flattened patches.
Matrix patch_matrix(const std::vector<Patch>& patches, const std::vector<std::size_t>& rows);

struct CommandContext {
    RunConfig config;
    std::filesystem::path out_dir;
    bool force = false;
    std::ostream* log = nullptr;  // progress / report output
};

struct ClusterSummary {
    SubClassPartition partition;
    // Present when the prepared data carries ground-truth sub-clusters.
    std::vector<double> class_ari;
    double min_ari = 0.0;
    double mean_ari = 0.0;
    bool has_ground_truth = false;
};

struct EvaluationSummary {
    Metrics metrics;
    std::vector<std::size_t> indices;  // patch-store indices of test samples
    std::vector<int> labels;
    std::vector<int> predictions;
    std::optional<McNemarResult> mcnemar;
};

void cmd_prepare(const CommandContext& ctx);
ClusterSummary cmd_cluster(const CommandContext& ctx);
void cmd_train(const CommandContext& ctx);
EvaluationSummary cmd_evaluate(const CommandContext& ctx);
void cmd_map(const CommandContext& ctx);
void cmd_sweep(const CommandContext& ctx);
// Logs every training step's loss terms (step,l0,ld,ce,total,grad_norm).
void cmd_debug_loss(const CommandContext& ctx);

// Prediction file: "# index label prediction" header then one line per sample.
void save_predictions(const EvaluationSummary& eval, const std::filesystem::path& path);
EvaluationSummary load_predictions(const std::filesystem::path& path);

// Dispatches by name and maps errors to exit codes.
int run_command(const std::string& name, const CommandContext& ctx, std::ostream& err);

}  // namespace dmem
