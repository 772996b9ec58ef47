#pragma once

#include "dmem/dataset.hpp"
#include "dmem/trainer.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dmem {

// Everything one pipeline run needs. Text form: one `key = value` per line,
// `#` starts a comment, unknown keys are rejected.
struct RunConfig {
    // data
    std::optional<std::filesystem::path> cube;
    bool synthetic = false;
    SyntheticSpec synth;
    std::uint32_t window = 5;
    bool normalize = true;
    SplitMode split_mode = SplitMode::CountPerClass;
    double split_amount = 200;
    std::uint64_t seed = 0;

    // manifold modelling
    bool dump_geodesics = false;

    // network
    std::vector<std::size_t> hidden_dims{256, 128};
    std::size_t feature_dim = 64;

    // training (train.manifold holds k and b; train.seed mirrors `seed`)
    TrainConfig train;

    // evaluation and maps
    std::optional<std::filesystem::path> compare_predictions;
    std::optional<std::filesystem::path> palette;

    // sweep grid; empty lists fall back to the single configured value
    std::vector<std::size_t> sweep_k;
    std::vector<std::size_t> sweep_b;
    std::vector<double> sweep_delta;
    std::vector<double> sweep_lambda;
    std::vector<std::uint64_t> sweep_seeds;

    std::optional<std::filesystem::path> out;

    void validate() const;
    // Canonical text form: every key, fixed order.
    std::string serialize() const;
    void set(const std::string& key, const std::string& value);

    SplitSpec split_spec() const;
    SyntheticSpec synthetic_spec() const;
    NetworkSpec network_spec(std::size_t input_dim, std::size_t num_classes) const;
    TrainConfig train_config() const;
};

// Relative paths inside the file resolve against the file's directory.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace dmem
