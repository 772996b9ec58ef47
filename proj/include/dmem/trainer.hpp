#pragma once

#include "dmem/common.hpp"
#include "dmem/loss.hpp"
#include "dmem/manifold.hpp"
#include "dmem/model.hpp"
#include "dmem/rng.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dmem {

struct TrainConfig {
    double lr = 0.001;
    std::size_t iterations = 5000;
    std::size_t batch_size = 84;
    double lambda = 1e-4;  // weight of the L0 + beta * Ld block relative to cross-entropy
    LossParams loss;
    ManifoldParams manifold;
    std::uint64_t seed = 0;
    std::size_t log_every = 100;
    bool log_wall_clock = false;  // off: wall_ms is logged as 0 so logs are reproducible

    void validate() const;
};

struct TrainLogEntry {
    std::size_t iter = 0;
    double ce = 0.0;
    double l0 = 0.0;
    double ld = 0.0;
    double total = 0.0;
    double grad_norm = 0.0;
    double wall_ms = 0.0;
};

using TrainLog = std::vector<TrainLogEntry>;

// iter,ce,l0,ld,total,grad_norm,wall_ms
std::string train_log_csv(const TrainLog& log);
void save_train_log(const TrainLog& log, const std::filesystem::path& path);

// Raised when the composed loss becomes non-finite; carries a text dump of the
// offending batch.
class NumericFailure : public Error {
public:
    NumericFailure(const std::string& what, std::string dump)
        : Error(ErrorKind::Numeric, what), dump_(std::move(dump)) {}
    const std::string& batch_dump() const { return dump_; }

private:
    std::string dump_;
};

// Draws batch_size row indices without replacement (a shuffled full pass when
// batch_size == n). If batch_size > n, draws with replacement and sets
// `oversized` so the caller can warn once.
std::vector<std::size_t> sample_batch(std::size_t n, std::size_t batch_size, Rng& rng, bool& oversized);

// Training data: one row per sample with its 1-based label and sub-class tag.
struct TrainingSet {
    Matrix inputs;
    std::vector<int> labels;
    std::vector<SubclassTag> tags;

    std::size_t size() const { return inputs.rows; }
    void validate() const;
    TrainingSet subset(const std::vector<std::size_t>& rows) const;
};

struct StepResult {
    double ce = 0.0;
    LossReport dmem;  // scalars (and feature gradients) of L0 + beta*Ld
    double total = 0.0;  // ce + lambda * dmem.total
    ModelParams grads;
};

// Gradient of ce_mean + lambda * (L0 + beta * Ld) for one batch. With
// lambda == 0 the L0 + beta * Ld block is skipped entirely.
StepResult composed_step(const ModelParams& params, const TrainingSet& batch, double lambda,
                         const LossParams& loss);

struct TrainHooks {
    std::optional<std::filesystem::path> checkpoint;
    std::function<void(const std::string&)> warn;
    std::function<void(const TrainLogEntry&)> on_log;
    // Overrides log_every: log every iteration.
    bool log_all = false;
};

struct TrainResult {
    ModelParams params;
    TrainLog log;
};

TrainResult train(const TrainingSet& data, const NetworkSpec& spec, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

}  // namespace dmem
