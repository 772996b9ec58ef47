#include "dmem/trainer.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace dmem {

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::string dump_batch(const TrainingSet& batch, const std::vector<std::size_t>& rows,
                       const ForwardTrace& trace, std::size_t iter) {
    std::ostringstream out;
    out << "# non-finite loss at iteration " << iter << '\n'
        << "# row label class subclass | features\n";
    for (std::size_t i = 0; i < batch.size(); ++i) {
        out << rows[i] << ' ' << batch.labels[i] << ' ' << batch.tags[i].class_id << ' '
            << batch.tags[i].subclass_id << " |";
        for (double v : trace.features().row(i)) out << ' ' << fmt(v);
        out << '\n';
    }
    return out.str();
}

}  // namespace

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw config_error("lr must be positive");
    if (iterations == 0) throw config_error("iterations must be positive");
    if (batch_size == 0) throw config_error("batch_size must be positive");
    if (!(lambda >= 0.0)) throw config_error("lambda must be non-negative");
    if (log_every == 0) throw config_error("log_every must be positive");
    loss.validate();
    manifold.validate();
}

std::string train_log_csv(const TrainLog& log) {
    std::string out = "iter,ce,l0,ld,total,grad_norm,wall_ms\n";
    for (const auto& e : log) {
        out += std::to_string(e.iter) + ',' + fmt(e.ce) + ',' + fmt(e.l0) + ',' + fmt(e.ld) + ',' +
               fmt(e.total) + ',' + fmt(e.grad_norm) + ',' + fmt(e.wall_ms) + '\n';
    }
    return out;
}

void save_train_log(const TrainLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot open for writing: " + path.string());
    out << train_log_csv(log);
}

std::vector<std::size_t> sample_batch(std::size_t n, std::size_t batch_size, Rng& rng, bool& oversized) {
    if (n == 0) throw input_error("cannot sample a batch from an empty training set");
    std::vector<std::size_t> out;
    out.reserve(batch_size);
    if (batch_size > n) {
        oversized = true;
        for (std::size_t i = 0; i < batch_size; ++i) out.push_back(rng.below(n));
        return out;
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(perm[i], perm[j]);
        out.push_back(perm[i]);
    }
    return out;
}

void TrainingSet::validate() const {
    if (inputs.rows == 0) throw input_error("training set is empty");
    if (labels.size() != inputs.rows || tags.size() != inputs.rows)
        throw input_error("training set: inputs, labels and tags differ in length");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (tags[i].class_id != labels[i])
            throw input_error("training set: partition tag disagrees with label at row " + std::to_string(i));
}

TrainingSet TrainingSet::subset(const std::vector<std::size_t>& rows) const {
    TrainingSet out;
    out.inputs = Matrix(rows.size(), inputs.cols);
    out.labels.reserve(rows.size());
    out.tags.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = inputs.row(rows[i]);
        std::copy(src.begin(), src.end(), out.inputs.row(i).begin());
        out.labels.push_back(labels[rows[i]]);
        out.tags.push_back(tags[rows[i]]);
    }
    return out;
}

StepResult composed_step(const ModelParams& params, const TrainingSet& batch, double lambda,
                         const LossParams& loss) {
    const auto trace = forward(params, batch.inputs);
    const auto ce = softmax_ce_batch(trace.logits, batch.labels);

    StepResult step;
    step.ce = ce.mean_loss;
    Matrix dfeatures(batch.size(), params.spec.feature_dim);
    if (lambda > 0.0) {
        step.dmem = loss_gradients(FeatureBatch{trace.features(), batch.tags}, loss);
        for (std::size_t i = 0; i < dfeatures.data.size(); ++i)
            dfeatures.data[i] = lambda * step.dmem.grads.data[i];
    }
    step.total = step.ce + lambda * step.dmem.total;
    step.grads = backward(params, trace, dfeatures, ce.dlogits);
    return step;
}

TrainResult train(const TrainingSet& data, const NetworkSpec& spec, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
    cfg.validate();
    data.validate();
    if (spec.input_dim != data.inputs.cols)
        throw input_error("network input_dim does not match training data dimension");

    TrainResult result;
    result.params = init_params(spec);
    Rng batch_rng(stream_seed(cfg.seed, "batching"));
    bool oversized = false, warned = false;
    const auto start = std::chrono::steady_clock::now();

    for (std::size_t iter = 1; iter <= cfg.iterations; ++iter) {
        const auto rows = sample_batch(data.size(), cfg.batch_size, batch_rng, oversized);
        if (oversized && !warned) {
            warned = true;
            if (hooks.warn)
                hooks.warn("batch_size " + std::to_string(cfg.batch_size) + " exceeds training set size " +
                           std::to_string(data.size()) + "; sampling with replacement");
        }
        const TrainingSet batch = data.subset(rows);
        auto fail = [&] {
            return NumericFailure("non-finite loss at iteration " + std::to_string(iter),
                                  dump_batch(batch, rows, forward(result.params, batch.inputs), iter));
        };
        StepResult step;
        try {
            step = composed_step(result.params, batch, cfg.lambda, cfg.loss);
        } catch (const Error& e) {
            // non-finite features are rejected inside the loss
            if (e.kind() != ErrorKind::Numeric) throw;
            throw fail();
        }

        const double grad_norm = l2_norm(step.grads);
        if (!std::isfinite(step.total) || !std::isfinite(grad_norm)) throw fail();
        sgd_step(result.params, step.grads, cfg.lr);

        if (hooks.log_all || iter == 1 || iter % cfg.log_every == 0 || iter == cfg.iterations) {
            TrainLogEntry e;
            e.iter = iter;
            e.ce = step.ce;
            e.l0 = step.dmem.l0;
            e.ld = step.dmem.ld;
            e.total = step.total;
            e.grad_norm = grad_norm;
            if (cfg.log_wall_clock)
                e.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                                .count();
            result.log.push_back(e);
            if (hooks.on_log) hooks.on_log(e);
        }
    }
    if (hooks.checkpoint) save_checkpoint(result.params, *hooks.checkpoint);
    return result;
}

}  // namespace dmem
