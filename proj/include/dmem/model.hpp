#pragma once

#include "dmem/common.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dmem {

// Multilayer perceptron over flattened patches. Hidden layers use ReLU; the
// feature layer (phi) is linear and feeds a linear softmax head.
struct NetworkSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims{256, 128};
    std::size_t feature_dim = 64;
    std::size_t num_classes = 0;
    std::string activation = "relu";
    std::uint64_t init_seed = 0;

    void validate() const;
    std::string serialize() const;
    static NetworkSpec parse(const std::string& text);
    bool operator==(const NetworkSpec&) const = default;
};

struct DenseLayer {
    Matrix weight;  // out x in
    std::vector<double> bias;

    std::size_t in_dim() const { return weight.cols; }
    std::size_t out_dim() const { return weight.rows; }
    bool operator==(const DenseLayer&) const = default;
};

// Also used to hold parameter gradients (same shapes).
struct ModelParams {
    NetworkSpec spec;
    std::vector<DenseLayer> layers;  // hidden layers, then the feature layer
    DenseLayer head;                 // num_classes x feature_dim

    std::size_t parameter_count() const;
    // Views over every tensor in declaration order: layer weights and biases, then head.
    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
    bool operator==(const ModelParams&) const = default;
};

std::size_t parameter_count(const NetworkSpec& spec);

// Weights ~ U(-sqrt(6/(fan_in+fan_out)), +...), biases zero.
ModelParams init_params(const NetworkSpec& spec);
ModelParams zeros_like(const ModelParams& params);

struct ForwardTrace {
    Matrix input;
    std::vector<Matrix> pre;  // pre-activations per layer
    std::vector<Matrix> act;  // activations per layer (feature layer is linear)
    Matrix logits;

    const Matrix& features() const { return act.back(); }
};

ForwardTrace forward(const ModelParams& params, const Matrix& inputs);

struct SoftmaxResult {
    double loss = 0.0;
    std::vector<double> dlogits;  // softmax - one_hot
};

std::vector<double> softmax(std::span<const double> logits);
// label is 1-based.
SoftmaxResult softmax_ce(std::span<const double> logits, int label);

struct BatchCrossEntropy {
    double mean_loss = 0.0;
    Matrix dlogits;  // gradient of the mean loss
};
BatchCrossEntropy softmax_ce_batch(const Matrix& logits, const std::vector<int>& labels);

// Gradients of any scalar whose derivatives w.r.t. features and logits are
// given (the feature term is added to what flows back from the head).
ModelParams backward(const ModelParams& params, const ForwardTrace& trace, const Matrix& dfeatures,
                     const Matrix& dlogits);

void sgd_step(ModelParams& params, const ModelParams& grads, double lr);

double l2_norm(const ModelParams& grads);

// 1-based class predictions.
std::vector<int> predict(const ModelParams& params, const Matrix& inputs);

// "DMEMCKPT", u32 version, u32 spec-text length, spec text, f64 tensors.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace dmem
