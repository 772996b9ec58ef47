#pragma once

#include "dmem/common.hpp"

#include <map>
#include <span>
#include <vector>

namespace dmem {

// Mini-batch of embeddings, one row per sample, each tagged with its
// (class, sub-class) from the offline partition.
struct FeatureBatch {
    Matrix features;  // n x p
    std::vector<SubclassTag> tags;

    std::size_t size() const { return features.rows; }
    std::size_t dim() const { return features.cols; }
    void validate() const;
};

struct LossParams {
    double delta = 1.0;   // margin
    double beta = 1e-4;   // weight of the diversity term
    bool hinge = true;    // clamp margin terms at zero

    void validate() const;
};

struct LossReport {
    double l0 = 0.0;
    double ld = 0.0;
    double total = 0.0;
    Matrix grads;     // d total / d features, n x p; empty for scalar-only calls
    Matrix l0_grads;  // d l0 / d features
    Matrix ld_grads;  // d ld / d features
};

// Batch rows grouped by tag, in ascending (class, sub-class) order; rows
// within a group keep batch order.
std::map<SubclassTag, std::vector<std::size_t>> group_by_subclass(const FeatureBatch& batch);

// Sum over all ordered pairs of squared distances within one sub-class.
double subclass_loss(const Matrix& features, std::span<const std::size_t> rows);
double subclass_loss(const Matrix& features);

double embedding_loss(const FeatureBatch& batch);

// Directed Hausdorff distance with squared point distances:
// max over a in A of min over b in B of |a - b|^2.
double hausdorff(const Matrix& features, std::span<const std::size_t> a,
                 std::span<const std::size_t> b);
double hausdorff(const Matrix& a, const Matrix& b);

struct HausdorffWitness {
    double value = 0.0;
    std::size_t outer = 0;  // row in A achieving the max
    std::size_t inner = 0;  // its nearest row in B
};
// Ties resolve to the smallest position in A, then in B.
HausdorffWitness hausdorff_witness(const Matrix& features, std::span<const std::size_t> a,
                                   std::span<const std::size_t> b);

double diversity_loss(const FeatureBatch& batch, const LossParams& params);

// Scalars only: total = l0 + beta * ld.
LossReport total_loss(const FeatureBatch& batch, const LossParams& params);

// Scalars plus the exact gradient of `total` with respect to every feature.
LossReport loss_gradients(const FeatureBatch& batch, const LossParams& params);

}  // namespace dmem
