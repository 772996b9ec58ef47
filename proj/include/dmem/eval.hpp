#pragma once

#include "dmem/common.hpp"
#include "dmem/dataset.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dmem {

// Rows are true classes, columns predicted classes (both 1-based labels at
// index label - 1).
struct ConfusionMatrix {
    std::size_t num_classes = 0;
    std::vector<std::size_t> counts;

    explicit ConfusionMatrix(std::size_t n = 0) : num_classes(n), counts(n * n, 0) {}
    std::size_t& at(std::size_t truth, std::size_t pred) { return counts[truth * num_classes + pred]; }
    std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * num_classes + pred]; }
    std::size_t total() const;
};

struct Metrics {
    double overall_accuracy = 0.0;
    double average_accuracy = 0.0;  // mean recall over classes with support
    double kappa = 0.0;             // Cohen's kappa
    std::vector<double> per_class;  // recall; NaN for classes without support
    ConfusionMatrix confusion;
};

Metrics metrics_from_confusion(const ConfusionMatrix& cm);
// num_classes = 0 infers it from the largest label seen.
Metrics metrics(const std::vector<int>& preds, const std::vector<int>& labels, std::size_t num_classes = 0);

std::string metrics_csv(const Metrics& m, const std::vector<std::string>& class_names = {});
std::string metrics_table(const Metrics& m, const std::vector<std::string>& class_names = {});

struct McNemarResult {
    std::size_t f_ij = 0;  // right by i, wrong by j
    std::size_t f_ji = 0;
    double statistic = 0.0;
    bool significant = false;  // |statistic| > 1.96
};

McNemarResult mcnemar_from_counts(std::size_t f_ij, std::size_t f_ji);
McNemarResult mcnemar(const std::vector<int>& preds_i, const std::vector<int>& preds_j,
                      const std::vector<int>& labels);

using Rgb = std::array<std::uint8_t, 3>;

// Deterministic default colours for `n` classes.
std::vector<Rgb> default_palette(std::size_t n);
// One "R G B" triple per line.
std::vector<Rgb> load_palette(const std::filesystem::path& path);

// Binary PPM (P6). `preds` holds one class per labelled pixel in row-major
// order; unlabeled pixels are black.
std::string classification_map(const HyperCube& cube, const std::vector<int>& preds,
                               const std::vector<Rgb>& palette);
void save_classification_map(const HyperCube& cube, const std::vector<int>& preds,
                             const std::vector<Rgb>& palette, const std::filesystem::path& path);

}  // namespace dmem
