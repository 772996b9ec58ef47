#pragma once

#include "dmem/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace dmem {

// Labelled H x W x C volume. Values are stored row-major in (row, col, band)
// order; label 0 marks an unlabeled pixel.
struct HyperCube {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t bands = 0;
    std::uint32_t num_classes = 0;  // Lambda as recorded in the file header
    std::vector<float> values;
    std::vector<std::uint16_t> labels;

    float value(std::uint32_t row, std::uint32_t col, std::uint32_t band) const {
        return values[(static_cast<std::size_t>(row) * width + col) * bands + band];
    }
    std::uint16_t label(std::uint32_t row, std::uint32_t col) const {
        return labels[static_cast<std::size_t>(row) * width + col];
    }

    std::size_t labelled_count() const;
    // histogram[c] = number of pixels with label c, for c in [0, num_classes]
    std::vector<std::size_t> label_histogram() const;

    // Throws Error(Input) describing the first violated invariant.
    void validate() const;
};

HyperCube load_cube(const std::filesystem::path& path);
void save_cube(const HyperCube& cube, const std::filesystem::path& path);

// `<name>.classes` sidecar: one class name per line, line i names label i.
std::vector<std::string> load_class_names(const std::filesystem::path& path);
void save_class_names(const std::vector<std::string>& names, const std::filesystem::path& path);

// Spatial-spectral neighbourhood of one labelled pixel. The tensor is
// window x window x bands in (dr, dc, band) order.
struct Patch {
    std::uint32_t center_row = 0;
    std::uint32_t center_col = 0;
    std::uint32_t window = 1;
    std::uint32_t bands = 0;
    int label = 0;
    std::vector<float> tensor;

    std::vector<double> flattened() const { return {tensor.begin(), tensor.end()}; }
    // Spectrum of the center pixel.
    std::vector<float> center_spectrum() const;
};

// Half-sample symmetric mirror of index i into [0, n): -1 -> 0, n -> n-1.
std::int64_t mirror_index(std::int64_t i, std::int64_t n);

// One patch per labelled pixel, row-major by center pixel.
std::vector<Patch> extract_patches(const HyperCube& cube, std::uint32_t window);

enum class SplitMode { CountPerClass, FractionPerClass };

struct SplitSpec {
    SplitMode mode = SplitMode::CountPerClass;
    double amount = 200;
    std::uint64_t seed = 0;
};

// Indices into the input list; both halves keep input order.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

std::size_t training_count(const SplitSpec& spec, std::size_t class_size);
SplitIndices split_indices(const std::vector<int>& labels, const SplitSpec& spec);
std::pair<std::vector<Patch>, std::vector<Patch>> split(const std::vector<Patch>& samples,
                                                        const SplitSpec& spec);

// Per-band affine normalization fitted on training pixels.
struct BandStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

// Statistics over the center spectra of the given (labelled) patches.
BandStats fit_band_stats(const std::vector<Patch>& train);
void normalize_patches(std::vector<Patch>& patches, const BandStats& stats);

enum class ManifoldShape { SwissRoll, Arc, GaussianBlob };

ManifoldShape parse_manifold_shape(const std::string& name);
std::string to_string(ManifoldShape shape);

struct SyntheticSpec {
    int num_classes = 3;
    int subclusters_per_class = 2;
    int samples_per_subcluster = 100;
    int ambient_dim = 8;
    ManifoldShape manifold = ManifoldShape::Arc;
    double noise_sigma = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticSample {
    std::vector<double> x;  // ambient_dim coordinates
    int label = 0;          // 1..num_classes
    int subcluster = 0;     // 1..subclusters_per_class, ground truth
};

// Samples are grouped by class, then sub-cluster, then draw order.
std::vector<SyntheticSample> synthesize(const SyntheticSpec& spec);

// Wraps synthetic samples as 1x1 patches (center_row = sample index).
std::vector<Patch> synthetic_patches(const std::vector<SyntheticSample>& samples);

}  // namespace dmem
