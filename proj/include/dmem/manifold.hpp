#pragma once

#include "dmem/common.hpp"

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace dmem {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Edge {
    std::size_t to = 0;
    double weight = 0.0;
};

// Undirected b-nearest-neighbour graph over the samples of one class.
// adjacency[i] is sorted by neighbour index.
struct ClassGraph {
    std::size_t b = 0;
    std::vector<std::vector<Edge>> adjacency;

    std::size_t size() const { return adjacency.size(); }
    std::size_t edge_count() const;
    // Weight of edge (i, j), or infinity when absent.
    double weight(std::size_t i, std::size_t j) const;
};

// Edge i-j exists when j is among the b nearest neighbours of i or vice versa
// (union symmetrization). Neighbour ties are broken by smaller index.
ClassGraph build_class_graph(const std::vector<std::vector<double>>& samples, std::size_t b);

// Dense symmetric matrix of shortest-path lengths. Disconnected pairs hold
// infinity.
struct GeodesicMatrix {
    std::size_t n = 0;
    std::vector<double> entries;

    explicit GeodesicMatrix(std::size_t size = 0) : n(size), entries(size * size, kInfinity) {}

    double& operator()(std::size_t i, std::size_t j) { return entries[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
};

GeodesicMatrix geodesic_matrix(const ClassGraph& graph);

// Connected component id per node (ids assigned in order of smallest member).
std::vector<std::size_t> connected_components(const GeodesicMatrix& s);

// Pairwise Euclidean distances between samples; used as the fallback when
// geodesics cannot join disconnected components.
GeodesicMatrix euclidean_matrix(const std::vector<std::vector<double>>& samples);

struct ClusterResult {
    // assignment[i] in 1..num_subclasses; ids ordered by smallest member index
    std::vector<int> assignment;
    int num_subclasses = 0;
    std::size_t num_components = 0;
    // set when components had to be joined through Euclidean distances
    bool component_merge_fallback = false;
    // set when fewer samples than requested sub-classes were available
    bool too_few_samples = false;
};

// Agglomerative complete-linkage clustering on geodesic distances, stopping at
// max(k, #components) clusters; if #components > k, components are then joined
// by minimum Euclidean single-link distance until k remain (requires `euclid`;
// without it clustering stops at #components). Ties go to the pair with the
// lexicographically smallest (min member index, other min member index).
ClusterResult cluster_subclasses(const GeodesicMatrix& s, std::size_t k,
                                 const GeodesicMatrix* euclid = nullptr);

// Largest within-cluster geodesic diameter (the quantity clustering minimizes).
double max_subclass_diameter(const GeodesicMatrix& s, const std::vector<int>& assignment);

struct ManifoldParams {
    std::size_t k = 5;
    std::size_t b = 5;

    void validate() const;
};

struct ClassDiagnostics {
    int class_id = 0;
    std::size_t samples = 0;
    std::size_t components = 0;
    int subclasses = 0;
    double max_diameter = 0.0;
    bool component_merge_fallback = false;
    bool too_few_samples = false;
};

// Sub-class assignment of every training sample.
struct SubClassPartition {
    std::size_t k = 0;
    std::size_t b = 0;
    std::vector<SubclassTag> tags;  // aligned with the training set
    std::vector<ClassDiagnostics> diagnostics;  // ascending class id
    std::vector<std::string> warnings;
};

// Runs graph construction, geodesics and clustering class by class.
// `geodesic_sink`, when set, receives each class's matrix.
struct ManifoldHooks {
    std::vector<GeodesicMatrix>* geodesic_sink = nullptr;
};

SubClassPartition model_manifolds(const std::vector<std::vector<double>>& samples,
                                  const std::vector<int>& labels, const ManifoldParams& params,
                                  ManifoldHooks hooks = {});

// Partition dump: "# k=<k> b=<b>" then "sample_index class_id subclass_id".
// `sample_ids` maps training positions to the indices written to the file.
void save_partition(const SubClassPartition& partition, const std::vector<std::size_t>& sample_ids,
                    const std::filesystem::path& path);

struct LoadedPartition {
    std::size_t k = 0;
    std::size_t b = 0;
    std::vector<std::size_t> sample_ids;
    std::vector<SubclassTag> tags;
};
LoadedPartition load_partition(const std::filesystem::path& path);

// "GEOD", u32 n, n*n f32 row-major.
void save_geodesic_matrix(const GeodesicMatrix& s, const std::filesystem::path& path);
GeodesicMatrix load_geodesic_matrix(const std::filesystem::path& path);

// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace dmem
