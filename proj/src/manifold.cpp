#include "dmem/manifold.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

namespace dmem {

std::size_t ClassGraph::edge_count() const {
    std::size_t total = 0;
    for (const auto& adj : adjacency) total += adj.size();
    return total / 2;
}

double ClassGraph::weight(std::size_t i, std::size_t j) const {
    const auto& adj = adjacency[i];
    auto it = std::lower_bound(adj.begin(), adj.end(), j,
                               [](const Edge& e, std::size_t v) { return e.to < v; });
    return (it != adj.end() && it->to == j) ? it->weight : kInfinity;
}

GeodesicMatrix euclidean_matrix(const std::vector<std::vector<double>>& samples) {
    const std::size_t n = samples.size();
    GeodesicMatrix d(n);
    for (std::size_t i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = euclidean_distance(samples[i], samples[j]);
            d(i, j) = w;
            d(j, i) = w;
        }
    }
    return d;
}

ClassGraph build_class_graph(const std::vector<std::vector<double>>& samples, std::size_t b) {
    const std::size_t n = samples.size();
    if (n < 2) throw input_error("class graph needs at least 2 samples, got " + std::to_string(n));
    if (b < 1) throw config_error("neighbour count b must be >= 1");
    const std::size_t dim = samples.front().size();
    for (const auto& s : samples)
        if (s.size() != dim) throw input_error("class samples have inconsistent dimensions");

    const GeodesicMatrix dist = euclidean_matrix(samples);
    const std::size_t neighbours = std::min(b, n - 1);

    std::vector<std::vector<char>> linked(n, std::vector<char>(n, 0));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(neighbours),
                          order.end(), [&](std::size_t a, std::size_t c) {
                              const double da = dist(i, a), dc = dist(i, c);
                              return da < dc || (da == dc && a < c);
                          });
        for (std::size_t t = 0; t < neighbours; ++t) {
            linked[i][order[t]] = 1;
            linked[order[t]][i] = 1;
        }
    }

    ClassGraph g;
    g.b = b;
    g.adjacency.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (linked[i][j]) g.adjacency[i].push_back({j, dist(i, j)});
    return g;
}

namespace {

void dijkstra_row(const ClassGraph& g, std::size_t source, std::span<double> out) {
    std::fill(out.begin(), out.end(), kInfinity);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    out[source] = 0.0;
    heap.push({0.0, source});
    std::vector<char> done(g.size(), 0);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (done[u]) continue;
        done[u] = 1;
        for (const auto& e : g.adjacency[u]) {
            const double candidate = d + e.weight;
            if (candidate < out[e.to]) {
                out[e.to] = candidate;
                heap.push({candidate, e.to});
            }
        }
    }
}

}  // namespace

GeodesicMatrix geodesic_matrix(const ClassGraph& graph) {
    const std::size_t n = graph.size();
    GeodesicMatrix s(n);
    parallel_for(n, [&](std::size_t src) {
        dijkstra_row(graph, src, std::span<double>(s.entries.data() + src * n, n));
    });
    // Rows computed from different sources may differ in the last ulp.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = std::min(s(i, j), s(j, i));
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return s;
}

std::vector<std::size_t> connected_components(const GeodesicMatrix& s) {
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> comp(s.n, unset);
    std::size_t next = 0;
    for (std::size_t i = 0; i < s.n; ++i) {
        if (comp[i] != unset) continue;
        // geodesic matrices are transitively closed: row i is the component
        for (std::size_t j = i; j < s.n; ++j)
            if (comp[j] == unset && std::isfinite(s(i, j))) comp[j] = next;
        comp[i] = next;
        ++next;
    }
    return comp;
}

namespace {

// Clusters live in the slot of their smallest member, so slot order is the
// tie-break order.
struct Agglomeration {
    std::vector<char> active;
    std::vector<std::vector<std::size_t>> members;
    std::size_t count = 0;

    explicit Agglomeration(std::size_t n) : active(n, 1), members(n), count(n) {
        for (std::size_t i = 0; i < n; ++i) members[i] = {i};
    }

    // Smallest-distance active pair; ties keep the first (i, j) in scan order.
    bool closest_pair(const GeodesicMatrix& d, std::size_t& bi, std::size_t& bj) const {
        double best = kInfinity;
        bool found = false;
        for (std::size_t i = 0; i < active.size(); ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                if (!active[j]) continue;
                const double v = d(i, j);
                if (v < best) {
                    best = v;
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        }
        return found;
    }

    template <class Combine>
    void merge(GeodesicMatrix& d, std::size_t keep, std::size_t drop, Combine combine) {
        for (std::size_t x = 0; x < active.size(); ++x) {
            if (!active[x] || x == keep || x == drop) continue;
            const double v = combine(d(keep, x), d(drop, x));
            d(keep, x) = v;
            d(x, keep) = v;
        }
        members[keep].insert(members[keep].end(), members[drop].begin(), members[drop].end());
        members[drop].clear();
        active[drop] = 0;
        --count;
    }
};

}  // namespace

ClusterResult cluster_subclasses(const GeodesicMatrix& s, std::size_t k, const GeodesicMatrix* euclid) {
    if (k < 1) throw config_error("sub-class count k must be >= 1");
    const std::size_t n = s.n;
    ClusterResult result;
    result.assignment.assign(n, 0);
    const auto comp = connected_components(s);
    result.num_components = n == 0 ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;

    if (n <= k) {
        result.too_few_samples = n < k;
        for (std::size_t i = 0; i < n; ++i) result.assignment[i] = static_cast<int>(i + 1);
        result.num_subclasses = static_cast<int>(n);
        return result;
    }

    Agglomeration agg(n);
    GeodesicMatrix linkage = s;
    auto max_link = [](double a, double b) { return std::max(a, b); };
    std::size_t bi = 0, bj = 0;
    // Cross-component linkages are infinite, so finite merges stay inside components.
    while (agg.count > k && agg.closest_pair(linkage, bi, bj)) agg.merge(linkage, bi, bj, max_link);

    if (agg.count > k && euclid != nullptr) {
        GeodesicMatrix single(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!agg.active[i]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (!agg.active[j] || i == j) continue;
                double best = kInfinity;
                for (auto a : agg.members[i])
                    for (auto c : agg.members[j]) best = std::min(best, (*euclid)(a, c));
                single(i, j) = best;
            }
        }
        auto min_link = [](double a, double b) { return std::min(a, b); };
        while (agg.count > k && agg.closest_pair(single, bi, bj)) {
            agg.merge(single, bi, bj, min_link);
            result.component_merge_fallback = true;
        }
    }

    int next = 0;
    for (std::size_t slot = 0; slot < n; ++slot) {
        if (!agg.active[slot]) continue;
        ++next;
        for (auto m : agg.members[slot]) result.assignment[m] = next;
    }
    result.num_subclasses = next;
    return result;
}

double max_subclass_diameter(const GeodesicMatrix& s, const std::vector<int>& assignment) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.n; ++i)
        for (std::size_t j = i + 1; j < s.n; ++j)
            if (assignment[i] == assignment[j]) worst = std::max(worst, s(i, j));
    return worst;
}

void ManifoldParams::validate() const {
    if (k < 1) throw config_error("k must be >= 1");
    if (b < 1) throw config_error("b must be >= 1");
}

SubClassPartition model_manifolds(const std::vector<std::vector<double>>& samples,
                                  const std::vector<int>& labels, const ManifoldParams& params,
                                  ManifoldHooks hooks) {
    params.validate();
    if (samples.size() != labels.size())
        throw input_error("samples and labels differ in length");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    SubClassPartition partition;
    partition.k = params.k;
    partition.b = params.b;
    partition.tags.resize(samples.size());

    for (const auto& [label, members] : by_class) {
        std::vector<std::vector<double>> cls;
        cls.reserve(members.size());
        for (auto i : members) cls.push_back(samples[i]);

        ClassDiagnostics diag;
        diag.class_id = label;
        diag.samples = members.size();

        ClusterResult clusters;
        if (members.size() == 1) {
            clusters.assignment = {1};
            clusters.num_subclasses = 1;
            clusters.num_components = 1;
            clusters.too_few_samples = params.k > 1;
            if (hooks.geodesic_sink) {
                GeodesicMatrix single(1);
                single(0, 0) = 0.0;
                hooks.geodesic_sink->push_back(single);
            }
        } else {
            const auto graph = build_class_graph(cls, params.b);
            const auto geo = geodesic_matrix(graph);
            const auto comps = connected_components(geo);
            const std::size_t n_comp = *std::max_element(comps.begin(), comps.end()) + 1;
            if (n_comp > params.k) {
                const auto euclid = euclidean_matrix(cls);
                clusters = cluster_subclasses(geo, params.k, &euclid);
            } else {
                clusters = cluster_subclasses(geo, params.k);
            }
            diag.max_diameter = max_subclass_diameter(geo, clusters.assignment);
            if (hooks.geodesic_sink) hooks.geodesic_sink->push_back(geo);
        }
        diag.components = clusters.num_components;
        diag.subclasses = clusters.num_subclasses;
        diag.component_merge_fallback = clusters.component_merge_fallback;
        diag.too_few_samples = clusters.too_few_samples;

        if (clusters.too_few_samples)
            partition.warnings.push_back("class " + std::to_string(label) + " has " +
                                         std::to_string(members.size()) + " samples, fewer than k=" +
                                         std::to_string(params.k) +
                                         "; every sample is its own sub-class");
        if (clusters.component_merge_fallback)
            partition.warnings.push_back("class " + std::to_string(label) + ": " +
                                         std::to_string(clusters.num_components) +
                                         " graph components exceed k; joined by Euclidean distance");

        for (std::size_t t = 0; t < members.size(); ++t)
            partition.tags[members[t]] = {label, clusters.assignment[t]};
        partition.diagnostics.push_back(diag);
    }
    return partition;
}

void save_partition(const SubClassPartition& partition, const std::vector<std::size_t>& sample_ids,
                    const std::filesystem::path& path) {
    if (sample_ids.size() != partition.tags.size())
        throw input_error("partition and sample id list differ in length");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw input_error("cannot open for writing: " + path.string());
    out << "# k=" << partition.k << " b=" << partition.b << '\n';
    for (std::size_t i = 0; i < sample_ids.size(); ++i)
        out << sample_ids[i] << ' ' << partition.tags[i].class_id << ' '
            << partition.tags[i].subclass_id << '\n';
}

LoadedPartition load_partition(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open partition file: " + path.string());
    LoadedPartition p;
    std::string line;
    if (!std::getline(in, line) ||
        std::sscanf(line.c_str(), "# k=%zu b=%zu", &p.k, &p.b) != 2)
        throw input_error(path.string() + ": missing '# k=<k> b=<b>' header");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::size_t id;
        SubclassTag tag;
        if (!(ss >> id >> tag.class_id >> tag.subclass_id))
            throw input_error(path.string() + ":" + std::to_string(lineno) + ": malformed line");
        p.sample_ids.push_back(id);
        p.tags.push_back(tag);
    }
    return p;
}

void save_geodesic_matrix(const GeodesicMatrix& s, const std::filesystem::path& path) {
    io::Writer out;
    out.bytes("GEOD");
    out.u32(static_cast<std::uint32_t>(s.n));
    for (double v : s.entries) out.f32(static_cast<float>(v));
    out.save(path);
}

GeodesicMatrix load_geodesic_matrix(const std::filesystem::path& path) {
    const auto data = io::read_file(path);
    io::Reader in(data, "geodesic matrix " + path.string());
    if (in.bytes(4) != "GEOD") throw input_error(path.string() + ": bad magic");
    const std::size_t n = in.u32();
    if (in.remaining() != n * n * 4) throw input_error(path.string() + ": size mismatch");
    GeodesicMatrix s(n);
    for (auto& v : s.entries) v = in.f32();
    return s;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw input_error("ARI: labelings differ in length");
    const double n = static_cast<double>(a.size());
    if (a.size() < 2) return 1.0;
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    auto comb2 = [](double x) { return x * (x - 1) / 2; };
    double index = 0, sum_rows = 0, sum_cols = 0;
    for (const auto& [_, c] : table) index += comb2(c);
    for (const auto& [_, c] : rows) sum_rows += comb2(c);
    for (const auto& [_, c] : cols) sum_cols += comb2(c);
    const double expected = sum_rows * sum_cols / comb2(n);
    const double max_index = (sum_rows + sum_cols) / 2;
    if (max_index == expected) return 1.0;  // both trivial partitions
    return (index - expected) / (max_index - expected);
}

}  // namespace dmem
