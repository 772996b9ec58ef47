// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any gating
// criterion fails. Every tolerance and limit is pinned here.

#include "dmem/config.hpp"
#include "dmem/eval.hpp"
#include "dmem/loss.hpp"
#include "dmem/manifold.hpp"
#include "dmem/model.hpp"
#include "dmem/pipeline.hpp"
#include "dmem/trainer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

using namespace dmem;
namespace fs = std::filesystem;

namespace {

constexpr double kGeodesicRelTol = 1e-12;
constexpr double kGreedyRatioLimit = 2.0;
constexpr double kGradientRelTol = 1e-4;
constexpr double kFiniteDifferenceStep = 1e-5;
constexpr double kInvariantTol = 1e-12;
constexpr double kAriThreshold = 0.95;
constexpr int kAriSeedsRequired = 4;
constexpr double kMcNemarReference = 2.3094;
constexpr double kMcNemarTol = 1e-4;
constexpr double kEvalTol = 1e-12;

const std::vector<std::uint64_t> kBenchmarkSeeds{1, 2, 3, 4, 5};

// Synthetic benchmark shared by criteria 5, 6 and 8. Fixed before any run.
const std::string kBenchmark = R"(synthetic = true
synthetic.num_classes = 3
synthetic.subclusters = 2
synthetic.samples_per_subcluster = 100
synthetic.manifold = arc
split.mode = fraction
split.amount = 0.5
k = 2
b = 5
hidden_dims = 64, 32
feature_dim = 16
lr = 0.01
iterations = 2000
batch_size = 84
beta = 0.0001
delta = 1
hinge = true
)";

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;  // 0 = none
    bool gating;
    std::function<Outcome()> run;
};

RunConfig benchmark_config(std::uint64_t seed, double lambda, std::size_t iterations = 2000) {
    auto cfg = parse_run_config(kBenchmark);
    cfg.seed = seed;
    cfg.train.lambda = lambda;
    cfg.train.iterations = iterations;
    cfg.validate();
    return cfg;
}

CommandContext context(const RunConfig& cfg, const fs::path& dir) {
    CommandContext ctx;
    ctx.config = cfg;
    ctx.out_dir = dir;
    return ctx;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// 1. Geodesics against Floyd-Warshall.
Outcome geodesic_equivalence() {
    std::mt19937_64 gen(1001);
    std::size_t mismatches = 0, entries = 0;
    double worst = 0.0;
    for (int g = 0; g < 200; ++g) {
        const std::size_t n = 1 + gen() % 50;
        const double density = std::uniform_real_distribution<double>(0.02, 0.6)(gen);
        const auto graph = oracle::random_graph(n, density, gen);
        const auto s = geodesic_matrix(graph);
        const auto fw = oracle::floyd_warshall(graph);
        for (std::size_t i = 0; i < n * n; ++i) {
            ++entries;
            const double a = s.entries[i], b = fw[i];
            if (std::isinf(b) || std::isinf(a)) {
                mismatches += a != b;
                continue;
            }
            const double rel = std::abs(a - b) / std::max(std::abs(b), 1e-300);
            worst = std::max(worst, b == 0.0 ? std::abs(a) : rel);
            mismatches += b == 0.0 ? a != 0.0 : rel > kGeodesicRelTol;
        }
    }
    return {mismatches == 0, std::to_string(entries) + " entries, " + std::to_string(mismatches) +
                                 " mismatches, worst rel err " + fmt(worst)};
}

// 2. Clustering against the naive reference, plus the greedy/optimum ratio.
Outcome clustering_equivalence() {
    std::mt19937_64 gen(1002);
    int mismatches = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + gen() % 30;
        const std::size_t k = 1 + gen() % 5;
        // alternate dense metrics with kNN-like sparse graphs that may split into components
        const auto s = t % 2 == 0 ? oracle::random_metric(n, gen)
                                  : geodesic_matrix(oracle::random_graph(n, 0.15, gen));
        mismatches += cluster_subclasses(s, k).assignment != oracle::naive_agglomerative(s, k);
    }
    double worst = 1.0;
    int exhaustive = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + gen() % 7;
        const std::size_t k = 1 + gen() % std::min<std::size_t>(3, n);
        const auto s = oracle::random_metric(n, gen);
        const double greedy = max_subclass_diameter(s, cluster_subclasses(s, k).assignment);
        const double best = oracle::brute_force_min_diameter(s, k);
        worst = std::max(worst, best > 0 ? greedy / best : (greedy > 0 ? oracle::kInf : 1.0));
        ++exhaustive;
    }
    return {mismatches == 0 && worst <= kGreedyRatioLimit,
            "100 instances, " + std::to_string(mismatches) + " mismatches; worst greedy/optimum ratio " +
                fmt(worst) + " over " + std::to_string(exhaustive) + " exhaustive instances"};
}

// 3. Analytic gradients against central differences.
Outcome gradient_correctness() {
    std::mt19937_64 gen(1003);
    int batches = 0, rejected = 0;
    double worst_l0 = 0.0, worst_ld = 0.0, worst_net = 0.0;
    while (batches < 50) {
        const std::size_t n = 2 + gen() % 11;
        const std::size_t p = 1 + gen() % 8;
        const std::size_t d_in = 1 + gen() % 6;
        NetworkSpec spec;
        spec.input_dim = d_in;
        spec.hidden_dims = {1 + gen() % 8};
        spec.feature_dim = p;
        spec.num_classes = 2 + gen() % 2;
        spec.init_seed = gen();
        auto params = init_params(spec);
        const auto x = oracle::random_matrix(n, d_in, gen, -2.0, 2.0);
        std::vector<int> labels;
        std::vector<SubclassTag> tags;
        for (std::size_t i = 0; i < n; ++i) {
            labels.push_back(1 + static_cast<int>(gen() % spec.num_classes));
            tags.push_back({labels.back(), 1 + static_cast<int>(gen() % 2)});
        }
        LossParams loss;
        loss.delta = std::uniform_real_distribution<double>(0.05, 2.0)(gen);
        loss.beta = 0.5;
        loss.hinge = gen() % 4 != 0;
        const double lambda = 0.1;

        FeatureBatch fb{forward(params, x).features(), tags};
        if (!oracle::away_from_kinks(params, x, 1e-4) ||
            !oracle::hausdorff_terms_smooth(fb.features, tags, loss.delta, 1e-4)) {
            ++rejected;
            continue;
        }
        ++batches;

        const auto r = loss_gradients(fb, loss);
        for (std::size_t i = 0; i < fb.features.data.size(); ++i) {
            auto& v = fb.features.data[i];
            const double l0 = oracle::central_difference([&] { return total_loss(fb, loss).l0; }, v,
                                                          kFiniteDifferenceStep);
            const double ld = oracle::central_difference([&] { return total_loss(fb, loss).ld; }, v,
                                                          kFiniteDifferenceStep);
            worst_l0 = std::max(worst_l0, oracle::relative_error(r.l0_grads.data[i], l0));
            worst_ld = std::max(worst_ld, oracle::relative_error(r.ld_grads.data[i], ld));
        }

        TrainingSet batch;
        batch.inputs = x;
        batch.labels = labels;
        batch.tags = tags;
        const auto step = composed_step(params, batch, lambda, loss);
        auto tensors = params.tensors();
        const auto grads = step.grads.tensors();
        for (std::size_t t = 0; t < tensors.size(); ++t)
            for (std::size_t i = 0; i < tensors[t].size(); ++i) {
                const double num = oracle::central_difference(
                    [&] { return oracle::composed_objective(params, x, labels, tags, lambda, loss); }, tensors[t][i],
                    kFiniteDifferenceStep);
                worst_net = std::max(worst_net, oracle::relative_error(grads[t][i], num));
            }
    }
    const bool pass = worst_l0 < kGradientRelTol && worst_ld < kGradientRelTol && worst_net < kGradientRelTol;
    return {pass, "50 batches (" + std::to_string(rejected) + " tie/kink draws redrawn); worst rel err L0 " +
                      fmt(worst_l0) + ", Ld " + fmt(worst_ld) + ", composed " + fmt(worst_net)};
}

// 4. Loss invariants.
Outcome loss_invariants() {
    std::mt19937_64 gen(1004);
    std::vector<std::string> failed;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok && std::find(failed.begin(), failed.end(), what) == failed.end()) failed.push_back(what);
    };
    auto close = [](double a, double b) { return std::abs(a - b) <= kInvariantTol * std::max(1.0, std::abs(b)); };
    auto random_batch = [&](std::size_t n, std::size_t p) {
        FeatureBatch b{oracle::random_matrix(n, p, gen), {}};
        for (std::size_t i = 0; i < n; ++i)
            b.tags.push_back({1 + static_cast<int>(gen() % 3), 1 + static_cast<int>(gen() % 2)});
        return b;
    };
    LossParams params;
    params.delta = 2.0;
    params.beta = 1.0;

    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + gen() % 11, p = 1 + gen() % 8;
        auto batch = random_batch(n, p);
        const auto base = loss_gradients(batch, params);

        auto shifted = batch;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t d = 0; d < p; ++d) shifted.features(r, d) += 0.5 * static_cast<double>(d + 1);
        const auto moved = loss_gradients(shifted, params);
        expect(close(moved.l0, base.l0) && close(moved.ld, base.ld), "translation");
        for (std::size_t i = 0; i < base.grads.data.size(); ++i)
            expect(close(moved.grads.data[i], base.grads.data[i]), "translation");

        if (oracle::hausdorff_terms_smooth(batch.features, batch.tags, params.delta, 1e-9)) {
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), gen);
            FeatureBatch shuffled{Matrix(n, p), {}};
            for (std::size_t r = 0; r < n; ++r) {
                std::copy(batch.features.row(perm[r]).begin(), batch.features.row(perm[r]).end(),
                          shuffled.features.row(r).begin());
                shuffled.tags.push_back(batch.tags[perm[r]]);
            }
            const auto s = loss_gradients(shuffled, params);
            expect(close(s.l0, base.l0) && close(s.ld, base.ld), "permutation");
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t d = 0; d < p; ++d) expect(close(s.grads(r, d), base.grads(perm[r], d)), "permutation");
        }

        for (double scale : {4.0, 0.75, 3.0}) {
            auto scaled = batch;
            for (auto& v : scaled.features.data) v *= scale;
            expect(close(embedding_loss(scaled), scale * scale * base.l0), "L0 homogeneity");
        }

        for (const auto& [tag, rows] : group_by_subclass(batch))
            for (std::size_t d = 0; d < p; ++d) {
                double sum = 0.0, mag = 0.0;
                for (auto i : rows) {
                    sum += base.l0_grads(i, d);
                    mag += std::abs(base.l0_grads(i, d));
                }
                expect(std::abs(sum) <= kInvariantTol * std::max(1.0, mag), "gradient sum per sub-class");
            }

        // collapse every sub-class onto one point: L0 must vanish, and any
        // perturbation inside a shared sub-class must revive it
        auto collapsed = batch;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t d = 0; d < p; ++d)
                collapsed.features(r, d) = 7.0 * collapsed.tags[r].class_id + collapsed.tags[r].subclass_id + d;
        expect(embedding_loss(collapsed) == 0.0, "zero iff collapsed");
        const auto groups = group_by_subclass(collapsed);
        for (const auto& [tag, rows] : groups)
            if (rows.size() > 1) {
                auto nudged = collapsed;
                nudged.features(rows.back(), 0) += 1e-3;
                expect(embedding_loss(nudged) > 0.0, "zero iff collapsed");
                break;
            }
    }

    // directed Hausdorff asymmetry: A = {0, 10}, B = {0}
    Matrix a(2, 1), b(1, 1);
    a(1, 0) = 10.0;
    expect(hausdorff(a, b) == 100.0 && hausdorff(b, a) == 0.0, "Hausdorff asymmetry");

    std::string detail = "translation, permutation, L0 homogeneity, zero iff collapsed, Hausdorff asymmetry, "
                         "gradient sum per sub-class over 100 batches";
    if (!failed.empty()) {
        detail = "violated:";
        for (const auto& f : failed) detail += " [" + f + "]";
    }
    return {failed.empty(), detail};
}

// 5. Planted sub-cluster recovery through the cluster command.
Outcome planted_recovery() {
    testutil::TempDir dir("acc_recovery");
    int good = 0;
    std::string per_seed;
    for (auto seed : kBenchmarkSeeds) {
        const auto ctx = context(benchmark_config(seed, 1e-4), dir / ("seed_" + std::to_string(seed)));
        cmd_prepare(ctx);
        const auto summary = cmd_cluster(ctx);
        if (!summary.has_ground_truth) return {false, "prepared data carries no ground truth"};
        good += summary.min_ari >= kAriThreshold;
        per_seed += (per_seed.empty() ? "" : ", ") + fmt(summary.min_ari);
    }
    return {good >= kAriSeedsRequired, "min per-class ARI by seed: " + per_seed + " (" + std::to_string(good) +
                                           "/5 >= " + fmt(kAriThreshold) + ")"};
}

// 6. Joint loss against the softmax-only baseline.
Outcome benchmark_benefit() {
    testutil::TempDir dir("acc_benchmark");
    std::vector<double> oa_dmem, oa_base;
    std::size_t f_ij = 0, f_ji = 0;
    for (auto seed : kBenchmarkSeeds) {
        EvaluationSummary results[2];
        const double lambdas[2] = {1e-4, 0.0};
        for (int v = 0; v < 2; ++v) {
            const auto ctx = context(benchmark_config(seed, lambdas[v]),
                                     dir / ("seed_" + std::to_string(seed)) / (v == 0 ? "dmem" : "softmax"));
            cmd_prepare(ctx);
            cmd_cluster(ctx);
            cmd_train(ctx);
            results[v] = cmd_evaluate(ctx);
        }
        if (results[0].indices != results[1].indices) return {false, "test splits differ between variants"};
        oa_dmem.push_back(results[0].metrics.overall_accuracy);
        oa_base.push_back(results[1].metrics.overall_accuracy);
        const auto m = mcnemar(results[0].predictions, results[1].predictions, results[0].labels);
        f_ij += m.f_ij;
        f_ji += m.f_ji;
    }
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
    const auto pooled = mcnemar_from_counts(f_ij, f_ji);
    std::string per_seed;
    for (std::size_t i = 0; i < oa_dmem.size(); ++i)
        per_seed += (i ? ", " : "") + fmt(100 * oa_dmem[i]) + "/" + fmt(100 * oa_base[i]);
    return {mean(oa_dmem) >= mean(oa_base) && pooled.statistic > 0.0,
            "mean OA joint " + fmt(100 * mean(oa_dmem)) + " % vs softmax-only " + fmt(100 * mean(oa_base)) +
                " %; pooled McNemar F = " + fmt(pooled.statistic) + " (" + std::to_string(f_ij) + " vs " +
                std::to_string(f_ji) + (pooled.significant ? ", significant" : ", not significant") +
                "); per seed joint/softmax " + per_seed};
}

// 7. Evaluation oracles.
Outcome evaluation_correctness() {
    std::vector<int> labels, preds;
    const int cm[2][2] = {{8, 2}, {3, 7}};
    for (int t = 0; t < 2; ++t)
        for (int p = 0; p < 2; ++p)
            for (int r = 0; r < cm[t][p]; ++r) {
                labels.push_back(t + 1);
                preds.push_back(p + 1);
            }
    const auto m = metrics(preds, labels);
    bool ok = std::abs(m.overall_accuracy - 0.75) < kEvalTol && std::abs(m.average_accuracy - 0.75) < kEvalTol &&
              std::abs(m.kappa - 0.5) < kEvalTol;
    const auto mc = mcnemar_from_counts(10, 2);
    ok &= std::abs(mc.statistic - kMcNemarReference) < kMcNemarTol;

    std::mt19937_64 gen(1007);
    int antisymmetry_failures = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + gen() % 200;
        const int classes = 2 + static_cast<int>(gen() % 6);
        std::vector<int> y(n), a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = 1 + static_cast<int>(gen() % classes);
            a[i] = gen() % 2 ? y[i] : 1 + static_cast<int>(gen() % classes);
            b[i] = gen() % 2 ? y[i] : 1 + static_cast<int>(gen() % classes);
        }
        const auto ab = mcnemar(a, b, y);
        const auto ba = mcnemar(b, a, y);
        antisymmetry_failures += !(ab.statistic == -ba.statistic && ab.f_ij == ba.f_ji && ab.f_ji == ba.f_ij);
    }
    ok &= antisymmetry_failures == 0;
    return {ok, "OA " + fmt(m.overall_accuracy) + ", AA " + fmt(m.average_accuracy) + ", kappa " + fmt(m.kappa) +
                    "; McNemar(10,2) = " + fmt(mc.statistic) + "; antisymmetry failures " +
                    std::to_string(antisymmetry_failures) + "/100"};
}

// 8. Byte-identical repeated training.
Outcome reproducibility() {
    testutil::TempDir dir("acc_repro");
    const auto cfg = benchmark_config(7, 1e-4, 500);
    std::string logs[2], checkpoints[2];
    for (int r = 0; r < 2; ++r) {
        const auto ctx = context(cfg, dir / ("run_" + std::to_string(r)));
        cmd_prepare(ctx);
        cmd_cluster(ctx);
        cmd_train(ctx);
        logs[r] = testutil::slurp(ctx.out_dir / "train_log.csv");
        checkpoints[r] = testutil::slurp(ctx.out_dir / "checkpoint.bin");
    }
    const bool same = !logs[0].empty() && logs[0] == logs[1] && !checkpoints[0].empty() &&
                      checkpoints[0] == checkpoints[1];
    return {same, "500 iterations twice: log " + std::string(logs[0] == logs[1] ? "identical" : "differs") +
                      " (" + std::to_string(logs[0].size()) + " bytes), checkpoint " +
                      (checkpoints[0] == checkpoints[1] ? "identical" : "differs") + " (" +
                      std::to_string(checkpoints[0].size()) + " bytes)"};
}

// 9. Real-data smoke run, only when a converted cube is supplied.
std::optional<Outcome> real_data_smoke() {
    const char* cube = std::getenv("DMEM_REAL_CUBE");
    if (!cube || !*cube) return std::nullopt;
    testutil::TempDir dir("acc_real");
    RunConfig cfg;
    if (const char* path = std::getenv("DMEM_REAL_CONFIG"); path && *path) cfg = load_run_config(path);
    cfg.synthetic = false;
    cfg.cube = fs::path(cube);
    cfg.compare_predictions.reset();
    cfg.validate();
    const auto ctx = context(cfg, dir.path());
    cmd_prepare(ctx);
    cmd_cluster(ctx);
    cmd_train(ctx);
    const auto eval = cmd_evaluate(ctx);
    cmd_map(ctx);
    std::string missing;
    for (const char* f : {"patches.bin", "partition.txt", "checkpoint.bin", "train_log.csv", "metrics.csv",
                          "predictions.txt", "classification_map.ppm", "groundtruth_map.ppm"})
        if (!fs::exists(dir / f)) missing += std::string(" ") + f;
    return Outcome{missing.empty(), missing.empty() ? "all artifacts written; OA " +
                                                          fmt(100 * eval.metrics.overall_accuracy) + " %, kappa " +
                                                          fmt(eval.metrics.kappa) + " (reported, not asserted)"
                                                    : "missing:" + missing};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "geodesic oracle equivalence", 10, true, geodesic_equivalence},
        {2, "clustering reference equivalence", 60, true, clustering_equivalence},
        {3, "gradient correctness", 120, true, gradient_correctness},
        {4, "loss invariant suite", 10, true, loss_invariants},
        {5, "planted-manifold recovery", 60, true, planted_recovery},
        {6, "joint loss benefit at desk scale", 600, true, benchmark_benefit},
        {7, "evaluation correctness", 5, true, evaluation_correctness},
        {8, "reproducibility", 60, true, reproducibility},
    };

    bool all_pass = true;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit_s > 0 && secs > c.time_limit_s) {
            o.pass = false;
            o.detail += "; over the " + fmt(c.time_limit_s) + " s limit";
        }
        all_pass &= o.pass || !c.gating;
        std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " " << c.name << ": " << o.detail
                  << " [" << fmt(secs) << " s]" << std::endl;
    }

    const auto start = std::chrono::steady_clock::now();
    std::optional<Outcome> smoke;
    try {
        smoke = real_data_smoke();
    } catch (const std::exception& e) {
        smoke = Outcome{false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (smoke)
        std::cout << "criterion 9 " << (smoke->pass ? "PASS" : "FAIL") << " real-data smoke (non-gating): "
                  << smoke->detail << " [" << fmt(secs) << " s]" << std::endl;
    else
        std::cout << "criterion 9 SKIP real-data smoke (non-gating): DMEM_REAL_CUBE not set" << std::endl;

    std::cout << (all_pass ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL") << std::endl;
    return all_pass ? 0 : 1;
}
