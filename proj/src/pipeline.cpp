#include "dmem/pipeline.hpp"
#include "dmem/model.hpp"
#include "dmem/trainer.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

namespace dmem {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kPatchMagic = "HSIP";
constexpr std::uint32_t kPatchVersion = 1;

const fs::path kPatchFile = "patches.bin";
const fs::path kTrainFile = "train_indices.txt";
const fs::path kTestFile = "test_indices.txt";
const fs::path kBandStatsFile = "band_stats.txt";
const fs::path kGroundTruthFile = "groundtruth_subclusters.txt";
const fs::path kClassNamesFile = "classes.txt";
const fs::path kPartitionFile = "partition.txt";
const fs::path kClusterDiagFile = "cluster_diagnostics.csv";
const fs::path kCheckpointFile = "checkpoint.bin";
const fs::path kTrainLogFile = "train_log.csv";
const fs::path kNonFiniteDumpFile = "nonfinite_batch.txt";
const fs::path kMetricsFile = "metrics.csv";
const fs::path kPredictionsFile = "predictions.txt";
const fs::path kMcNemarFile = "mcnemar.csv";
const fs::path kMapFile = "classification_map.ppm";
const fs::path kGroundTruthMapFile = "groundtruth_map.ppm";
const fs::path kSweepFile = "sweep.csv";
const fs::path kSweepFailuresFile = "sweep_failures.txt";
const fs::path kLossDebugFile = "loss_debug.csv";

std::ostream& log_of(const CommandContext& ctx) {
    static std::ostringstream sink;
    if (ctx.log) return *ctx.log;
    sink.str({});
    return sink;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot open for writing: " + path.string());
    out << text;
}

// Refuses to clobber existing outputs unless forced, then records the run
// configuration for this command.
void begin_command(const CommandContext& ctx, const std::string& name, std::vector<fs::path> outputs) {
    fs::create_directories(ctx.out_dir);
    const fs::path provenance = "config." + name + ".txt";
    outputs.push_back(provenance);
    if (!ctx.force) {
        for (const auto& f : outputs)
            if (fs::exists(ctx.out_dir / f))
                throw input_error("refusing to overwrite " + (ctx.out_dir / f).string() + " (pass --force)");
    }
    write_text(ctx.out_dir / provenance, ctx.config.serialize());
}

void require(const fs::path& path, const std::string& producer) {
    if (!fs::exists(path))
        throw input_error("missing " + path.string() + " (run '" + producer + "' first)");
}

std::vector<std::size_t> load_indices(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path.string());
    std::vector<std::size_t> out;
    for (std::size_t v; in >> v;) out.push_back(v);
    if (!in.eof()) throw input_error(path.string() + ": malformed index list");
    return out;
}

void save_indices(const std::vector<std::size_t>& idx, const fs::path& path) {
    std::ostringstream out;
    for (auto i : idx) out << i << '\n';
    write_text(path, out.str());
}

std::vector<int> labels_of(const PatchStore& store, const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) {
        if (r >= store.patches.size()) throw input_error("sample index " + std::to_string(r) + " out of range");
        out.push_back(store.patches[r].label);
    }
    return out;
}

std::vector<std::string> class_names_in(const fs::path& dir) {
    return fs::exists(dir / kClassNamesFile) ? load_class_names(dir / kClassNamesFile)
                                             : std::vector<std::string>{};
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Input: return kExitInput;
        case ErrorKind::Numeric: return kExitNumeric;
        case ErrorKind::Config: return kExitConfig;
    }
    return kExitFailure;
}

void save_patch_store(const PatchStore& store, const fs::path& path) {
    io::Writer out;
    out.bytes(kPatchMagic);
    out.u32(kPatchVersion);
    out.u32(static_cast<std::uint32_t>(store.patches.size()));
    out.u32(store.window);
    out.u32(store.bands);
    out.u32(store.num_classes);
    for (const auto& p : store.patches) {
        out.u32(p.center_row);
        out.u32(p.center_col);
        out.u32(static_cast<std::uint32_t>(p.label));
        for (float v : p.tensor) out.f32(v);
    }
    out.save(path);
}

PatchStore load_patch_store(const fs::path& path) {
    const auto data = io::read_file(path);
    io::Reader in(data, "patch store " + path.string());
    if (in.bytes(4) != kPatchMagic) throw input_error(path.string() + ": bad magic");
    if (in.u32() != kPatchVersion) throw input_error(path.string() + ": unsupported version");
    PatchStore store;
    const std::size_t count = in.u32();
    store.window = in.u32();
    store.bands = in.u32();
    store.num_classes = in.u32();
    const std::size_t values = static_cast<std::size_t>(store.window) * store.window * store.bands;
    if (in.remaining() != count * (12 + values * 4)) throw input_error(path.string() + ": size mismatch");
    store.patches.resize(count);
    for (auto& p : store.patches) {
        p.center_row = in.u32();
        p.center_col = in.u32();
        p.label = static_cast<int>(in.u32());
        p.window = store.window;
        p.bands = store.bands;
        p.tensor.resize(values);
        for (auto& v : p.tensor) v = in.f32();
    }
    return store;
}

Matrix patch_matrix(const std::vector<Patch>& patches, const std::vector<std::size_t>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), patches[rows.front()].tensor.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& t = patches[rows[i]].tensor;
        if (t.size() != m.cols) throw input_error("patches differ in size");
        std::copy(t.begin(), t.end(), m.row(i).begin());
    }
    return m;
}

void cmd_prepare(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.config;
    std::vector<fs::path> outputs{kPatchFile, kTrainFile, kTestFile, kBandStatsFile};
    if (cfg.synthetic) outputs.push_back(kGroundTruthFile);
    begin_command(ctx, "prepare", outputs);
    auto& log = log_of(ctx);

    PatchStore store;
    std::vector<int> ground_truth;
    if (cfg.synthetic) {
        const auto samples = synthesize(cfg.synthetic_spec());
        store.patches = synthetic_patches(samples);
        store.window = 1;
        store.bands = static_cast<std::uint32_t>(cfg.synth.ambient_dim);
        store.num_classes = static_cast<std::uint32_t>(cfg.synth.num_classes);
        for (const auto& s : samples) ground_truth.push_back(s.subcluster);
    } else {
        const HyperCube cube = load_cube(*cfg.cube);
        store.patches = extract_patches(cube, cfg.window);
        store.window = cfg.window;
        store.bands = cube.bands;
        store.num_classes = cube.num_classes;
        auto sidecar = *cfg.cube;
        sidecar.replace_extension(".classes");
        if (fs::exists(sidecar)) save_class_names(load_class_names(sidecar), ctx.out_dir / kClassNamesFile);
    }

    std::vector<int> labels;
    for (const auto& p : store.patches) labels.push_back(p.label);
    const auto split = split_indices(labels, cfg.split_spec());

    std::ostringstream stats_text;
    if (cfg.normalize) {
        std::vector<Patch> train;
        for (auto i : split.train) train.push_back(store.patches[i]);
        const auto stats = fit_band_stats(train);
        normalize_patches(store.patches, stats);
        stats_text << "# band mean stddev\n";
        for (std::size_t b = 0; b < stats.mean.size(); ++b)
            stats_text << b << ' ' << format_double(stats.mean[b]) << ' ' << format_double(stats.stddev[b]) << '\n';
    } else {
        stats_text << "# normalization disabled\n";
    }

    save_patch_store(store, ctx.out_dir / kPatchFile);
    save_indices(split.train, ctx.out_dir / kTrainFile);
    save_indices(split.test, ctx.out_dir / kTestFile);
    write_text(ctx.out_dir / kBandStatsFile, stats_text.str());
    if (cfg.synthetic) {
        std::ostringstream gt;
        gt << "# index class subcluster\n";
        for (std::size_t i = 0; i < ground_truth.size(); ++i)
            gt << i << ' ' << labels[i] << ' ' << ground_truth[i] << '\n';
        write_text(ctx.out_dir / kGroundTruthFile, gt.str());
    }
    log << "prepared " << store.patches.size() << " patches (" << split.train.size() << " train, "
        << split.test.size() << " test), window " << store.window << ", " << store.bands << " bands\n";
}

ClusterSummary cmd_cluster(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.config;
    require(ctx.out_dir / kPatchFile, "prepare");
    require(ctx.out_dir / kTrainFile, "prepare");
    begin_command(ctx, "cluster", {kPartitionFile, kClusterDiagFile});
    auto& log = log_of(ctx);

    const auto store = load_patch_store(ctx.out_dir / kPatchFile);
    const auto train_idx = load_indices(ctx.out_dir / kTrainFile);
    const auto labels = labels_of(store, train_idx);
    std::vector<std::vector<double>> samples;
    samples.reserve(train_idx.size());
    for (auto i : train_idx) samples.push_back(store.patches[i].flattened());

    std::vector<GeodesicMatrix> geodesics;
    ManifoldHooks hooks;
    if (cfg.dump_geodesics) hooks.geodesic_sink = &geodesics;

    ClusterSummary summary;
    summary.partition = model_manifolds(samples, labels, cfg.train.manifold, hooks);
    const auto& part = summary.partition;
    save_partition(part, train_idx, ctx.out_dir / kPartitionFile);

    std::ostringstream diag;
    diag << "class,samples,components,subclasses,max_diameter,component_merge_fallback,too_few_samples\n";
    for (const auto& d : part.diagnostics)
        diag << d.class_id << ',' << d.samples << ',' << d.components << ',' << d.subclasses << ','
             << format_double(d.max_diameter) << ',' << d.component_merge_fallback << ',' << d.too_few_samples
             << '\n';
    write_text(ctx.out_dir / kClusterDiagFile, diag.str());
    for (std::size_t c = 0; c < geodesics.size(); ++c)
        save_geodesic_matrix(geodesics[c], ctx.out_dir / ("geodesic_class_" +
                                                          std::to_string(part.diagnostics[c].class_id) + ".bin"));

    log << "k=" << part.k << " b=" << part.b << '\n';
    for (const auto& d : part.diagnostics)
        log << "class " << d.class_id << ": " << d.samples << " samples, " << d.components << " components, "
            << d.subclasses << " sub-classes, max diameter " << d.max_diameter << '\n';
    for (const auto& w : part.warnings) log << "warning: " << w << '\n';

    if (fs::exists(ctx.out_dir / kGroundTruthFile)) {
        std::ifstream in(ctx.out_dir / kGroundTruthFile);
        std::map<std::size_t, int> truth;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ss(line);
            std::size_t idx;
            int cls, sub;
            if (ss >> idx >> cls >> sub) truth[idx] = sub;
        }
        std::map<int, std::pair<std::vector<int>, std::vector<int>>> per_class;
        for (std::size_t t = 0; t < train_idx.size(); ++t) {
            auto& [found, expected] = per_class[labels[t]];
            found.push_back(part.tags[t].subclass_id);
            expected.push_back(truth.at(train_idx[t]));
        }
        summary.has_ground_truth = true;
        for (const auto& [cls, pair] : per_class) {
            const double ari = adjusted_rand_index(pair.first, pair.second);
            summary.class_ari.push_back(ari);
            log << "class " << cls << " ARI " << ari << '\n';
        }
        summary.min_ari = *std::min_element(summary.class_ari.begin(), summary.class_ari.end());
        summary.mean_ari = mean_of(summary.class_ari);
        log << "ARI min " << summary.min_ari << " mean " << summary.mean_ari << '\n';
    }
    return summary;
}

namespace {

TrainingSet load_training_set(const fs::path& dir, const PatchStore& store) {
    require(dir / kPartitionFile, "cluster");
    const auto train_idx = load_indices(dir / kTrainFile);
    const auto part = load_partition(dir / kPartitionFile);
    std::map<std::size_t, SubclassTag> tag_of;
    for (std::size_t i = 0; i < part.sample_ids.size(); ++i) tag_of[part.sample_ids[i]] = part.tags[i];

    TrainingSet data;
    data.inputs = patch_matrix(store.patches, train_idx);
    data.labels = labels_of(store, train_idx);
    for (auto i : train_idx) {
        auto it = tag_of.find(i);
        if (it == tag_of.end())
            throw input_error("partition does not cover training sample " + std::to_string(i));
        data.tags.push_back(it->second);
    }
    return data;
}

}  // namespace

void cmd_train(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.config;
    require(ctx.out_dir / kPatchFile, "prepare");
    begin_command(ctx, "train", {kCheckpointFile, kTrainLogFile});
    auto& log = log_of(ctx);

    const auto store = load_patch_store(ctx.out_dir / kPatchFile);
    const TrainingSet data = load_training_set(ctx.out_dir, store);
    const NetworkSpec spec = cfg.network_spec(data.inputs.cols, store.num_classes);

    TrainHooks hooks;
    hooks.checkpoint = ctx.out_dir / kCheckpointFile;
    hooks.warn = [&log](const std::string& w) { log << "warning: " << w << '\n'; };
    hooks.on_log = [&log](const TrainLogEntry& e) {
        log << "iter " << e.iter << " ce " << e.ce << " l0 " << e.l0 << " ld " << e.ld << " total " << e.total
            << '\n';
    };
    try {
        const auto result = train(data, spec, cfg.train_config(), hooks);
        save_train_log(result.log, ctx.out_dir / kTrainLogFile);
    } catch (const NumericFailure& e) {
        write_text(ctx.out_dir / kNonFiniteDumpFile, e.batch_dump());
        throw;
    }
    log << "checkpoint written to " << (ctx.out_dir / kCheckpointFile).string() << '\n';
}

void save_predictions(const EvaluationSummary& eval, const fs::path& path) {
    std::ostringstream out;
    out << "# index label prediction\n";
    for (std::size_t i = 0; i < eval.indices.size(); ++i)
        out << eval.indices[i] << ' ' << eval.labels[i] << ' ' << eval.predictions[i] << '\n';
    write_text(path, out.str());
}

EvaluationSummary load_predictions(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open predictions: " + path.string());
    EvaluationSummary eval;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::size_t idx;
        int label, pred;
        if (!(ss >> idx >> label >> pred)) throw input_error(path.string() + ": malformed line '" + line + "'");
        eval.indices.push_back(idx);
        eval.labels.push_back(label);
        eval.predictions.push_back(pred);
    }
    return eval;
}

EvaluationSummary cmd_evaluate(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.config;
    require(ctx.out_dir / kPatchFile, "prepare");
    require(ctx.out_dir / kCheckpointFile, "train");
    std::vector<fs::path> outputs{kMetricsFile, kPredictionsFile};
    if (cfg.compare_predictions) outputs.push_back(kMcNemarFile);
    begin_command(ctx, "evaluate", outputs);
    auto& log = log_of(ctx);

    const auto store = load_patch_store(ctx.out_dir / kPatchFile);
    const auto params = load_checkpoint(ctx.out_dir / kCheckpointFile);
    const std::size_t dim = static_cast<std::size_t>(store.window) * store.window * store.bands;
    if (params.spec.input_dim != dim || params.spec.num_classes != store.num_classes)
        throw input_error("checkpoint/spec mismatch: checkpoint expects input " +
                          std::to_string(params.spec.input_dim) + " and " +
                          std::to_string(params.spec.num_classes) + " classes");

    EvaluationSummary eval;
    eval.indices = load_indices(ctx.out_dir / kTestFile);
    if (eval.indices.empty()) throw input_error("test set is empty");
    eval.labels = labels_of(store, eval.indices);
    eval.predictions = predict(params, patch_matrix(store.patches, eval.indices));
    eval.metrics = metrics(eval.predictions, eval.labels, store.num_classes);

    const auto names = class_names_in(ctx.out_dir);
    write_text(ctx.out_dir / kMetricsFile, metrics_csv(eval.metrics, names));
    save_predictions(eval, ctx.out_dir / kPredictionsFile);
    log << metrics_table(eval.metrics, names);

    if (cfg.compare_predictions) {
        const auto other = load_predictions(*cfg.compare_predictions);
        if (other.indices != eval.indices)
            throw input_error("comparison predictions cover different test samples");
        eval.mcnemar = mcnemar(eval.predictions, other.predictions, eval.labels);
        std::ostringstream out;
        out << "f_ij,f_ji,statistic,significant\n"
            << eval.mcnemar->f_ij << ',' << eval.mcnemar->f_ji << ',' << format_double(eval.mcnemar->statistic)
            << ',' << eval.mcnemar->significant << '\n';
        write_text(ctx.out_dir / kMcNemarFile, out.str());
        log << "McNemar vs " << cfg.compare_predictions->string() << ": F = " << eval.mcnemar->statistic
            << (eval.mcnemar->significant ? " (significant)" : " (not significant)") << '\n';
    }
    return eval;
}

void cmd_map(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.config;
    if (!cfg.cube) throw config_error("map needs a 'cube' data source");
    require(ctx.out_dir / kPatchFile, "prepare");
    require(ctx.out_dir / kCheckpointFile, "train");
    begin_command(ctx, "map", {kMapFile, kGroundTruthMapFile});
    auto& log = log_of(ctx);

    const HyperCube cube = load_cube(*cfg.cube);
    const auto store = load_patch_store(ctx.out_dir / kPatchFile);
    if (store.patches.size() != cube.labelled_count())
        throw input_error("patch store does not match the cube's labelled pixels");
    const auto params = load_checkpoint(ctx.out_dir / kCheckpointFile);
    std::vector<std::size_t> all(store.patches.size());
    std::iota(all.begin(), all.end(), 0);
    const auto preds = predict(params, patch_matrix(store.patches, all));

    const auto palette = cfg.palette ? load_palette(*cfg.palette) : default_palette(cube.num_classes);
    save_classification_map(cube, preds, palette, ctx.out_dir / kMapFile);
    std::vector<int> truth;
    for (const auto& p : store.patches) truth.push_back(p.label);
    save_classification_map(cube, truth, palette, ctx.out_dir / kGroundTruthMapFile);
    log << "maps written to " << (ctx.out_dir / kMapFile).string() << '\n';
}

void cmd_sweep(const CommandContext& ctx) {
    const RunConfig& base = ctx.config;
    begin_command(ctx, "sweep", {kSweepFile, kSweepFailuresFile});
    auto& log = log_of(ctx);

    auto or_default = [](auto list, auto fallback) {
        if (list.empty()) list.push_back(fallback);
        return list;
    };
    const auto ks = or_default(base.sweep_k, base.train.manifold.k);
    const auto bs = or_default(base.sweep_b, base.train.manifold.b);
    const auto deltas = or_default(base.sweep_delta, base.train.loss.delta);
    const auto lambdas = or_default(base.sweep_lambda, base.train.lambda);
    const auto seeds = or_default(base.sweep_seeds, base.seed);

    std::ostringstream table, failures;
    table << "k,b,delta,lambda,runs,failures,oa_mean,oa_sd,aa_mean,aa_sd,kappa_mean,kappa_sd\n";
    for (auto k : ks)
        for (auto b : bs)
            for (auto delta : deltas)
                for (auto lambda : lambdas) {
                    const std::string cell = "k" + std::to_string(k) + "_b" + std::to_string(b) + "_delta" +
                                             format_double(delta) + "_lambda" + format_double(lambda);
                    std::vector<double> oa, aa, kappa;
                    std::size_t failed = 0;
                    for (auto seed : seeds) {
                        CommandContext run;
                        run.config = base;
                        run.config.train.manifold.k = k;
                        run.config.train.manifold.b = b;
                        run.config.train.loss.delta = delta;
                        run.config.train.lambda = lambda;
                        run.config.seed = seed;
                        run.out_dir = ctx.out_dir / "sweep" / cell / ("seed_" + std::to_string(seed));
                        run.force = ctx.force;
                        try {
                            run.config.validate();
                            cmd_prepare(run);
                            cmd_cluster(run);
                            cmd_train(run);
                            const auto eval = cmd_evaluate(run);
                            oa.push_back(eval.metrics.overall_accuracy);
                            aa.push_back(eval.metrics.average_accuracy);
                            kappa.push_back(eval.metrics.kappa);
                        } catch (const std::exception& e) {
                            ++failed;
                            failures << cell << " seed " << seed << ": " << e.what() << '\n';
                        }
                    }
                    table << k << ',' << b << ',' << format_double(delta) << ',' << format_double(lambda) << ','
                          << seeds.size() << ',' << failed << ',' << format_double(mean_of(oa)) << ','
                          << format_double(sd_of(oa)) << ',' << format_double(mean_of(aa)) << ','
                          << format_double(sd_of(aa)) << ',' << format_double(mean_of(kappa)) << ','
                          << format_double(sd_of(kappa)) << '\n';
                    log << cell << ": OA " << 100 * mean_of(oa) << " +- " << 100 * sd_of(oa) << " % over "
                        << oa.size() << " runs" << (failed ? " (" + std::to_string(failed) + " failed)" : "")
                        << '\n';
                }
    write_text(ctx.out_dir / kSweepFile, table.str());
    write_text(ctx.out_dir / kSweepFailuresFile, failures.str());
}

void cmd_debug_loss(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.config;
    require(ctx.out_dir / kPatchFile, "prepare");
    begin_command(ctx, "debug-loss", {kLossDebugFile});
    const auto store = load_patch_store(ctx.out_dir / kPatchFile);
    const TrainingSet data = load_training_set(ctx.out_dir, store);

    std::ostringstream csv;
    csv << "step,l0,ld,ce,total,grad_norm\n";
    TrainHooks hooks;
    hooks.log_all = true;
    hooks.on_log = [&csv](const TrainLogEntry& e) {
        csv << e.iter << ',' << format_double(e.l0) << ',' << format_double(e.ld) << ',' << format_double(e.ce)
            << ',' << format_double(e.total) << ',' << format_double(e.grad_norm) << '\n';
    };
    train(data, cfg.network_spec(data.inputs.cols, store.num_classes), cfg.train_config(), hooks);
    write_text(ctx.out_dir / kLossDebugFile, csv.str());
}

int run_command(const std::string& name, const CommandContext& ctx, std::ostream& err) {
    try {
        if (name == "prepare") cmd_prepare(ctx);
        else if (name == "cluster") cmd_cluster(ctx);
        else if (name == "train") cmd_train(ctx);
        else if (name == "evaluate") cmd_evaluate(ctx);
        else if (name == "map") cmd_map(ctx);
        else if (name == "sweep") cmd_sweep(ctx);
        else if (name == "debug-loss") cmd_debug_loss(ctx);
        else {
            err << "error: unknown command '" << name << "'\n";
            return kExitConfig;
        }
        return kExitOk;
    } catch (const NumericFailure& e) {
        err << "error: " << e.what() << " (batch dumped to " << (ctx.out_dir / kNonFiniteDumpFile).string()
            << ")\n";
        return kExitNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace dmem
