#include "dmem/dataset.hpp"
#include "dmem/rng.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

namespace dmem {

namespace {

constexpr std::string_view kCubeMagic = "HSIC";
constexpr std::uint32_t kCubeVersion = 1;
constexpr std::size_t kCubeHeaderBytes = 4 + 5 * 4;

}  // namespace

std::size_t HyperCube::labelled_count() const {
    return static_cast<std::size_t>(
        std::count_if(labels.begin(), labels.end(), [](std::uint16_t l) { return l != 0; }));
}

std::vector<std::size_t> HyperCube::label_histogram() const {
    std::uint32_t top = num_classes;
    for (auto l : labels) top = std::max<std::uint32_t>(top, l);
    std::vector<std::size_t> hist(top + 1, 0);
    for (auto l : labels) ++hist[l];
    return hist;
}

void HyperCube::validate() const {
    if (height == 0 || width == 0 || bands == 0)
        throw input_error("malformed header: cube dimensions must be positive");
    const std::size_t pixels = static_cast<std::size_t>(height) * width;
    if (values.size() != pixels * bands)
        throw input_error("size mismatch: expected " + std::to_string(pixels * bands) +
                          " values, got " + std::to_string(values.size()));
    if (labels.size() != pixels)
        throw input_error("size mismatch: expected " + std::to_string(pixels) + " labels, got " +
                          std::to_string(labels.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw input_error("NaN payload: non-finite value at index " + std::to_string(i));
    }
    for (auto l : labels) {
        if (l > num_classes)
            throw input_error("label " + std::to_string(l) + " exceeds class count " +
                              std::to_string(num_classes));
    }
}

HyperCube load_cube(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw input_error("no such file: " + path.string());
    const auto data = io::read_file(path);
    const std::string ctx = "cube " + path.string();
    if (data.size() < kCubeHeaderBytes) throw input_error(ctx + ": malformed header (truncated)");

    io::Reader in(data, ctx);
    if (in.bytes(4) != kCubeMagic) throw input_error(ctx + ": malformed header (bad magic)");
    const auto version = in.u32();
    if (version != kCubeVersion)
        throw input_error(ctx + ": malformed header (unsupported version " +
                          std::to_string(version) + ")");

    HyperCube cube;
    cube.height = in.u32();
    cube.width = in.u32();
    cube.bands = in.u32();
    cube.num_classes = in.u32();
    if (cube.height == 0 || cube.width == 0 || cube.bands == 0)
        throw input_error(ctx + ": malformed header (zero dimension)");

    const std::size_t pixels = static_cast<std::size_t>(cube.height) * cube.width;
    const std::size_t expected = kCubeHeaderBytes + pixels * cube.bands * 4 + pixels * 2;
    if (data.size() != expected)
        throw input_error(ctx + ": size mismatch (expected " + std::to_string(expected) +
                          " bytes, found " + std::to_string(data.size()) + ")");

    cube.values.resize(pixels * cube.bands);
    for (auto& v : cube.values) v = in.f32();
    cube.labels.resize(pixels);
    for (auto& l : cube.labels) l = in.u16();

    try {
        cube.validate();
    } catch (const Error& e) {
        throw input_error(ctx + ": " + e.what());
    }
    return cube;
}

void save_cube(const HyperCube& cube, const std::filesystem::path& path) {
    cube.validate();
    io::Writer out;
    out.bytes(kCubeMagic);
    out.u32(kCubeVersion);
    out.u32(cube.height);
    out.u32(cube.width);
    out.u32(cube.bands);
    out.u32(cube.num_classes);
    for (float v : cube.values) out.f32(v);
    for (auto l : cube.labels) out.u16(l);
    out.save(path);
}

std::vector<std::string> load_class_names(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open class names: " + path.string());
    std::vector<std::string> names;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        names.push_back(line);
    }
    return names;
}

void save_class_names(const std::vector<std::string>& names, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw input_error("cannot open for writing: " + path.string());
    for (const auto& n : names) out << n << '\n';
}

std::vector<float> Patch::center_spectrum() const {
    const std::size_t half = window / 2;
    const std::size_t offset = (half * window + half) * bands;
    return {tensor.begin() + static_cast<std::ptrdiff_t>(offset),
            tensor.begin() + static_cast<std::ptrdiff_t>(offset + bands)};
}

std::int64_t mirror_index(std::int64_t i, std::int64_t n) {
    const std::int64_t period = 2 * n;
    std::int64_t m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

std::vector<Patch> extract_patches(const HyperCube& cube, std::uint32_t window) {
    if (window == 0 || window % 2 == 0)
        throw input_error("patch window must be odd, got " + std::to_string(window));
    const auto half = static_cast<std::int64_t>(window / 2);
    const auto h = static_cast<std::int64_t>(cube.height);
    const auto w = static_cast<std::int64_t>(cube.width);

    std::vector<Patch> patches;
    patches.reserve(cube.labelled_count());
    for (std::uint32_t r = 0; r < cube.height; ++r) {
        for (std::uint32_t c = 0; c < cube.width; ++c) {
            const auto label = cube.label(r, c);
            if (label == 0) continue;
            Patch p;
            p.center_row = r;
            p.center_col = c;
            p.window = window;
            p.bands = cube.bands;
            p.label = label;
            p.tensor.reserve(static_cast<std::size_t>(window) * window * cube.bands);
            for (std::int64_t dr = -half; dr <= half; ++dr) {
                const auto rr = static_cast<std::uint32_t>(mirror_index(r + dr, h));
                for (std::int64_t dc = -half; dc <= half; ++dc) {
                    const auto cc = static_cast<std::uint32_t>(mirror_index(c + dc, w));
                    for (std::uint32_t b = 0; b < cube.bands; ++b)
                        p.tensor.push_back(cube.value(rr, cc, b));
                }
            }
            patches.push_back(std::move(p));
        }
    }
    return patches;
}

std::size_t training_count(const SplitSpec& spec, std::size_t class_size) {
    if (spec.mode == SplitMode::CountPerClass) {
        if (spec.amount < 1 || spec.amount != std::floor(spec.amount))
            throw config_error("split count must be a positive integer");
        const auto count = static_cast<std::size_t>(spec.amount);
        if (count > class_size)
            throw input_error("class has " + std::to_string(class_size) +
                              " samples, fewer than the requested " + std::to_string(count));
        return count;
    }
    if (!(spec.amount > 0.0 && spec.amount <= 1.0))
        throw config_error("split fraction must lie in (0, 1]");
    const auto rounded = static_cast<std::size_t>(std::llround(spec.amount * static_cast<double>(class_size)));
    return std::clamp<std::size_t>(rounded, 1, class_size);
}

SplitIndices split_indices(const std::vector<int>& labels, const SplitSpec& spec) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    Rng rng(spec.seed);
    std::vector<char> chosen(labels.size(), 0);
    for (auto& [label, members] : by_class) {
        const std::size_t n_train = training_count(spec, members.size());
        // partial Fisher-Yates: the first n_train slots become the training draw
        for (std::size_t i = 0; i < n_train; ++i) {
            const std::size_t j = i + rng.below(members.size() - i);
            std::swap(members[i], members[j]);
            chosen[members[i]] = 1;
        }
    }

    SplitIndices out;
    for (std::size_t i = 0; i < labels.size(); ++i) (chosen[i] ? out.train : out.test).push_back(i);
    return out;
}

std::pair<std::vector<Patch>, std::vector<Patch>> split(const std::vector<Patch>& samples,
                                                        const SplitSpec& spec) {
    std::vector<int> labels;
    labels.reserve(samples.size());
    for (const auto& p : samples) labels.push_back(p.label);
    const auto idx = split_indices(labels, spec);

    std::pair<std::vector<Patch>, std::vector<Patch>> out;
    for (auto i : idx.train) out.first.push_back(samples[i]);
    for (auto i : idx.test) out.second.push_back(samples[i]);
    return out;
}

BandStats fit_band_stats(const std::vector<Patch>& train) {
    if (train.empty()) throw input_error("cannot fit band statistics on an empty training set");
    const std::size_t bands = train.front().bands;
    BandStats stats{std::vector<double>(bands, 0.0), std::vector<double>(bands, 0.0)};
    for (const auto& p : train) {
        const auto spec = p.center_spectrum();
        for (std::size_t b = 0; b < bands; ++b) stats.mean[b] += spec[b];
    }
    const double n = static_cast<double>(train.size());
    for (auto& m : stats.mean) m /= n;
    for (const auto& p : train) {
        const auto spec = p.center_spectrum();
        for (std::size_t b = 0; b < bands; ++b) {
            const double d = spec[b] - stats.mean[b];
            stats.stddev[b] += d * d;
        }
    }
    for (auto& s : stats.stddev) {
        s = std::sqrt(s / n);
        if (!(s > 0.0)) s = 1.0;  // constant band
    }
    return stats;
}

void normalize_patches(std::vector<Patch>& patches, const BandStats& stats) {
    for (auto& p : patches) {
        if (p.bands != stats.mean.size())
            throw input_error("band statistics do not match patch band count");
        for (std::size_t i = 0; i < p.tensor.size(); ++i) {
            const std::size_t b = i % p.bands;
            p.tensor[i] = static_cast<float>((p.tensor[i] - stats.mean[b]) / stats.stddev[b]);
        }
    }
}

ManifoldShape parse_manifold_shape(const std::string& name) {
    if (name == "swiss-roll") return ManifoldShape::SwissRoll;
    if (name == "arc") return ManifoldShape::Arc;
    if (name == "gaussian-blob") return ManifoldShape::GaussianBlob;
    throw config_error("unknown manifold shape '" + name + "' (swiss-roll, arc, gaussian-blob)");
}

std::string to_string(ManifoldShape shape) {
    switch (shape) {
        case ManifoldShape::SwissRoll: return "swiss-roll";
        case ManifoldShape::Arc: return "arc";
        case ManifoldShape::GaussianBlob: return "gaussian-blob";
    }
    return "?";
}

void SyntheticSpec::validate() const {
    if (num_classes < 1) throw config_error("synthetic num_classes must be >= 1");
    if (subclusters_per_class < 1) throw config_error("synthetic subclusters must be >= 1");
    if (samples_per_subcluster < 1) throw config_error("synthetic samples_per_subcluster must be >= 1");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw config_error("synthetic noise_sigma must be a non-negative finite number");
    const int min_dim = manifold == ManifoldShape::SwissRoll ? 3 : 2;
    if (ambient_dim < min_dim)
        throw config_error("synthetic ambient_dim must be >= " + std::to_string(min_dim) + " for " +
                           to_string(manifold));
}

namespace {

// Random orthonormal frame with `count` columns in `dim` dimensions.
std::vector<std::vector<double>> random_frame(int dim, int count, Rng& rng) {
    std::vector<std::vector<double>> frame;
    while (static_cast<int>(frame.size()) < count) {
        std::vector<double> v(static_cast<std::size_t>(dim));
        for (auto& x : v) x = rng.normal();
        for (const auto& u : frame) {
            double dot = 0.0;
            for (int i = 0; i < dim; ++i) dot += v[i] * u[i];
            for (int i = 0; i < dim; ++i) v[i] -= dot * u[i];
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-8) continue;
        for (auto& x : v) x /= norm;
        frame.push_back(std::move(v));
    }
    return frame;
}

}  // namespace

// Geometry. All classes share one random 3-frame of the ambient space.
//  arc:           each class is a circle of radius 2 centred on a ring of radius
//                 1.2; sub-cluster j covers one third of the j-th angular slot,
//                 so neighbouring sub-clusters are separated by twice their own
//                 angular extent. Circles of different classes cross.
//  swiss-roll:    each class is a roll (t cos t, h, t sin t) / 10 with
//                 t in [1.5pi, 4.5pi], h in [0, 0.5], shifted along the roll axis;
//                 sub-clusters occupy the first third of equal t-slots.
//  gaussian-blob: sub-cluster centres sit at radius 2 around a class centre on a
//                 ring of radius 6; points are centre + noise.
// Isotropic N(0, noise_sigma^2) noise is added in every ambient dimension.
std::vector<SyntheticSample> synthesize(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const int dim = spec.ambient_dim;
    const int frame_cols = spec.manifold == ManifoldShape::SwissRoll ? 3 : 2;
    const auto frame = random_frame(dim, frame_cols, rng);

    const int m = spec.subclusters_per_class;
    const double two_pi = 2.0 * std::numbers::pi;

    std::vector<SyntheticSample> samples;
    samples.reserve(static_cast<std::size_t>(spec.num_classes) * m * spec.samples_per_subcluster);
    for (int s = 0; s < spec.num_classes; ++s) {
        const double class_angle = two_pi * s / spec.num_classes;
        const double phase = rng.uniform(0.0, two_pi);
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < spec.samples_per_subcluster; ++i) {
                double latent[3] = {0.0, 0.0, 0.0};
                switch (spec.manifold) {
                    case ManifoldShape::Arc: {
                        const double slot = two_pi / m;
                        const double theta = phase + j * slot + rng.uniform(0.0, slot / 3.0);
                        latent[0] = 1.2 * std::cos(class_angle) + 2.0 * std::cos(theta);
                        latent[1] = 1.2 * std::sin(class_angle) + 2.0 * std::sin(theta);
                        break;
                    }
                    case ManifoldShape::SwissRoll: {
                        const double t0 = 1.5 * std::numbers::pi;
                        const double slot = 3.0 * std::numbers::pi / m;
                        const double t = t0 + j * slot + rng.uniform(0.0, slot / 3.0);
                        const double h = rng.uniform(0.0, 0.5);
                        latent[0] = t * std::cos(t) / 10.0;
                        latent[1] = h + 0.75 * s;
                        latent[2] = t * std::sin(t) / 10.0;
                        break;
                    }
                    case ManifoldShape::GaussianBlob: {
                        const double a = phase + two_pi * j / m;
                        latent[0] = 6.0 * std::cos(class_angle) + (m > 1 ? 2.0 * std::cos(a) : 0.0);
                        latent[1] = 6.0 * std::sin(class_angle) + (m > 1 ? 2.0 * std::sin(a) : 0.0);
                        break;
                    }
                }
                SyntheticSample sample;
                sample.label = s + 1;
                sample.subcluster = j + 1;
                sample.x.assign(static_cast<std::size_t>(dim), 0.0);
                for (int c = 0; c < frame_cols; ++c)
                    for (int d = 0; d < dim; ++d) sample.x[d] += latent[c] * frame[c][d];
                if (spec.noise_sigma > 0.0)
                    for (auto& x : sample.x) x += spec.noise_sigma * rng.normal();
                samples.push_back(std::move(sample));
            }
        }
    }
    return samples;
}

std::vector<Patch> synthetic_patches(const std::vector<SyntheticSample>& samples) {
    std::vector<Patch> patches;
    patches.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Patch p;
        p.center_row = static_cast<std::uint32_t>(i);
        p.center_col = 0;
        p.window = 1;
        p.bands = static_cast<std::uint32_t>(samples[i].x.size());
        p.label = samples[i].label;
        p.tensor.assign(samples[i].x.begin(), samples[i].x.end());
        patches.push_back(std::move(p));
    }
    return patches;
}

}  // namespace dmem
