#include "dmem/config.hpp"
#include "dmem/rng.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dmem {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, out);
    if (res.ec != std::errc{} || res.ptr != end)
        throw config_error("bad value for '" + key + "': '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw config_error("bad boolean for '" + key + "': '" + value + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
    std::vector<T> out;
    std::istringstream in(value);
    for (std::string item; std::getline(in, item, ',');) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number<T>(key, item));
    }
    return out;
}

template <class T>
std::string join(const std::vector<T>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>) out += format_double(items[i]);
        else out += std::to_string(items[i]);
    }
    return out;
}

std::string b2s(bool b) { return b ? "true" : "false"; }

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "cube") cube = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(value);
    else if (key == "synthetic") synthetic = parse_bool(key, value);
    else if (key == "synthetic.num_classes") synth.num_classes = parse_number<int>(key, value);
    else if (key == "synthetic.subclusters") synth.subclusters_per_class = parse_number<int>(key, value);
    else if (key == "synthetic.samples_per_subcluster") synth.samples_per_subcluster = parse_number<int>(key, value);
    else if (key == "synthetic.ambient_dim") synth.ambient_dim = parse_number<int>(key, value);
    else if (key == "synthetic.manifold") synth.manifold = parse_manifold_shape(value);
    else if (key == "synthetic.noise_sigma") synth.noise_sigma = parse_number<double>(key, value);
    else if (key == "window") window = parse_number<std::uint32_t>(key, value);
    else if (key == "normalize") normalize = parse_bool(key, value);
    else if (key == "split.mode") {
        if (value == "count") split_mode = SplitMode::CountPerClass;
        else if (value == "fraction") split_mode = SplitMode::FractionPerClass;
        else throw config_error("split.mode must be 'count' or 'fraction'");
    } else if (key == "split.amount") split_amount = parse_number<double>(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "k") train.manifold.k = parse_number<std::size_t>(key, value);
    else if (key == "b") train.manifold.b = parse_number<std::size_t>(key, value);
    else if (key == "dump_geodesics") dump_geodesics = parse_bool(key, value);
    else if (key == "hidden_dims") hidden_dims = parse_list<std::size_t>(key, value);
    else if (key == "feature_dim") feature_dim = parse_number<std::size_t>(key, value);
    else if (key == "lr") train.lr = parse_number<double>(key, value);
    else if (key == "iterations") train.iterations = parse_number<std::size_t>(key, value);
    else if (key == "batch_size") train.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "lambda") train.lambda = parse_number<double>(key, value);
    else if (key == "beta") train.loss.beta = parse_number<double>(key, value);
    else if (key == "delta") train.loss.delta = parse_number<double>(key, value);
    else if (key == "hinge") train.loss.hinge = parse_bool(key, value);
    else if (key == "log_every") train.log_every = parse_number<std::size_t>(key, value);
    else if (key == "log_wall_clock") train.log_wall_clock = parse_bool(key, value);
    else if (key == "compare_predictions")
        compare_predictions = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(value);
    else if (key == "palette") palette = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(value);
    else if (key == "sweep.k") sweep_k = parse_list<std::size_t>(key, value);
    else if (key == "sweep.b") sweep_b = parse_list<std::size_t>(key, value);
    else if (key == "sweep.delta") sweep_delta = parse_list<double>(key, value);
    else if (key == "sweep.lambda") sweep_lambda = parse_list<double>(key, value);
    else if (key == "sweep.seeds") sweep_seeds = parse_list<std::uint64_t>(key, value);
    else if (key == "out") out = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(value);
    else throw config_error("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
    if (synthetic == cube.has_value())
        throw config_error("exactly one data source is required: set 'cube' or 'synthetic = true'");
    if (synthetic) synth.validate();
    if (window == 0 || window % 2 == 0) throw config_error("window must be a positive odd integer");
    if (split_mode == SplitMode::CountPerClass && (split_amount < 1 || split_amount != static_cast<double>(static_cast<std::size_t>(split_amount))))
        throw config_error("split.amount must be a positive integer in count mode");
    if (split_mode == SplitMode::FractionPerClass && !(split_amount > 0 && split_amount <= 1))
        throw config_error("split.amount must lie in (0, 1] in fraction mode");
    if (feature_dim == 0) throw config_error("feature_dim must be positive");
    for (auto h : hidden_dims)
        if (h == 0) throw config_error("hidden_dims entries must be positive");
    train_config().validate();
    for (auto v : sweep_k)
        if (v == 0) throw config_error("sweep.k entries must be >= 1");
    for (auto v : sweep_b)
        if (v == 0) throw config_error("sweep.b entries must be >= 1");
    for (auto v : sweep_delta)
        if (!(v > 0)) throw config_error("sweep.delta entries must be positive");
    for (auto v : sweep_lambda)
        if (!(v >= 0)) throw config_error("sweep.lambda entries must be non-negative");
}

std::string RunConfig::serialize() const {
    std::ostringstream o;
    o << "cube = " << (cube ? cube->string() : "") << '\n'
      << "synthetic = " << b2s(synthetic) << '\n'
      << "synthetic.num_classes = " << synth.num_classes << '\n'
      << "synthetic.subclusters = " << synth.subclusters_per_class << '\n'
      << "synthetic.samples_per_subcluster = " << synth.samples_per_subcluster << '\n'
      << "synthetic.ambient_dim = " << synth.ambient_dim << '\n'
      << "synthetic.manifold = " << to_string(synth.manifold) << '\n'
      << "synthetic.noise_sigma = " << format_double(synth.noise_sigma) << '\n'
      << "window = " << window << '\n'
      << "normalize = " << b2s(normalize) << '\n'
      << "split.mode = " << (split_mode == SplitMode::CountPerClass ? "count" : "fraction") << '\n'
      << "split.amount = " << format_double(split_amount) << '\n'
      << "seed = " << seed << '\n'
      << "k = " << train.manifold.k << '\n'
      << "b = " << train.manifold.b << '\n'
      << "dump_geodesics = " << b2s(dump_geodesics) << '\n'
      << "hidden_dims = " << join(hidden_dims) << '\n'
      << "feature_dim = " << feature_dim << '\n'
      << "lr = " << format_double(train.lr) << '\n'
      << "iterations = " << train.iterations << '\n'
      << "batch_size = " << train.batch_size << '\n'
      << "lambda = " << format_double(train.lambda) << '\n'
      << "beta = " << format_double(train.loss.beta) << '\n'
      << "delta = " << format_double(train.loss.delta) << '\n'
      << "hinge = " << b2s(train.loss.hinge) << '\n'
      << "log_every = " << train.log_every << '\n'
      << "log_wall_clock = " << b2s(train.log_wall_clock) << '\n'
      << "compare_predictions = " << (compare_predictions ? compare_predictions->string() : "") << '\n'
      << "palette = " << (palette ? palette->string() : "") << '\n'
      << "sweep.k = " << join(sweep_k) << '\n'
      << "sweep.b = " << join(sweep_b) << '\n'
      << "sweep.delta = " << join(sweep_delta) << '\n'
      << "sweep.lambda = " << join(sweep_lambda) << '\n'
      << "sweep.seeds = " << join(sweep_seeds) << '\n'
      << "out = " << (out ? out->string() : "") << '\n';
    return o.str();
}

SplitSpec RunConfig::split_spec() const {
    return {split_mode, split_amount, stream_seed(seed, "split")};
}

SyntheticSpec RunConfig::synthetic_spec() const {
    SyntheticSpec s = synth;
    s.seed = stream_seed(seed, "synthesis");
    return s;
}

NetworkSpec RunConfig::network_spec(std::size_t input_dim, std::size_t num_classes) const {
    NetworkSpec spec;
    spec.input_dim = input_dim;
    spec.hidden_dims = hidden_dims;
    spec.feature_dim = feature_dim;
    spec.num_classes = num_classes;
    spec.init_seed = stream_seed(seed, "init");
    return spec;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t = train;
    t.seed = seed;
    return t;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    std::istringstream in(text);
    std::size_t lineno = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            cfg.set(key, value);
        } catch (const Error& e) {
            throw config_error("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    auto resolve = [&](std::optional<std::filesystem::path>& p) {
        if (p && p->is_relative() && !base_dir.empty()) p = base_dir / *p;
    };
    resolve(cfg.cube);
    resolve(cfg.compare_predictions);
    resolve(cfg.palette);
    resolve(cfg.out);
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.parent_path());
}

}  // namespace dmem
