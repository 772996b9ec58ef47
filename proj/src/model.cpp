#include "dmem/model.hpp"
#include "dmem/rng.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dmem {

namespace {

constexpr std::string_view kCheckpointMagic = "DMEMCKPT";
constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::size_t> layer_widths(const NetworkSpec& spec) {
    std::vector<std::size_t> widths{spec.input_dim};
    widths.insert(widths.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
    widths.push_back(spec.feature_dim);
    return widths;
}

DenseLayer make_layer(std::size_t in, std::size_t out) { return {Matrix(out, in), std::vector<double>(out, 0.0)}; }

// out = x W^T + b
Matrix affine(const Matrix& x, const DenseLayer& layer) {
    Matrix out(x.rows, layer.out_dim());
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto xi = x.row(i);
        for (std::size_t o = 0; o < layer.out_dim(); ++o) {
            const auto w = layer.weight.row(o);
            double acc = layer.bias[o];
            for (std::size_t k = 0; k < xi.size(); ++k) acc += w[k] * xi[k];
            out(i, o) = acc;
        }
    }
    return out;
}

// Accumulates dW = g^T x, db = sum g and returns g W.
Matrix affine_backward(const Matrix& x, const Matrix& g, const DenseLayer& layer, DenseLayer& grad,
                       bool need_input_grad) {
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto xi = x.row(i);
        for (std::size_t o = 0; o < layer.out_dim(); ++o) {
            const double go = g(i, o);
            if (go == 0.0) continue;
            auto dw = grad.weight.row(o);
            for (std::size_t k = 0; k < xi.size(); ++k) dw[k] += go * xi[k];
            grad.bias[o] += go;
        }
    }
    Matrix dx;
    if (!need_input_grad) return dx;
    dx = Matrix(x.rows, layer.in_dim());
    for (std::size_t i = 0; i < x.rows; ++i) {
        auto di = dx.row(i);
        for (std::size_t o = 0; o < layer.out_dim(); ++o) {
            const double go = g(i, o);
            if (go == 0.0) continue;
            const auto w = layer.weight.row(o);
            for (std::size_t k = 0; k < di.size(); ++k) di[k] += go * w[k];
        }
    }
    return dx;
}

}  // namespace

void NetworkSpec::validate() const {
    if (input_dim == 0) throw config_error("network input_dim must be positive");
    if (feature_dim == 0) throw config_error("network feature_dim must be positive");
    if (num_classes == 0) throw config_error("network num_classes must be positive");
    for (auto h : hidden_dims)
        if (h == 0) throw config_error("hidden layer widths must be positive");
    if (activation != "relu") throw config_error("unsupported activation '" + activation + "'");
}

std::string NetworkSpec::serialize() const {
    std::ostringstream out;
    out << "input_dim=" << input_dim << '\n' << "hidden_dims=";
    for (std::size_t i = 0; i < hidden_dims.size(); ++i) out << (i ? "," : "") << hidden_dims[i];
    out << '\n'
        << "feature_dim=" << feature_dim << '\n'
        << "num_classes=" << num_classes << '\n'
        << "activation=" << activation << '\n'
        << "init_seed=" << init_seed << '\n';
    return out.str();
}

NetworkSpec NetworkSpec::parse(const std::string& text) {
    NetworkSpec spec;
    spec.hidden_dims.clear();
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw input_error("network spec: malformed line '" + line + "'");
        const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        try {
            if (key == "input_dim") spec.input_dim = std::stoull(value);
            else if (key == "feature_dim") spec.feature_dim = std::stoull(value);
            else if (key == "num_classes") spec.num_classes = std::stoull(value);
            else if (key == "activation") spec.activation = value;
            else if (key == "init_seed") spec.init_seed = std::stoull(value);
            else if (key == "hidden_dims") {
                std::istringstream dims(value);
                for (std::string d; std::getline(dims, d, ',');)
                    if (!d.empty()) spec.hidden_dims.push_back(std::stoull(d));
            } else {
                throw input_error("network spec: unknown key '" + key + "'");
            }
        } catch (const std::logic_error&) {
            throw input_error("network spec: bad value for '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors()) n += t.size();
    return n;
}

std::vector<std::span<double>> ModelParams::tensors() {
    std::vector<std::span<double>> out;
    for (auto& l : layers) {
        out.emplace_back(l.weight.data);
        out.emplace_back(l.bias);
    }
    out.emplace_back(head.weight.data);
    out.emplace_back(head.bias);
    return out;
}

std::vector<std::span<const double>> ModelParams::tensors() const {
    std::vector<std::span<const double>> out;
    for (const auto& l : layers) {
        out.emplace_back(l.weight.data);
        out.emplace_back(l.bias);
    }
    out.emplace_back(head.weight.data);
    out.emplace_back(head.bias);
    return out;
}

std::size_t parameter_count(const NetworkSpec& spec) {
    const auto widths = layer_widths(spec);
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) n += widths[l] * widths[l + 1] + widths[l + 1];
    return n + spec.num_classes * spec.feature_dim + spec.num_classes;
}

ModelParams init_params(const NetworkSpec& spec) {
    spec.validate();
    Rng rng(spec.init_seed);
    ModelParams params;
    params.spec = spec;
    const auto widths = layer_widths(spec);
    auto fill = [&rng](DenseLayer& layer) {
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
        for (auto& w : layer.weight.data) w = rng.uniform(-bound, bound);
    };
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        params.layers.push_back(make_layer(widths[l], widths[l + 1]));
        fill(params.layers.back());
    }
    params.head = make_layer(spec.feature_dim, spec.num_classes);
    fill(params.head);
    return params;
}

ModelParams zeros_like(const ModelParams& params) {
    ModelParams z = params;
    for (auto t : z.tensors()) std::fill(t.begin(), t.end(), 0.0);
    return z;
}

ForwardTrace forward(const ModelParams& params, const Matrix& inputs) {
    if (inputs.cols != params.spec.input_dim)
        throw input_error("input dimension " + std::to_string(inputs.cols) +
                          " does not match network input_dim " + std::to_string(params.spec.input_dim));
    ForwardTrace trace;
    trace.input = inputs;
    const Matrix* x = &trace.input;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        trace.pre.push_back(affine(*x, params.layers[l]));
        Matrix a = trace.pre.back();
        if (l + 1 < params.layers.size())
            for (auto& v : a.data) v = std::max(0.0, v);
        trace.act.push_back(std::move(a));
        x = &trace.act.back();
    }
    trace.logits = affine(trace.features(), params.head);
    return trace;
}

std::vector<double> softmax(std::span<const double> logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        p[c] = std::exp(logits[c] - top);
        z += p[c];
    }
    for (auto& v : p) v /= z;
    return p;
}

SoftmaxResult softmax_ce(std::span<const double> logits, int label) {
    if (label < 1 || static_cast<std::size_t>(label) > logits.size())
        throw input_error("label " + std::to_string(label) + " outside 1.." + std::to_string(logits.size()));
    const double top = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double v : logits) z += std::exp(v - top);
    const double log_z = top + std::log(z);

    SoftmaxResult r;
    r.loss = log_z - logits[static_cast<std::size_t>(label - 1)];
    r.dlogits.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) r.dlogits[c] = std::exp(logits[c] - log_z);
    r.dlogits[static_cast<std::size_t>(label - 1)] -= 1.0;
    return r;
}

BatchCrossEntropy softmax_ce_batch(const Matrix& logits, const std::vector<int>& labels) {
    if (labels.size() != logits.rows) throw input_error("label count does not match logits rows");
    BatchCrossEntropy out;
    out.dlogits = Matrix(logits.rows, logits.cols);
    if (logits.rows == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const auto r = softmax_ce(logits.row(i), labels[i]);
        out.mean_loss += r.loss;
        for (std::size_t c = 0; c < logits.cols; ++c) out.dlogits(i, c) = r.dlogits[c] * inv_n;
    }
    out.mean_loss *= inv_n;
    return out;
}

ModelParams backward(const ModelParams& params, const ForwardTrace& trace, const Matrix& dfeatures,
                     const Matrix& dlogits) {
    const std::size_t n = trace.input.rows;
    if (dlogits.rows != n || dlogits.cols != params.spec.num_classes)
        throw input_error("backward: dlogits shape mismatch");
    if (dfeatures.rows != n || dfeatures.cols != params.spec.feature_dim)
        throw input_error("backward: dfeatures shape mismatch");
    if (trace.act.size() != params.layers.size())
        throw input_error("backward: trace does not match network depth");

    ModelParams grads = zeros_like(params);
    Matrix g = affine_backward(trace.features(), dlogits, params.head, grads.head, true);
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += dfeatures.data[i];

    for (std::size_t l = params.layers.size(); l-- > 0;) {
        if (l + 1 < params.layers.size()) {
            const Matrix& pre = trace.pre[l];
            for (std::size_t i = 0; i < g.data.size(); ++i)
                if (!(pre.data[i] > 0.0)) g.data[i] = 0.0;
        }
        const Matrix& x = l == 0 ? trace.input : trace.act[l - 1];
        g = affine_backward(x, g, params.layers[l], grads.layers[l], l > 0);
    }
    return grads;
}

void sgd_step(ModelParams& params, const ModelParams& grads, double lr) {
    auto p = params.tensors();
    const auto g = grads.tensors();
    if (p.size() != g.size()) throw input_error("sgd_step: parameter/gradient shape mismatch");
    for (std::size_t t = 0; t < p.size(); ++t) {
        if (p[t].size() != g[t].size()) throw input_error("sgd_step: parameter/gradient shape mismatch");
        for (std::size_t i = 0; i < p[t].size(); ++i) p[t][i] -= lr * g[t][i];
    }
}

double l2_norm(const ModelParams& grads) {
    double acc = 0.0;
    for (const auto& t : grads.tensors())
        for (double v : t) acc += v * v;
    return std::sqrt(acc);
}

std::vector<int> predict(const ModelParams& params, const Matrix& inputs) {
    const auto trace = forward(params, inputs);
    std::vector<int> out(inputs.rows);
    for (std::size_t i = 0; i < inputs.rows; ++i) {
        const auto row = trace.logits.row(i);
        out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()) + 1;
    }
    return out;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
    io::Writer out;
    out.bytes(kCheckpointMagic);
    out.u32(kCheckpointVersion);
    const std::string spec = params.spec.serialize();
    out.u32(static_cast<std::uint32_t>(spec.size()));
    out.bytes(spec);
    for (const auto& t : params.tensors())
        for (double v : t) out.f64(v);
    out.save(path);
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw input_error("no such checkpoint: " + path.string());
    const auto data = io::read_file(path);
    io::Reader in(data, "checkpoint " + path.string());
    if (in.bytes(kCheckpointMagic.size()) != kCheckpointMagic)
        throw input_error(path.string() + ": not a checkpoint (bad magic)");
    const auto version = in.u32();
    if (version != kCheckpointVersion)
        throw input_error(path.string() + ": unsupported checkpoint version " + std::to_string(version));
    const auto spec_len = in.u32();
    const auto spec = NetworkSpec::parse(in.bytes(spec_len));

    ModelParams params = init_params(spec);
    if (in.remaining() != params.parameter_count() * 8)
        throw input_error(path.string() + ": parameter payload size mismatch");
    for (auto t : params.tensors())
        for (auto& v : t) v = in.f64();
    return params;
}

}  // namespace dmem
