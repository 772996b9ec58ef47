#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmem/loss.hpp"
#include "dmem/model.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>

using namespace dmem;

namespace {

NetworkSpec small_spec(std::size_t in, std::vector<std::size_t> hidden, std::size_t p, std::size_t classes,
                       std::uint64_t seed = 1) {
    NetworkSpec s;
    s.input_dim = in;
    s.hidden_dims = std::move(hidden);
    s.feature_dim = p;
    s.num_classes = classes;
    s.init_seed = seed;
    return s;
}

}  // namespace

TEST_CASE("initialization is deterministic and bounded") {
    const auto spec = small_spec(5, {7, 3}, 4, 3, 42);
    const auto a = init_params(spec);
    const auto b = init_params(spec);
    CHECK(a == b);
    CHECK_FALSE(a == init_params(small_spec(5, {7, 3}, 4, 3, 43)));
    for (const auto& l : a.layers) {
        const double bound = std::sqrt(6.0 / static_cast<double>(l.in_dim() + l.out_dim()));
        for (double w : l.weight.data) CHECK(std::abs(w) <= bound);
        for (double v : l.bias) CHECK(v == 0.0);
    }
    for (double v : a.head.bias) CHECK(v == 0.0);
}

TEST_CASE("parameter counts follow the shapes") {
    // 4*256+256 + 256*128+128 + 128*2+2 + 2*2+2
    CHECK(parameter_count(small_spec(4, {256, 128}, 2, 2)) == 34440);
    CHECK(init_params(small_spec(4, {256, 128}, 2, 2)).parameter_count() == 34440);
    const auto linear = init_params(small_spec(6, {}, 3, 2));
    REQUIRE(linear.layers.size() == 1);
    CHECK(linear.layers[0].in_dim() == 6);
    CHECK(linear.layers[0].out_dim() == 3);
    CHECK(linear.parameter_count() == 6 * 3 + 3 + 3 * 2 + 2);
}

TEST_CASE("spec validation and text round trip") {
    auto spec = small_spec(8, {16, 4}, 3, 5, 99);
    CHECK(NetworkSpec::parse(spec.serialize()) == spec);
    spec.activation = "tanh";
    CHECK_THROWS_AS(spec.validate(), Error);
    CHECK_THROWS_AS(small_spec(0, {}, 3, 2).validate(), Error);
    CHECK_THROWS_AS(small_spec(3, {0}, 3, 2).validate(), Error);
}

TEST_CASE("zero parameters give zero features and uniform softmax") {
    auto params = zeros_like(init_params(small_spec(3, {5}, 2, 4)));
    std::mt19937_64 gen(1);
    const auto x = oracle::random_matrix(3, 3, gen);
    const auto t = forward(params, x);
    for (double v : t.features().data) CHECK(v == 0.0);
    for (double v : t.logits.data) CHECK(v == 0.0);
    for (double p : softmax(t.logits.row(0))) CHECK(p == doctest::Approx(0.25));
}

TEST_CASE("identity single layer passes inputs through") {
    auto params = init_params(small_spec(3, {}, 3, 2));
    auto& w = params.layers[0].weight;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) w(i, j) = i == j ? 1.0 : 0.0;
    std::mt19937_64 gen(2);
    const auto x = oracle::random_matrix(4, 3, gen);
    CHECK(forward(params, x).features() == x);
}

TEST_CASE("forward matches the straight-line reference") {
    std::mt19937_64 gen(3);
    for (int t = 0; t < 20; ++t) {
        auto params = init_params(small_spec(1 + gen() % 6, {1 + gen() % 9, 1 + gen() % 5}, 1 + gen() % 4, 2 + gen() % 3, gen()));
        for (auto tensor : params.tensors())
            for (auto& v : tensor) v = std::uniform_real_distribution<double>(-1, 1)(gen);
        const auto x = oracle::random_matrix(5, params.spec.input_dim, gen);
        const auto trace = forward(params, x);
        const auto ref = oracle::reference_logits(params, x);
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t c = 0; c < ref[r].size(); ++c)
                CHECK(trace.logits(r, c) == doctest::Approx(ref[r][c]).epsilon(1e-12));
        CHECK(forward(params, x).logits == trace.logits);
    }
    auto params = init_params(small_spec(3, {2}, 2, 2));
    CHECK_THROWS_AS(forward(params, Matrix(1, 4)), Error);
}

TEST_CASE("softmax cross-entropy") {
    const std::vector<double> uniform(4, 0.3);
    CHECK(softmax_ce(uniform, 2).loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));

    double prev = std::numeric_limits<double>::infinity();
    for (double m : {0.0, 1.0, 5.0, 20.0, 30.0}) {
        const std::vector<double> logits{m, 0.0, 0.0};
        const double loss = softmax_ce(logits, 1).loss;
        CHECK(loss < prev);
        CHECK(loss > 0.0);
        prev = loss;
    }
    // past double resolution the loss is exactly zero, never negative
    for (double m : {100.0, 1000.0, 1e300}) {
        const std::vector<double> logits{m, 0.0, 0.0};
        CHECK(softmax_ce(logits, 1).loss == 0.0);
    }

    std::mt19937_64 gen(4);
    for (int t = 0; t < 30; ++t) {
        std::vector<double> logits(2 + gen() % 5);
        for (auto& v : logits) v = std::uniform_real_distribution<double>(-5, 5)(gen);
        const int label = 1 + static_cast<int>(gen() % logits.size());
        const auto r = softmax_ce(logits, label);
        for (std::size_t c = 0; c < logits.size(); ++c) {
            const double num = oracle::central_difference([&] { return softmax_ce(logits, label).loss; }, logits[c], 1e-5);
            CHECK(oracle::relative_error(r.dlogits[c], num) < 1e-6);
        }
        double sum = 0.0;
        for (double p : softmax(logits)) sum += p;
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    const std::vector<double> huge{1e300, -1e300, 0.0};
    double sum = 0.0;
    for (double p : softmax(huge)) sum += p;
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK_THROWS_AS(softmax_ce(uniform, 5), Error);
    CHECK_THROWS_AS(softmax_ce(uniform, 0), Error);
}

TEST_CASE("backward: zero upstream gives zero gradients") {
    auto params = init_params(small_spec(4, {6}, 3, 2));
    std::mt19937_64 gen(5);
    const auto x = oracle::random_matrix(3, 4, gen);
    const auto g = backward(params, forward(params, x), Matrix(3, 3), Matrix(3, 2));
    for (const auto& t : g.tensors())
        for (double v : t) CHECK(v == 0.0);
}

TEST_CASE("backward: single linear layer gradient by hand") {
    // features f = W x + b, logits z = H f + c; dL/dW = (H^T dz) x^T
    auto params = init_params(small_spec(2, {}, 2, 2));
    params.layers[0].weight.data = {1.0, 2.0, 3.0, 4.0};
    params.head.weight.data = {1.0, 0.0, 0.0, 1.0};
    Matrix x(1, 2);
    x.data = {0.5, -1.0};
    Matrix dz(1, 2);
    dz.data = {0.25, -0.75};
    const auto g = backward(params, forward(params, x), Matrix(1, 2), dz);
    CHECK(g.layers[0].weight.data == std::vector<double>{0.125, -0.25, -0.375, 0.75});
    CHECK(g.layers[0].bias == std::vector<double>{0.25, -0.75});
    const auto f = forward(params, x).features();  // (-1.5, -2.5)
    CHECK(g.head.weight.data == std::vector<double>{0.25 * f.data[0], 0.25 * f.data[1], -0.75 * f.data[0], -0.75 * f.data[1]});
}

TEST_CASE("end-to-end composed gradient matches central differences") {
    std::mt19937_64 gen(6);
    int checked = 0;
    while (checked < 6) {
        auto params = init_params(small_spec(5, {7, 6}, 3, 3, gen()));
        for (auto t : params.tensors())
            for (auto& v : t) v = std::uniform_real_distribution<double>(-1, 1)(gen);
        const auto x = oracle::random_matrix(6, 5, gen);
        const std::vector<int> labels{1, 2, 3, 1, 2, 3};
        const std::vector<SubclassTag> tags{{1, 1}, {2, 1}, {3, 1}, {1, 1}, {2, 2}, {3, 1}};
        LossParams loss;
        loss.delta = 4.0;
        loss.beta = 0.5;
        const double lambda = 0.3;
        const auto trace = forward(params, x);
        if (!oracle::away_from_kinks(params, x, 1e-6)) continue;
        if (!oracle::hausdorff_terms_smooth(trace.features(), tags, loss.delta, 1e-4)) continue;
        ++checked;

        const auto ce = softmax_ce_batch(trace.logits, labels);
        auto dmem = loss_gradients({trace.features(), tags}, loss);
        for (auto& v : dmem.grads.data) v *= lambda;
        const auto grads = backward(params, trace, dmem.grads, ce.dlogits);

        auto tensors = params.tensors();
        const auto gt = grads.tensors();
        for (std::size_t t = 0; t < tensors.size(); ++t)
            for (std::size_t i = 0; i < tensors[t].size(); ++i) {
                const double num = oracle::central_difference(
                    [&] { return oracle::composed_objective(params, x, labels, tags, lambda, loss); }, tensors[t][i], 1e-5);
                CHECK(oracle::relative_error(gt[t][i], num) < 1e-4);
            }
    }
}

TEST_CASE("sgd_step") {
    auto params = init_params(small_spec(3, {4}, 2, 2, 7));
    const auto before = params;
    auto grads = init_params(small_spec(3, {4}, 2, 2, 8));
    sgd_step(params, grads, 0.0);
    CHECK(params == before);
    sgd_step(params, params, 1.0);
    for (const auto& t : params.tensors())
        for (double v : t) CHECK(v == 0.0);
}

TEST_CASE("gradient descent on a quadratic toy objective decreases it") {
    // objective 0.5 * |features - target|^2 through a linear feature map
    auto params = init_params(small_spec(3, {}, 2, 2, 9));
    std::mt19937_64 gen(10);
    const auto x = oracle::random_matrix(4, 3, gen);
    const auto target = oracle::random_matrix(4, 2, gen);
    auto objective = [&] {
        const auto f = forward(params, x).features();
        double s = 0.0;
        for (std::size_t i = 0; i < f.data.size(); ++i) s += 0.5 * (f.data[i] - target.data[i]) * (f.data[i] - target.data[i]);
        return s;
    };
    double prev = objective();
    for (int step = 0; step < 10; ++step) {
        const auto trace = forward(params, x);
        Matrix df = trace.features();
        for (std::size_t i = 0; i < df.data.size(); ++i) df.data[i] -= target.data[i];
        sgd_step(params, backward(params, trace, df, Matrix(4, 2)), 0.05);
        const double cur = objective();
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("separable two-class toy set reaches low cross-entropy within 500 steps") {
    auto params = init_params(small_spec(2, {8}, 4, 2, 11));
    std::mt19937_64 gen(12);
    Matrix x(40, 2);
    std::vector<int> labels;
    std::normal_distribution<double> g(0.0, 0.3);
    for (std::size_t i = 0; i < 40; ++i) {
        const int cls = i % 2 ? 2 : 1;
        x(i, 0) = (cls == 1 ? -2.0 : 2.0) + g(gen);
        x(i, 1) = g(gen);
        labels.push_back(cls);
    }
    double ce = 0.0;
    for (int step = 0; step < 500; ++step) {
        const auto trace = forward(params, x);
        const auto r = softmax_ce_batch(trace.logits, labels);
        ce = r.mean_loss;
        sgd_step(params, backward(params, trace, Matrix(40, 4), r.dlogits), 0.1);
    }
    CHECK(ce < 0.01);
    CHECK(predict(params, x) == labels);
}

TEST_CASE("checkpoint round trip is bitwise stable") {
    testutil::TempDir dir("ckpt");
    auto params = init_params(small_spec(5, {6, 4}, 3, 2, 13));
    params.head.bias[1] = 0.1;
    save_checkpoint(params, dir / "a.bin");
    const auto loaded = load_checkpoint(dir / "a.bin");
    CHECK(loaded == params);
    save_checkpoint(loaded, dir / "b.bin");
    CHECK(testutil::slurp(dir / "a.bin") == testutil::slurp(dir / "b.bin"));
    CHECK(testutil::slurp(dir / "a.bin").substr(0, 8) == "DMEMCKPT");

    auto bytes = testutil::slurp(dir / "a.bin");
    testutil::spit(dir / "c.bin", bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(load_checkpoint(dir / "c.bin"), Error);
    CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin"), Error);
}
