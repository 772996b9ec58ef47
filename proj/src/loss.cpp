#include "dmem/loss.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace dmem {

void FeatureBatch::validate() const {
    if (tags.size() != features.rows)
        throw input_error("feature batch: tag count does not match row count");
    for (double v : features.data)
        if (!std::isfinite(v)) throw numeric_error("feature batch contains non-finite values");
}

void LossParams::validate() const {
    if (!(delta > 0.0)) throw config_error("margin delta must be positive");
    if (!(beta >= 0.0)) throw config_error("tradeoff beta must be non-negative");
}

std::map<SubclassTag, std::vector<std::size_t>> group_by_subclass(const FeatureBatch& batch) {
    std::map<SubclassTag, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < batch.tags.size(); ++i) groups[batch.tags[i]].push_back(i);
    return groups;
}

double subclass_loss(const Matrix& features, std::span<const std::size_t> rows) {
    double total = 0.0;
    for (auto o : rows)
        for (auto i : rows) total += squared_distance(features.row(o), features.row(i));
    return total;
}

double subclass_loss(const Matrix& features) {
    std::vector<std::size_t> rows(features.rows);
    std::iota(rows.begin(), rows.end(), 0);
    return subclass_loss(features, rows);
}

double embedding_loss(const FeatureBatch& batch) {
    double l0 = 0.0;
    for (const auto& [tag, rows] : group_by_subclass(batch))
        if (rows.size() >= 2) l0 += subclass_loss(batch.features, rows);
    return l0;
}

HausdorffWitness hausdorff_witness(const Matrix& features, std::span<const std::size_t> a,
                                   std::span<const std::size_t> b) {
    if (a.empty() || b.empty()) throw input_error("Hausdorff distance of an empty set");
    HausdorffWitness w;
    w.value = -1.0;
    for (auto p : a) {
        double nearest = std::numeric_limits<double>::infinity();
        std::size_t arg = b.front();
        for (auto q : b) {
            const double d = squared_distance(features.row(p), features.row(q));
            if (d < nearest) {
                nearest = d;
                arg = q;
            }
        }
        if (nearest > w.value) {
            w.value = nearest;
            w.outer = p;
            w.inner = arg;
        }
    }
    return w;
}

double hausdorff(const Matrix& features, std::span<const std::size_t> a,
                 std::span<const std::size_t> b) {
    return hausdorff_witness(features, a, b).value;
}

double hausdorff(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw input_error("Hausdorff distance between sets of different dimension");
    Matrix joined(a.rows + b.rows, a.cols);
    std::copy(a.data.begin(), a.data.end(), joined.data.begin());
    std::copy(b.data.begin(), b.data.end(), joined.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
    std::vector<std::size_t> ra(a.rows), rb(b.rows);
    std::iota(ra.begin(), ra.end(), 0);
    std::iota(rb.begin(), rb.end(), a.rows);
    return hausdorff(joined, ra, rb);
}

namespace {

double margin(double x, bool hinge) { return hinge ? std::max(0.0, x) : x; }

bool margin_active(double x, bool hinge) { return !hinge || x > 0.0; }

LossReport evaluate(const FeatureBatch& batch, const LossParams& params, bool with_grads) {
    batch.validate();
    params.validate();
    LossReport report;
    if (with_grads) {
        report.l0_grads = Matrix(batch.size(), batch.dim());
        report.ld_grads = Matrix(batch.size(), batch.dim());
    }
    const Matrix& f = batch.features;
    const auto groups = group_by_subclass(batch);

    // L0 and its gradient: d/d phi_a of sum_{o,i} |phi_o - phi_i|^2 = 4 sum_i (phi_a - phi_i)
    for (const auto& [tag, rows] : groups) {
        if (rows.size() < 2) continue;
        report.l0 += subclass_loss(f, rows);
        if (!with_grads) continue;
        for (auto a : rows) {
            auto g = report.l0_grads.row(a);
            for (auto i : rows) {
                if (i == a) continue;
                for (std::size_t d = 0; d < f.cols; ++d) g[d] += 4.0 * (f(a, d) - f(i, d));
            }
        }
    }

    // Ld over ordered pairs of sub-classes from different classes
    Matrix& ld_grads = report.ld_grads;
    for (const auto& [ta, rows_a] : groups) {
        for (const auto& [tb, rows_b] : groups) {
            if (ta.class_id == tb.class_id) continue;
            const auto w = hausdorff_witness(f, rows_a, rows_b);
            const double slack = params.delta - w.value;
            report.ld += margin(slack, params.hinge);
            if (!with_grads || !margin_active(slack, params.hinge)) continue;
            // d(-|phi_p - phi_q|^2): -2(phi_p - phi_q) on p, +2(phi_p - phi_q) on q
            for (std::size_t d = 0; d < f.cols; ++d) {
                const double diff = f(w.outer, d) - f(w.inner, d);
                ld_grads(w.outer, d) -= 2.0 * diff;
                ld_grads(w.inner, d) += 2.0 * diff;
            }
        }
    }

    report.total = report.l0 + params.beta * report.ld;
    if (with_grads) {
        report.grads = report.l0_grads;
        for (std::size_t i = 0; i < report.grads.data.size(); ++i)
            report.grads.data[i] += params.beta * ld_grads.data[i];
    }
    return report;
}

}  // namespace

double diversity_loss(const FeatureBatch& batch, const LossParams& params) {
    return evaluate(batch, params, false).ld;
}

LossReport total_loss(const FeatureBatch& batch, const LossParams& params) {
    return evaluate(batch, params, false);
}

LossReport loss_gradients(const FeatureBatch& batch, const LossParams& params) {
    return evaluate(batch, params, true);
}

}  // namespace dmem
