#include "dmem/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace dmem {

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
    const std::size_t n = cm.num_classes;
    const double total = static_cast<double>(cm.total());
    if (total == 0) throw input_error("metrics: no evaluated samples");

    Metrics m;
    m.confusion = cm;
    m.per_class.assign(n, std::numeric_limits<double>::quiet_NaN());
    double trace = 0.0, expected = 0.0, recall_sum = 0.0;
    std::size_t supported = 0;
    for (std::size_t c = 0; c < n; ++c) {
        double row = 0.0, col = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            row += static_cast<double>(cm.at(c, k));
            col += static_cast<double>(cm.at(k, c));
        }
        trace += static_cast<double>(cm.at(c, c));
        expected += (row / total) * (col / total);
        if (row > 0) {
            m.per_class[c] = static_cast<double>(cm.at(c, c)) / row;
            recall_sum += m.per_class[c];
            ++supported;
        }
    }
    m.overall_accuracy = trace / total;
    m.average_accuracy = recall_sum / static_cast<double>(supported);
    // expected == 1 only when truth and predictions are one identical constant class
    m.kappa = expected < 1.0 ? (m.overall_accuracy - expected) / (1.0 - expected) : 1.0;
    return m;
}

Metrics metrics(const std::vector<int>& preds, const std::vector<int>& labels, std::size_t num_classes) {
    if (preds.size() != labels.size()) throw input_error("metrics: predictions and labels differ in length");
    if (labels.empty()) throw input_error("metrics: empty input");
    if (num_classes == 0) {
        const int top = std::max(*std::max_element(labels.begin(), labels.end()),
                                 *std::max_element(preds.begin(), preds.end()));
        num_classes = static_cast<std::size_t>(std::max(top, 1));
    }
    ConfusionMatrix cm(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 1 || static_cast<std::size_t>(labels[i]) > num_classes ||
            preds[i] < 1 || static_cast<std::size_t>(preds[i]) > num_classes)
            throw input_error("metrics: label outside 1.." + std::to_string(num_classes));
        ++cm.at(static_cast<std::size_t>(labels[i] - 1), static_cast<std::size_t>(preds[i] - 1));
    }
    return metrics_from_confusion(cm);
}

namespace {

std::string class_name(const std::vector<std::string>& names, std::size_t c) {
    return c + 1 < names.size() && !names[c + 1].empty() ? names[c + 1] : "class_" + std::to_string(c + 1);
}

}  // namespace

std::string metrics_csv(const Metrics& m, const std::vector<std::string>& class_names) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "metric,value\n"
        << "OA," << m.overall_accuracy << '\n'
        << "AA," << m.average_accuracy << '\n'
        << "Kappa," << m.kappa << '\n';
    for (std::size_t c = 0; c < m.per_class.size(); ++c)
        out << class_name(class_names, c) << ',' << m.per_class[c] << '\n';
    return out.str();
}

std::string metrics_table(const Metrics& m, const std::vector<std::string>& class_names) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    for (std::size_t c = 0; c < m.per_class.size(); ++c) {
        std::size_t support = 0;
        for (std::size_t k = 0; k < m.confusion.num_classes; ++k) support += m.confusion.at(c, k);
        out << std::left << std::setw(24) << class_name(class_names, c) << std::right << std::setw(8)
            << (std::isnan(m.per_class[c]) ? 0.0 : 100.0 * m.per_class[c]) << " %  (n=" << support << ")\n";
    }
    out << std::left << std::setw(24) << "OA" << std::right << std::setw(8) << 100.0 * m.overall_accuracy << " %\n"
        << std::left << std::setw(24) << "AA" << std::right << std::setw(8) << 100.0 * m.average_accuracy << " %\n"
        << std::left << std::setw(24) << "Kappa" << std::right << std::setw(8) << std::setprecision(4) << m.kappa
        << '\n';
    return out.str();
}

McNemarResult mcnemar_from_counts(std::size_t f_ij, std::size_t f_ji) {
    McNemarResult r;
    r.f_ij = f_ij;
    r.f_ji = f_ji;
    const double denom = static_cast<double>(f_ij + f_ji);
    if (denom > 0) {
        r.statistic = (static_cast<double>(f_ij) - static_cast<double>(f_ji)) / std::sqrt(denom);
        r.significant = std::abs(r.statistic) > 1.96;
    }
    return r;
}

McNemarResult mcnemar(const std::vector<int>& preds_i, const std::vector<int>& preds_j,
                      const std::vector<int>& labels) {
    if (preds_i.size() != labels.size() || preds_j.size() != labels.size())
        throw input_error("mcnemar: prediction vectors and labels differ in length");
    std::size_t f_ij = 0, f_ji = 0;
    for (std::size_t s = 0; s < labels.size(); ++s) {
        const bool ok_i = preds_i[s] == labels[s];
        const bool ok_j = preds_j[s] == labels[s];
        if (ok_i && !ok_j) ++f_ij;
        if (ok_j && !ok_i) ++f_ji;
    }
    return mcnemar_from_counts(f_ij, f_ji);
}

std::vector<Rgb> default_palette(std::size_t n) {
    static constexpr Rgb base[] = {
        {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},  {245, 130, 48},
        {145, 30, 180}, {70, 240, 240},  {240, 50, 230}, {210, 245, 60}, {250, 190, 212},
        {0, 128, 128},  {220, 190, 255}, {170, 110, 40}, {255, 250, 200}, {128, 0, 0},
        {170, 255, 195}, {128, 128, 0},  {255, 215, 180}, {0, 0, 128},   {128, 128, 128}};
    std::vector<Rgb> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(base[i % std::size(base)]);
    return out;
}

std::vector<Rgb> load_palette(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open palette: " + path.string());
    std::vector<Rgb> out;
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        int r, g, b;
        if (!(ss >> r >> g >> b) || r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
            throw input_error(path.string() + ":" + std::to_string(lineno) + ": expected 'R G B' in 0..255");
        out.push_back({static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)});
    }
    return out;
}

std::string classification_map(const HyperCube& cube, const std::vector<int>& preds,
                               const std::vector<Rgb>& palette) {
    if (preds.size() != cube.labelled_count())
        throw input_error("classification map: " + std::to_string(preds.size()) + " predictions for " +
                          std::to_string(cube.labelled_count()) + " labelled pixels");
    int top = 0;
    for (int p : preds) top = std::max(top, p);
    const std::size_t needed = std::max<std::size_t>(cube.num_classes, static_cast<std::size_t>(top));
    if (palette.size() < needed)
        throw input_error("palette has " + std::to_string(palette.size()) + " colours, need " +
                          std::to_string(needed));

    std::string out = "P6\n" + std::to_string(cube.width) + " " + std::to_string(cube.height) + "\n255\n";
    out.reserve(out.size() + static_cast<std::size_t>(cube.width) * cube.height * 3);
    std::size_t next = 0;
    for (auto label : cube.labels) {
        Rgb px{0, 0, 0};
        if (label != 0) {
            const int p = preds[next++];
            if (p < 1) throw input_error("classification map: prediction must be a class id >= 1");
            px = palette[static_cast<std::size_t>(p - 1)];
        }
        out.append(reinterpret_cast<const char*>(px.data()), 3);
    }
    return out;
}

void save_classification_map(const HyperCube& cube, const std::vector<int>& preds,
                             const std::vector<Rgb>& palette, const std::filesystem::path& path) {
    const auto bytes = classification_map(cube, preds, palette);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace dmem
