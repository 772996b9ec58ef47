#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmem {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { Input, Numeric, Config };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error input_error(const std::string& what) { return {ErrorKind::Input, what}; }
inline Error numeric_error(const std::string& what) { return {ErrorKind::Numeric, what}; }
inline Error config_error(const std::string& what) { return {ErrorKind::Config, what}; }

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

// Class / sub-class pair attached to a training sample. Both ids are 1-based.
struct SubclassTag {
    int class_id = 0;
    int subclass_id = 0;

    auto operator<=>(const SubclassTag&) const = default;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

// Number of worker threads for data-parallel loops. Reads MANIFOLD_EMBED_THREADS
// (0 or unset = hardware concurrency).
unsigned worker_threads();

// Runs fn(i) for i in [0, n). Each index must write only its own output slot.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn);

}  // namespace dmem

#include "dmem/detail/parallel.hpp"
