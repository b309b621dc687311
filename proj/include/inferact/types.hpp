#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace inferact {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One multi-modality observation: an index per observation channel.
struct Observation {
    std::vector<int> indices;

    Observation() = default;
    explicit Observation(std::vector<int> idx) : indices(std::move(idx)) {}

    int num_modalities() const { return static_cast<int>(indices.size()); }
    int operator[](int m) const { return indices[static_cast<std::size_t>(m)]; }
};

/// Factorized posterior: one categorical distribution per hidden state factor.
struct BeliefState {
    std::vector<Vector> factors;

    BeliefState() = default;
    explicit BeliefState(std::vector<Vector> f) : factors(std::move(f)) {}

    int num_factors() const { return static_cast<int>(factors.size()); }
    const Vector& operator[](int f) const { return factors[static_cast<std::size_t>(f)]; }
    Vector& operator[](int f) { return factors[static_cast<std::size_t>(f)]; }
};

/// Dense rank-N array stored flat in row-major order (last axis fastest).
struct DenseTensor {
    std::vector<int> shape;
    Vector data;

    Eigen::Index size() const { return data.size(); }

    double at(std::initializer_list<int> idx) const {
        if (static_cast<std::size_t>(idx.size()) != shape.size())
            throw std::invalid_argument("DenseTensor::at: rank mismatch");
        Eigen::Index flat = 0;
        auto it = idx.begin();
        for (std::size_t d = 0; d < shape.size(); ++d, ++it) {
            if (*it < 0 || *it >= shape[d])
                throw std::out_of_range("DenseTensor::at: index out of range");
            flat = flat * shape[d] + *it;
        }
        return data[flat];
    }
};

}  // namespace inferact
