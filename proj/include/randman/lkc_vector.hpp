#pragma once

#include <cstddef>
#include <vector>

namespace randman {

/// Lipschitz-Killing curvatures L_0, ..., L_m.
struct LKCVector {
    std::vector<double> values;

    LKCVector() = default;
    explicit LKCVector(std::vector<double> v) : values(std::move(v)) {}

    std::size_t size() const { return values.size(); }
    int dim() const { return static_cast<int>(values.size()) - 1; }
    double operator[](std::size_t j) const { return values[j]; }
    double& operator[](std::size_t j) { return values[j]; }
};

}  // namespace randman
