#pragma once

#include "randman/atlas.hpp"
#include "randman/gp_model.hpp"

#include <vector>

namespace randman {

struct ZeroCountOptions {
    int grid = 128;           ///< sign-grid cells per axis per chart
    int max_newton = 50;
    double residual_tol = 1e-10;
    double dedupe_tol = 1e-6;  ///< ambient distance under which two roots coincide
};

struct ZeroCountResult {
    int count = 0;
    /// Candidate cells where Newton failed even after one subdivision although
    /// the linearized root lies within a cell of the center.
    int flagged_cells = 0;
    std::vector<ChartPoint> roots;
};

/**
 * Common zeros of two fields on a 2-manifold. Cells of a sign grid where both
 * fields change sign seed a damped Newton iteration; converged roots are
 * merged by ambient position.
 */
ZeroCountResult count_common_zeros(const GPSample& f1, const GPSample& f2,
                                   const ManifoldAtlas& atlas, const ZeroCountOptions& opts = {});

}  // namespace randman
