#pragma once

#include <array>
#include <vector>

namespace nafem {

/// Quadrature on the reference simplex. Points are barycentric coordinates
/// (lambda_0, lambda_1[, lambda_2]); weights sum to one, so the physical weight
/// is weight * element measure.
struct QuadratureRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Assembly rules: 2-point Gauss on intervals, edge-midpoint rule on triangles
/// (both exact for quadratics; Gauss is exact for cubics).
const QuadratureRule& assembly_rule(int dim);

/// Higher-order rules used for error norms: 5-point Gauss (degree 9) on intervals,
/// 7-point Dunavant (degree 5) on triangles.
const QuadratureRule& accurate_rule(int dim);

}  // namespace nafem
