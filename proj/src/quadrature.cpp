#include "nafem/quadrature.hpp"

#include <cmath>

namespace nafem {

namespace {

QuadratureRule gauss_interval(const std::vector<double>& nodes, const std::vector<double>& weights) {
    // nodes/weights on [-1, 1]
    QuadratureRule rule;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double s = 0.5 * (nodes[k] + 1.0);
        rule.points.push_back({1.0 - s, s, 0.0});
        rule.weights.push_back(0.5 * weights[k]);
    }
    return rule;
}

QuadratureRule make_gauss2() {
    const double a = 1.0 / std::sqrt(3.0);
    return gauss_interval({-a, a}, {1.0, 1.0});
}

QuadratureRule make_gauss5() {
    const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
    const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    return gauss_interval({-b, -a, 0.0, a, b}, {wb, wa, 128.0 / 225.0, wa, wb});
}

QuadratureRule make_edge_midpoint() {
    QuadratureRule rule;
    rule.points = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
    rule.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return rule;
}

QuadratureRule make_dunavant7() {
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0;
    const double b1 = (9.0 + 2.0 * s15) / 21.0;
    const double w1 = (155.0 - s15) / 1200.0;
    const double a2 = (6.0 + s15) / 21.0;
    const double b2 = (9.0 - 2.0 * s15) / 21.0;
    const double w2 = (155.0 + s15) / 1200.0;
    QuadratureRule rule;
    rule.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                   {a1, a1, b1}, {a1, b1, a1}, {b1, a1, a1},
                   {a2, a2, b2}, {a2, b2, a2}, {b2, a2, a2}};
    rule.weights = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
    return rule;
}

}  // namespace

const QuadratureRule& assembly_rule(int dim) {
    static const QuadratureRule gauss2 = make_gauss2();
    static const QuadratureRule midpoint = make_edge_midpoint();
    return dim == 1 ? gauss2 : midpoint;
}

const QuadratureRule& accurate_rule(int dim) {
    static const QuadratureRule gauss5 = make_gauss5();
    static const QuadratureRule dunavant = make_dunavant7();
    return dim == 1 ? gauss5 : dunavant;
}

}  // namespace nafem
