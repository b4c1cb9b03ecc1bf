#pragma once

#include "nafem/coefficients.hpp"
#include "nafem/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>

namespace nafem {

using SpaceTimeFunction = std::function<double(double t, const Point& x)>;

/// A smooth function of (t, x) with closed-form derivatives. Used as exact
/// solutions, Ritz-projection targets and manufactured data.
struct SmoothFunction {
    std::string name;
    std::function<double(double, const Point&)> value;
    std::function<Eigen::Vector2d(double, const Point&)> gradient;
    std::function<Eigen::Matrix2d(double, const Point&)> hessian;
    std::function<double(double, const Point&)> time_derivative;
};

/// sin(pi x) in 1D, sin(pi x) sin(pi y) in 2D; time independent. Vanishes on the boundary.
SmoothFunction sine_mode(int dim);

/// exp(-t) times sine_mode(dim).
SmoothFunction decaying_sine_mode(int dim);

/// (A(t)v)(x) = sum_ij d_i(q_ij d_j v) - sum_j q_j d_j v + q_0 v.
double apply_operator(const CoefficientField& field, const SmoothFunction& v, double t,
                      const Point& x);

/// Manufactured forcing f = u_t - A(t)u - phi(u) so that u solves u_t = A(t)u + phi(u) + f.
SpaceTimeFunction manufactured_source(const CoefficientField& field, const SmoothFunction& u,
                                      std::function<double(double, double)> nonlinearity);

}  // namespace nafem
