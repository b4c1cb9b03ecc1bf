#include "nafem/analytic.hpp"

#include "nafem/errors.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace nafem {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

SmoothFunction sine_mode(int dim) {
    SmoothFunction f;
    if (dim == 1) {
        f.name = "sin(pi x)";
        f.value = [](double, const Point& p) { return std::sin(kPi * p.x()); };
        f.gradient = [](double, const Point& p) {
            return Eigen::Vector2d(kPi * std::cos(kPi * p.x()), 0.0);
        };
        f.hessian = [](double, const Point& p) {
            Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
            h(0, 0) = -kPi * kPi * std::sin(kPi * p.x());
            return h;
        };
    } else if (dim == 2) {
        f.name = "sin(pi x) sin(pi y)";
        f.value = [](double, const Point& p) {
            return std::sin(kPi * p.x()) * std::sin(kPi * p.y());
        };
        f.gradient = [](double, const Point& p) {
            const double sx = std::sin(kPi * p.x()), cx = std::cos(kPi * p.x());
            const double sy = std::sin(kPi * p.y()), cy = std::cos(kPi * p.y());
            return Eigen::Vector2d(kPi * cx * sy, kPi * sx * cy);
        };
        f.hessian = [](double, const Point& p) {
            const double sx = std::sin(kPi * p.x()), cx = std::cos(kPi * p.x());
            const double sy = std::sin(kPi * p.y()), cy = std::cos(kPi * p.y());
            Eigen::Matrix2d h;
            h << -kPi * kPi * sx * sy, kPi * kPi * cx * cy, kPi * kPi * cx * cy,
                -kPi * kPi * sx * sy;
            return h;
        };
    } else {
        throw ConfigError("dimension must be 1 or 2");
    }
    f.time_derivative = [](double, const Point&) { return 0.0; };
    return f;
}

SmoothFunction decaying_sine_mode(int dim) {
    const SmoothFunction base = sine_mode(dim);
    SmoothFunction f;
    f.name = "exp(-t) " + base.name;
    f.value = [base](double t, const Point& p) { return std::exp(-t) * base.value(t, p); };
    f.gradient = [base](double t, const Point& p) {
        return Eigen::Vector2d(std::exp(-t) * base.gradient(t, p));
    };
    f.hessian = [base](double t, const Point& p) {
        return Eigen::Matrix2d(std::exp(-t) * base.hessian(t, p));
    };
    f.time_derivative = [base](double t, const Point& p) {
        return -std::exp(-t) * base.value(t, p);
    };
    return f;
}

double apply_operator(const CoefficientField& field, const SmoothFunction& v, double t,
                      const Point& x) {
    const Eigen::Matrix2d q = field.diffusion_at(t, x);
    const Eigen::Vector2d div_q = field.diffusion_divergence(t, x);
    const Eigen::Vector2d grad = v.gradient(t, x);
    const Eigen::Matrix2d hess = v.hessian(t, x);
    double result = div_q.dot(grad);
    for (int i = 0; i < field.dim; ++i) {
        for (int j = 0; j < field.dim; ++j) {
            result += q(i, j) * hess(i, j);
        }
    }
    result -= field.advection_at(t, x).dot(grad);
    result += field.reaction_at(t, x) * v.value(t, x);
    return result;
}

SpaceTimeFunction manufactured_source(const CoefficientField& field, const SmoothFunction& u,
                                      std::function<double(double, double)> nonlinearity) {
    return [field, u, phi = std::move(nonlinearity)](double t, const Point& x) {
        const double value = u.value(t, x);
        double f = u.time_derivative(t, x) - apply_operator(field, u, t, x);
        if (phi) {
            f -= phi(t, value);
        }
        return f;
    };
}

}  // namespace nafem
