#include "nafem/coefficients.hpp"

#include "nafem/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nafem {

BoundarySpec BoundarySpec::robin(double alpha0) {
    if (!std::isfinite(alpha0)) {
        throw ConfigError("Robin boundary requires a finite alpha0");
    }
    return {Kind::Robin, alpha0};
}

Eigen::Matrix2d CoefficientField::diffusion_at(double t, const Point& p) const {
    Eigen::Matrix2d q = Eigen::Matrix2d::Zero();
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            q(i, j) = diffusion[i][j](t, p.x(), p.y());
        }
    }
    return q;
}

Eigen::Vector2d CoefficientField::advection_at(double t, const Point& p) const {
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    for (int j = 0; j < dim; ++j) {
        b(j) = advection[j](t, p.x(), p.y());
    }
    return b;
}

double CoefficientField::reaction_at(double t, const Point& p) const {
    return reaction(t, p.x(), p.y());
}

Eigen::Vector2d CoefficientField::diffusion_divergence(double t, const Point& p) const {
    constexpr double step = 1e-5;
    Eigen::Vector2d div = Eigen::Vector2d::Zero();
    for (int j = 0; j < dim; ++j) {
        for (int i = 0; i < dim; ++i) {
            const Expression& q = diffusion[i][j];
            if (!q.depends_on_space()) {
                continue;
            }
            Point plus = p, minus = p;
            plus(i) += step;
            minus(i) -= step;
            div(j) += (q(t, plus.x(), plus.y()) - q(t, minus.x(), minus.y())) / (2.0 * step);
        }
    }
    return div;
}

bool CoefficientField::is_autonomous() const {
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            if (diffusion[i][j].depends_on_time()) {
                return false;
            }
        }
        if (advection[i].depends_on_time()) {
            return false;
        }
    }
    return !reaction.depends_on_time();
}

bool CoefficientField::diffusion_constant() const {
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            if (!diffusion[i][j].is_constant()) {
                return false;
            }
        }
    }
    return true;
}

bool CoefficientField::advection_constant() const {
    for (int j = 0; j < dim; ++j) {
        if (!advection[j].is_constant()) {
            return false;
        }
    }
    return true;
}

bool CoefficientField::has_advection() const {
    for (int j = 0; j < dim; ++j) {
        if (!advection[j].is_constant() || advection[j](0.0, 0.0, 0.0) != 0.0) {
            return true;
        }
    }
    return false;
}

const std::vector<std::string>& catalog_field_names() {
    static const std::vector<std::string> names{"constant", "drifting", "anisotropic", "advection",
                                                "reaction"};
    return names;
}

namespace {

CoefficientField identity_field(int dim) {
    if (dim != 1 && dim != 2) {
        throw ConfigError("dimension must be 1 or 2");
    }
    CoefficientField f;
    f.dim = dim;
    for (int i = 0; i < dim; ++i) {
        f.diffusion[i][i] = Expression::constant(1.0);
    }
    f.ellipticity_c = 1.0;
    f.holder_c2 = 0.0;
    return f;
}

std::string number_text(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

CoefficientField catalog_field(std::string_view name, int dim, double horizon) {
    CoefficientField f = identity_field(dim);
    f.name = std::string(name);
    if (name == "constant") {
        return f;
    }
    if (name == "drifting") {
        const Expression q = Expression::parse("1 + 0.5*sin(t)*x");
        for (int i = 0; i < dim; ++i) {
            f.diffusion[i][i] = q;
        }
        // min of 1 + 0.5 sin(t) x over all t and x in [0,1]; |d/dt q| <= 0.5.
        f.ellipticity_c = 0.5;
        f.holder_c2 = 0.5;
        return f;
    }
    if (name == "anisotropic") {
        if (!(horizon > 0.0)) {
            throw ConfigError("anisotropic field needs a positive horizon T");
        }
        f.diffusion[0][0] = Expression::parse("1 + t/" + number_text(1.0 + horizon));
        f.ellipticity_c = 1.0;
        f.holder_c2 = 1.0 / (1.0 + horizon);
        return f;
    }
    if (name == "advection") {
        const Expression b = Expression::parse("0.25*cos(t)");
        for (int j = 0; j < dim; ++j) {
            f.advection[j] = b;
        }
        return f;
    }
    if (name == "reaction") {
        f.reaction = Expression::constant(-1.0);
        return f;
    }
    throw ConfigError("unknown field '" + std::string(name) + "'");
}

CoefficientField field_from_expressions(int dim, const std::map<std::string, std::string>& keys) {
    CoefficientField f = identity_field(dim);
    f.name = "custom";
    f.ellipticity_c = 0.0;
    for (const auto& [key, text] : keys) {
        Expression e;
        try {
            e = Expression::parse(text);
        } catch (const ParseError& err) {
            throw ParseError(err.position(), "in " + key + " = '" + text + "': " + err.what());
        }
        if (key == "q11") {
            f.diffusion[0][0] = e;
        } else if (key == "q1") {
            f.advection[0] = e;
        } else if (key == "q0") {
            f.reaction = e;
        } else if (dim == 2 && key == "q12") {
            f.diffusion[0][1] = e;
        } else if (dim == 2 && key == "q21") {
            f.diffusion[1][0] = e;
        } else if (dim == 2 && key == "q22") {
            f.diffusion[1][1] = e;
        } else if (dim == 2 && key == "q2") {
            f.advection[1] = e;
        } else {
            throw ConfigError("coefficient key '" + key + "' not valid in " + std::to_string(dim) +
                              "D");
        }
    }
    return f;
}

SampleGrid default_sample_grid(int dim, double horizon, int per_axis) {
    if (per_axis < 2) {
        throw ConfigError("sample grid needs at least two points per axis");
    }
    SampleGrid grid;
    const double denom = per_axis - 1;
    for (int k = 0; k < per_axis; ++k) {
        grid.times.push_back(horizon * k / denom);
    }
    if (dim == 1) {
        for (int k = 0; k < per_axis; ++k) {
            grid.points.emplace_back(k / denom, 0.0);
        }
    } else {
        for (int j = 0; j < per_axis; ++j) {
            for (int i = 0; i < per_axis; ++i) {
                grid.points.emplace_back(i / denom, j / denom);
            }
        }
    }
    return grid;
}

double check_ellipticity(const CoefficientField& field, const std::vector<double>& times,
                         const std::vector<Point>& points) {
    if (times.empty() || points.empty()) {
        throw ConfigError("ellipticity check needs nonempty sample grids");
    }
    double min_eig = std::numeric_limits<double>::infinity();
    for (double t : times) {
        for (const Point& p : points) {
            const Eigen::Matrix2d q = field.diffusion_at(t, p);
            if (!q.allFinite()) {
                std::ostringstream os;
                os << "non-finite diffusion coefficient at t=" << t << ", x=(" << p.x();
                if (field.dim == 2) {
                    os << ", " << p.y();
                }
                os << ")";
                throw NumericalError(os.str());
            }
            double lambda;
            if (field.dim == 1) {
                lambda = q(0, 0);
            } else {
                const Eigen::Matrix2d sym = 0.5 * (q + q.transpose());
                lambda = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sym, Eigen::EigenvaluesOnly)
                             .eigenvalues()(0);
            }
            min_eig = std::min(min_eig, lambda);
        }
    }
    return min_eig;
}

double sampled_holder_constant(const CoefficientField& field, const std::vector<double>& times,
                               const std::vector<Point>& points) {
    double worst = 0.0;
    for (std::size_t a = 0; a < times.size(); ++a) {
        for (std::size_t b = a + 1; b < times.size(); ++b) {
            const double dt = std::abs(times[a] - times[b]);
            if (dt == 0.0) {
                continue;
            }
            const double scale = std::pow(dt, field.holder_gamma);
            for (const Point& p : points) {
                const Eigen::Matrix2d diff =
                    field.diffusion_at(times[a], p) - field.diffusion_at(times[b], p);
                worst = std::max(worst, diff.cwiseAbs().maxCoeff() / scale);
            }
        }
    }
    return worst;
}

}  // namespace nafem
