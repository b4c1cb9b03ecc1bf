#include "nafem/projections.hpp"

#include "nafem/errors.hpp"
#include "nafem/quadrature.hpp"

#include <cmath>
#include <random>
#include <string>

namespace nafem {

StateVector make_state(const FeSpace& space, Vector values) {
    if (values.size() != space.num_dofs()) {
        throw ConfigError("state has " + std::to_string(values.size()) + " entries, space has " +
                          std::to_string(space.num_dofs()) + " degrees of freedom");
    }
    if (!values.allFinite()) {
        throw NumericalError("state contains non-finite entries");
    }
    return StateVector{space.mesh().id(), std::move(values)};
}

void require_on(const FeSpace& space, const StateVector& state) {
    if (state.mesh_id != space.mesh().id() || state.size() != space.num_dofs()) {
        throw ConfigError("state vector does not belong to this mesh/space");
    }
}

StateVector l2_project(const FeSpace& space, const SpaceTimeFunction& u, double t, double tol) {
    return make_state(space, solve_spd(space.mass(), space.load(u, t, accurate_rule(space.mesh().dim())), tol));
}

SparseMatrix prolongation(const FeSpace& coarse, const FeSpace& fine) {
    const Mesh& cm = coarse.mesh();
    const Mesh& fm = fine.mesh();
    if (cm.dim() != fm.dim() || fm.cells_per_side() % cm.cells_per_side() != 0) {
        throw ConfigError("prolongation needs nested meshes");
    }
    const int nc = cm.cells_per_side();
    const int nf = fm.cells_per_side();
    const int ratio = nf / nc;

    // coarse cell index and offset in [0, 1] along one axis
    auto split = [&](double coord, int& cell, double& offset) {
        const int i = static_cast<int>(std::lround(coord * nf));
        cell = i / ratio;
        offset = static_cast<double>(i % ratio) / ratio;
        if (cell == nc) {
            cell = nc - 1;
            offset = 1.0;
        }
    };

    std::vector<Eigen::Triplet<double>> triplets;
    for (int fd = 0; fd < fine.num_dofs(); ++fd) {
        const Point& p = fm.node(fine.node_of_dof(fd));
        auto add = [&](int i, int j, double weight) {
            if (weight == 0.0) {
                return;
            }
            const int cd = coarse.dof_of_node(cm.node_at_grid(i, j));
            if (cd >= 0) {
                triplets.emplace_back(fd, cd, weight);
            }
        };
        int ci = 0, cj = 0;
        double xi = 0.0, eta = 0.0;
        split(p.x(), ci, xi);
        if (cm.dim() == 1) {
            add(ci, 0, 1.0 - xi);
            add(ci + 1, 0, xi);
            continue;
        }
        split(p.y(), cj, eta);
        if (eta <= xi) {
            add(ci, cj, 1.0 - xi);
            add(ci + 1, cj, xi - eta);
            add(ci + 1, cj + 1, eta);
        } else {
            add(ci, cj, 1.0 - eta);
            add(ci + 1, cj + 1, xi);
            add(ci, cj + 1, eta - xi);
        }
    }
    SparseMatrix p(fine.num_dofs(), coarse.num_dofs());
    p.setFromTriplets(triplets.begin(), triplets.end());
    return p;
}

StateVector l2_project(const FeSpace& coarse, const FeSpace& fine, const StateVector& u,
                       double tol) {
    require_on(fine, u);
    const SparseMatrix p = prolongation(coarse, fine);
    const Vector rhs = p.transpose() * (fine.mass() * u.values);
    return make_state(coarse, solve_spd(coarse.mass(), rhs, tol));
}

StateVector restrict_nodal(const FeSpace& coarse, const FeSpace& fine, const StateVector& u) {
    require_on(fine, u);
    const std::vector<int> map = nested_node_map(coarse.mesh(), fine.mesh());
    Vector out(coarse.num_dofs());
    for (int cd = 0; cd < coarse.num_dofs(); ++cd) {
        const int fd = fine.dof_of_node(map[static_cast<std::size_t>(coarse.node_of_dof(cd))]);
        if (fd < 0) {
            throw ConfigError("coarse degree of freedom has no fine counterpart");
        }
        out(cd) = u.values(fd);
    }
    return make_state(coarse, std::move(out));
}

namespace {

void require_coercive(const AssembledSystem& system, double t) {
    const SampleGrid grid = default_sample_grid(system.field().dim, 1.0);
    const double c = check_ellipticity(system.field(), {t}, grid.points);
    if (!(c > 0.0)) {
        throw ConfigError("field '" + system.field().name + "' is not coercive at t=" +
                          std::to_string(t));
    }
}

}  // namespace

StateVector ritz_project(const AssembledSystem& system, double t, const SmoothFunction& v,
                         double tol) {
    require_coercive(system, t);
    const SparseMatrix s = system.stiffness_at(t);
    return make_state(system.space(), solve_general(s, system.elliptic_load(v, t), tol));
}

StateVector ritz_project(const AssembledSystem& system, double t, const StateVector& chi,
                         double tol) {
    require_on(system.space(), chi);
    require_coercive(system, t);
    const SparseMatrix s = system.stiffness_at(t);
    return make_state(system.space(), solve_general(s, s * chi.values, tol));
}

SpectralBasis SpectralBasis::compute(const AssembledSystem& system, double t0,
                                     Eigen::Index dense_cap) {
    SpectralBasis basis;
    basis.mass_ = system.mass();
    const GeneralizedEigenpairs pairs =
        generalized_symmetric_eig(system.stiffness_at(t0), basis.mass_, dense_cap);
    basis.eigenvalues_ = pairs.eigenvalues;
    basis.eigenvectors_ = pairs.eigenvectors;
    basis.mesh_id_ = system.mesh().id();
    return basis;
}

Vector SpectralBasis::coordinates(const Vector& v) const {
    return eigenvectors_.transpose() * (mass_ * v);
}

StateVector fractional_apply(const SpectralBasis& basis, double s, const StateVector& v) {
    if (!(s >= -1.0)) {
        throw ConfigError("fractional power must be >= -1");
    }
    if (v.mesh_id != basis.mesh_id() || v.size() != basis.size()) {
        throw ConfigError("state vector is not on the spectral basis mesh");
    }
    const Vector& lambda = basis.eigenvalues();
    if (s != 0.0 && s != 1.0 && lambda.minCoeff() <= 0.0) {
        throw NumericalError("fractional power of an operator with nonpositive eigenvalues");
    }
    Vector c = basis.coordinates(v.values);
    if (s != 0.0) {
        c.array() *= lambda.array().pow(s);
    }
    return StateVector{v.mesh_id, basis.eigenvectors() * c};
}

StateVector make_graded_data(const SpectralBasis& basis, double regularity, double eps,
                             std::uint64_t seed) {
    if (!(regularity >= 0.0 && regularity <= 2.0)) {
        throw ConfigError("data regularity must lie in [0, 2]");
    }
    if (!(eps > 0.0)) {
        throw ConfigError("regularity margin eps must be positive");
    }
    const Vector& lambda = basis.eigenvalues();
    if (lambda.minCoeff() <= 0.0) {
        throw NumericalError("graded data needs a positive spectrum");
    }
    std::mt19937_64 rng(seed);
    const double exponent = -regularity / 2.0 - 0.25 - eps / 2.0;
    Vector c(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        const double sign = (rng() >> 63) != 0 ? -1.0 : 1.0;
        c(k) = sign * std::pow(lambda(k), exponent);
    }
    return StateVector{basis.mesh_id(), basis.eigenvectors() * c};
}

StateVector make_initial_data(const SpectralBasis& basis, double beta, double eps,
                              std::uint64_t seed) {
    if (!(beta > 0.0 && beta <= 2.0)) {
        throw ConfigError("beta must lie in (0, 2]");
    }
    return make_graded_data(basis, beta, eps, seed);
}

namespace {

template <typename Integrand>
double integrate_error(const FeSpace& space, const Vector& values, Integrand&& integrand) {
    if (values.size() != space.num_dofs()) {
        throw ConfigError("coefficient vector does not match the space");
    }
    const Mesh& m = space.mesh();
    const QuadratureRule& rule = accurate_rule(m.dim());
    double sum = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
        const auto& f = space.frame(e);
        std::array<double, 3> local{0.0, 0.0, 0.0};
        Eigen::Vector2d grad = Eigen::Vector2d::Zero();
        for (int a = 0; a < f.vertices; ++a) {
            if (f.dofs[a] >= 0) {
                local[a] = values(f.dofs[a]);
                grad += local[a] * f.grads[a];
            }
        }
        for (std::size_t qp = 0; qp < rule.size(); ++qp) {
            double uh = 0.0;
            for (int a = 0; a < f.vertices; ++a) {
                uh += rule.points[qp][a] * local[a];
            }
            sum += rule.weights[qp] * f.measure * integrand(f.map(rule.points[qp]), uh, grad);
        }
    }
    return std::sqrt(sum);
}

}  // namespace

double l2_distance(const FeSpace& space, const Vector& values, const SmoothFunction& u, double t) {
    return integrate_error(space, values, [&](const Point& p, double uh, const Eigen::Vector2d&) {
        const double d = uh - u.value(t, p);
        return d * d;
    });
}

double h1_seminorm_distance(const FeSpace& space, const Vector& values, const SmoothFunction& u,
                            double t) {
    return integrate_error(space, values,
                           [&](const Point& p, double, const Eigen::Vector2d& grad) {
                               const Eigen::Vector2d d = grad - u.gradient(t, p);
                               return d.squaredNorm();
                           });
}

}  // namespace nafem
