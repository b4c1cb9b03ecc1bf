#include "nafem/errors.hpp"
#include "nafem/projections.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nafem;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const FeSpace> interval_space(int n, BoundarySpec bc = BoundarySpec::dirichlet()) {
    return make_space(uniform_interval_mesh(n), bc);
}

// Piecewise-linear function on a uniform 1D Dirichlet space, evaluated at x.
double eval_p1(const FeSpace& space, const Vector& values, double x) {
    const int n = space.mesh().cells_per_side();
    const int cell = std::min(n - 1, static_cast<int>(x * n));
    auto nodal = [&](int i) {
        const int dof = space.dof_of_node(space.mesh().node_at_grid(i));
        return dof >= 0 ? values(dof) : 0.0;
    };
    const double s = x * n - cell;
    return (1.0 - s) * nodal(cell) + s * nodal(cell + 1);
}

// Composite Simpson on each cell of the support of phi_k.
double pairing_with_hat(const FeSpace& space, const std::function<double(double)>& g, int dof) {
    const int n = space.mesh().cells_per_side();
    const double h = 1.0 / n;
    const double xk = space.mesh().node(space.node_of_dof(dof)).x();
    const int sub = 400;
    double total = 0.0;
    for (double a : {xk - h, xk}) {
        const double step = h / sub;
        for (int i = 0; i < sub; ++i) {
            const double x0 = a + i * step;
            for (auto [x, w] : {std::pair{x0, 1.0}, {x0 + 0.5 * step, 4.0}, {x0 + step, 1.0}}) {
                total += step / 6.0 * w * g(x) * std::max(0.0, 1.0 - std::abs(x - xk) / h);
            }
        }
    }
    return total;
}

// Eigenvalues of the 1D Dirichlet Laplacian with consistent mass on n cells.
std::vector<double> closed_form_eigenvalues(int n) {
    std::vector<double> out;
    const double h = 1.0 / n;
    for (int k = 1; k < n; ++k) {
        const double c = std::cos(k * kPi * h);
        out.push_back(6.0 / (h * h) * (1.0 - c) / (2.0 + c));
    }
    return out;
}

SpectralBasis laplace_basis(int n) {
    const AssembledSystem system(interval_space(n), catalog_field("constant", 1));
    return SpectralBasis::compute(system);
}

Vector random_vector(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> g;
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
    return v;
}

}  // namespace

TEST(L2Project, ReproducesDiscreteFunctions) {
    const auto space = interval_space(12);
    const Vector coeffs = Vector::LinSpaced(space->num_dofs(), -1.0, 2.0);
    const StateVector p = l2_project(
        *space, [&](double, const Point& x) { return eval_p1(*space, coeffs, x.x()); }, 0.0);
    EXPECT_LE((p.values - coeffs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(L2Project, ConstantWithoutElimination) {
    for (int dim : {1, 2}) {
        const Mesh mesh = dim == 1 ? uniform_interval_mesh(9) : structured_square_mesh(5);
        const auto space = make_space(mesh, BoundarySpec::robin(0.0));
        const StateVector p = l2_project(*space, [](double, const Point&) { return 1.0; }, 0.0);
        EXPECT_LE((p.values.array() - 1.0).abs().maxCoeff(), 1e-10);
    }
}

TEST(L2Project, ResidualOrthogonalToBasis) {
    const auto space = interval_space(16);
    const StateVector p = l2_project(
        *space, [](double, const Point& x) { return std::sin(kPi * x.x()); }, 0.0, 1e-14);
    auto residual = [&](double x) { return std::sin(kPi * x) - eval_p1(*space, p.values, x); };
    for (int k = 0; k < space->num_dofs(); ++k) {
        EXPECT_LE(std::abs(pairing_with_hat(*space, residual, k)), 1e-9) << "dof " << k;
    }
}

TEST(L2Project, NestedTransferOfCoarseFunctionIsExact) {
    const auto coarse = interval_space(8);
    const auto fine = make_space(refine(coarse->mesh()), BoundarySpec::dirichlet());
    std::mt19937_64 rng(11);
    const StateVector u = make_state(*coarse, random_vector(rng, coarse->num_dofs()));
    const StateVector lifted = make_state(*fine, prolongation(*coarse, *fine) * u.values);
    const StateVector back = l2_project(*coarse, *fine, lifted, 1e-14);
    EXPECT_LE((back.values - u.values).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((restrict_nodal(*coarse, *fine, lifted).values - u.values).cwiseAbs().maxCoeff(), 0.0);
}

TEST(L2Project, RejectsForeignState) {
    const auto a = interval_space(8);
    const auto b = interval_space(16);
    const StateVector u = make_state(*a, Vector::Ones(a->num_dofs()));
    EXPECT_THROW(l2_project(*a, *b, u), ConfigError);
    EXPECT_THROW(make_state(*a, Vector::Ones(3)), ConfigError);
}

TEST(L2ProjectProperty, IdempotentAndNonExpansive) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto coarse = interval_space(4 + static_cast<int>(rng() % 12));
        const auto fine = make_space(refine(refine(coarse->mesh())), BoundarySpec::dirichlet());
        const StateVector u = make_state(*fine, random_vector(rng, fine->num_dofs()));
        const StateVector p = l2_project(*coarse, *fine, u, 1e-14);
        const StateVector pp =
            l2_project(*coarse, *fine, make_state(*fine, prolongation(*coarse, *fine) * p.values), 1e-14);
        EXPECT_LE((pp.values - p.values).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LE(m_norm(coarse->mass(), p.values), m_norm(fine->mass(), u.values) * (1 + 1e-12));
    }
}

TEST(Ritz, ReproducesDiscreteFunctions) {
    std::mt19937_64 rng(8);
    for (const char* name : {"drifting", "advection", "reaction"}) {
        const AssembledSystem system(make_space(structured_square_mesh(6), BoundarySpec::dirichlet()),
                                     catalog_field(name, 2));
        const StateVector chi = make_state(system.space(), random_vector(rng, system.num_dofs()));
        const StateVector r = ritz_project(system, 0.4, chi, 1e-13);
        EXPECT_LE((r.values - chi.values).cwiseAbs().maxCoeff(), 1e-10) << name;
    }
}

TEST(Ritz, OneDimensionalLaplacianGivesNodalInterpolant) {
    const AssembledSystem system(interval_space(20), catalog_field("constant", 1));
    SmoothFunction v;
    v.value = [](double, const Point& p) { return p.x() * (1 - p.x()) * std::exp(p.x()); };
    v.gradient = [](double, const Point& p) {
        const double x = p.x();
        return Eigen::Vector2d((1 - x - x * x) * std::exp(x), 0.0);
    };
    const StateVector r = ritz_project(system, 0.0, v, 1e-14);
    const Vector nodal = system.space().interpolate(v.value, 0.0);
    EXPECT_LE((r.values - nodal).cwiseAbs().maxCoeff(), 1e-10);
    const StateVector rs = ritz_project(system, 0.0, sine_mode(1), 1e-14);
    EXPECT_LE((rs.values - system.space().interpolate(sine_mode(1).value, 0.0)).cwiseAbs().maxCoeff(),
              1e-10);
}

TEST(Ritz, SecondOrderInL2) {
    std::vector<double> errors, hs;
    for (int n : {8, 16, 32, 64, 128}) {
        const AssembledSystem system(interval_space(n), catalog_field("drifting", 1));
        const StateVector r = ritz_project(system, 0.5, sine_mode(1));
        errors.push_back(l2_distance(system.space(), r.values, sine_mode(1), 0.5));
        hs.push_back(1.0 / n);
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        const double eoc = std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]);
        EXPECT_NEAR(eoc, 2.0, 0.1);
    }
}

TEST(Ritz, RejectsNonCoerciveField) {
    const CoefficientField f = field_from_expressions(1, {{"q11", "x - 0.5"}});
    const AssembledSystem system(interval_space(8), f);
    EXPECT_THROW(ritz_project(system, 0.0, sine_mode(1)), ConfigError);
}

TEST(Fractional, ZeroPowerIsIdentity) {
    const SpectralBasis basis = laplace_basis(32);
    std::mt19937_64 rng(1);
    const StateVector v{basis.mesh_id(), random_vector(rng, basis.size())};
    EXPECT_LE((fractional_apply(basis, 0.0, v).values - v.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fractional, EigenvectorScales) {
    const SpectralBasis basis = laplace_basis(32);
    for (Eigen::Index k : {0, 5, 30}) {
        const StateVector psi{basis.mesh_id(), basis.eigenvectors().col(k)};
        for (double s : {-1.0, -0.25, 0.5, 1.0}) {
            const Vector expected = std::pow(basis.eigenvalues()(k), s) * psi.values;
            const Vector got = fractional_apply(basis, s, psi).values;
            EXPECT_LE((got - expected).norm(), 1e-8 * expected.norm()) << k << " " << s;
        }
    }
}

TEST(Fractional, HalfPowerTwiceMatchesOperator) {
    std::mt19937_64 rng(21);
    for (const char* name : {"constant", "drifting", "reaction"}) {
        const AssembledSystem system(interval_space(40), catalog_field(name, 1));
        const SpectralBasis basis = SpectralBasis::compute(system, 0.0);
        const StateVector v{basis.mesh_id(), random_vector(rng, basis.size())};
        const Vector twice = fractional_apply(basis, 0.5, fractional_apply(basis, 0.5, v)).values;
        const Vector direct = solve_spd(system.mass(), system.stiffness_at(0.0) * v.values, 1e-14);
        EXPECT_LE((twice - direct).norm(), 1e-8 * direct.norm()) << name;
    }
}

TEST(Fractional, RejectsPowerBelowMinusOne) {
    const SpectralBasis basis = laplace_basis(8);
    const StateVector v{basis.mesh_id(), Vector::Ones(basis.size())};
    EXPECT_THROW(fractional_apply(basis, -1.5, v), ConfigError);
}

TEST(InitialData, ParsevalNorm) {
    for (double beta : {0.5, 1.0, 2.0}) {
        const SpectralBasis basis = laplace_basis(64);
        const double eps = 0.05;
        const StateVector u0 = make_initial_data(basis, beta, eps, 42);
        double sum = 0.0;
        for (double lambda : closed_form_eigenvalues(64)) sum += std::pow(lambda, -beta - 0.5 - eps);
        EXPECT_NEAR(m_norm(basis.mass(), u0.values), std::sqrt(sum), 1e-8 * std::sqrt(sum)) << beta;
    }
}

namespace {

// Norm of (-A_h)^s u0 on n cells by the eigen-sum and by the implementation.
std::pair<double, double> graded_norm(int n, double beta, double s) {
    const double eps = 0.05;
    double sum = 0.0;
    for (double lambda : closed_form_eigenvalues(n)) sum += std::pow(lambda, 2 * s - beta - 0.5 - eps);
    const SpectralBasis basis = laplace_basis(n);
    const StateVector u0 = make_initial_data(basis, beta, eps, 42);
    return {std::sqrt(sum), m_norm(basis.mass(), fractional_apply(basis, s, u0).values)};
}

}  // namespace

TEST(InitialData, TopRegularityNormStable) {
    const auto [o64, d64] = graded_norm(64, 2.0, 1.0);
    const auto [o128, d128] = graded_norm(128, 2.0, 1.0);
    EXPECT_NEAR(d64, o64, 1e-8 * o64);
    EXPECT_NEAR(d128, o128, 1e-8 * o128);
    EXPECT_LT(d128 / d64, 2.0);
}

TEST(InitialData, GradedNormRatios) {
    const auto [o64, d64] = graded_norm(64, 1.0, 0.5);
    const auto [o128, d128] = graded_norm(128, 1.0, 0.5);
    EXPECT_NEAR(d128 / d64, o128 / o64, 1e-8);
    EXPECT_LT(d128 / d64, 1.5);

    // Terms of the s = 3/4 sum decay like k^(-1/10), so the norm grows like n^(0.45):
    // about 1.37 per doubling.
    const auto [p64, e64] = graded_norm(64, 1.0, 0.75);
    const auto [p128, e128] = graded_norm(128, 1.0, 0.75);
    EXPECT_NEAR(e128 / e64, p128 / p64, 1e-8);
    EXPECT_NEAR(e128 / e64, 1.37, 0.02);
    EXPECT_GT(e128 / e64, d128 / d64);
}

TEST(InitialData, SeedDeterminesSigns) {
    const SpectralBasis basis = laplace_basis(16);
    const StateVector a = make_initial_data(basis, 1.0, 0.05, 7);
    const StateVector b = make_initial_data(basis, 1.0, 0.05, 7);
    const StateVector c = make_initial_data(basis, 1.0, 0.05, 8);
    EXPECT_EQ((a.values - b.values).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT((a.values - c.values).cwiseAbs().maxCoeff(), 0.0);
    const Vector ca = basis.coordinates(a.values).cwiseAbs();
    const Vector cc = basis.coordinates(c.values).cwiseAbs();
    EXPECT_LE((ca - cc).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(InitialData, RejectsBetaOutOfRange) {
    const SpectralBasis basis = laplace_basis(8);
    EXPECT_THROW(make_initial_data(basis, 0.0, 0.05, 1), ConfigError);
    EXPECT_THROW(make_initial_data(basis, 2.5, 0.05, 1), ConfigError);
    EXPECT_THROW(make_initial_data(basis, 1.0, 0.0, 1), ConfigError);
}
