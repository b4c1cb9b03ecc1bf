#include "nafem/errors.hpp"
#include "nafem/nonlinearity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace nafem;

namespace {

std::vector<double> symmetric_samples(double radius, double step) {
    std::vector<double> out;
    const int count = static_cast<int>(std::lround(2 * radius / step));
    for (int i = 0; i <= count; ++i) out.push_back(-radius + i * step);
    return out;
}

// (x^n - y^n) / (x - y) = sum_k x^(n-1-k) y^k
double power_difference_quotient(double x, double y, int n) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += std::pow(x, n - 1 - k) * std::pow(y, k);
    return s;
}

}  // namespace

TEST(Nemytskii, LinearOnOnes) {
    Vector out;
    nemytskii_apply(NonlinearSource::linear(), 0.0, Vector::Ones(5), out);
    EXPECT_EQ(out, Vector::Ones(5));
}

TEST(Nemytskii, CubeAtTwo) {
    const NonlinearSource f = NonlinearSource::polynomial({0, 0, 0, 1});
    Vector out;
    nemytskii_apply(f, 0.0, Vector::Constant(1, 2.0), out);
    EXPECT_EQ(out(0), 8.0);
}

TEST(Nemytskii, BoundedRatioAtOne) {
    Vector out;
    nemytskii_apply(NonlinearSource::bounded_ratio(), 0.0, Vector::Constant(1, 1.0), out);
    EXPECT_EQ(out(0), 0.5);
}

TEST(Nemytskii, BoundedRatioTimeFactor) {
    const NonlinearSource f = NonlinearSource::bounded_ratio([](double t) { return std::cos(t); }, 1.0);
    EXPECT_DOUBLE_EQ(f(1.0, 3.0), std::cos(1.0) * 0.75);
}

TEST(Nemytskii, OverflowNamesNode) {
    Vector u = Vector::Zero(4);
    u(2) = 1e200;
    Vector out;
    try {
        nemytskii_apply(NonlinearSource::cubic(), 0.0, u, out);
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("node 2"), std::string::npos) << e.what();
    }
}

TEST(Nemytskii, StateOverloadKeepsMesh) {
    const StateVector u{77, Vector::Constant(3, -2.0)};
    const StateVector v = nemytskii_apply(NonlinearSource::allen_cahn(), 0.0, u);
    EXPECT_EQ(v.mesh_id, 77u);
    EXPECT_EQ(v.values, Vector::Constant(3, 6.0));
}

TEST(Catalog, FromName) {
    EXPECT_TRUE(NonlinearSource::from_name("zero").is_zero());
    EXPECT_EQ(NonlinearSource::from_name("allen_cahn")(0.0, 2.0), -6.0);
    EXPECT_EQ(NonlinearSource::from_name("cubic")(0.0, -2.0), 8.0);
    const NonlinearSource p = NonlinearSource::from_name("poly:1,0,2");
    EXPECT_EQ(p(0.0, 3.0), 19.0);
    EXPECT_EQ(p.kind(), GrowthKind::NemytskiiPolynomial);
    EXPECT_EQ(p.coefficients(), (std::vector<double>{1, 0, 2}));
    EXPECT_THROW(NonlinearSource::from_name("quartic"), ConfigError);
    EXPECT_THROW(NonlinearSource::from_name("poly:1,x"), ConfigError);
    EXPECT_THROW(NonlinearSource::from_name("poly:"), ConfigError);
}

TEST(Catalog, DeclaredConstants) {
    const NonlinearSource ac = NonlinearSource::allen_cahn();
    EXPECT_EQ(ac.kind(), GrowthKind::NemytskiiPolynomial);
    EXPECT_EQ(ac.constants().c1, 2.0);
    EXPECT_EQ(ac.constants().sharp_c1, 1.0);
    EXPECT_EQ(ac.constants().sharp_c2, 2.0);
    EXPECT_EQ(NonlinearSource::linear().constants().lipschitz_k, 1.0);
    const NonlinearSource affine = NonlinearSource::polynomial({2.0, -3.0, 0.0});
    EXPECT_EQ(affine.kind(), GrowthKind::Lipschitz);
    EXPECT_EQ(affine.constants().lipschitz_k, 3.0);
    EXPECT_FALSE(affine.constants().linear_growth_c.has_value());
}

TEST(Growth, AllenCahnClassTwo) {
    const auto samples = symmetric_samples(10.0, 0.1);
    const GrowthReport r = verify_growth_bounds(NonlinearSource::allen_cahn(), samples);
    EXPECT_TRUE(r.passed);
    ASSERT_TRUE(r.c1_class.has_value());
    EXPECT_EQ(*r.c1_class, 2);
    EXPECT_EQ(r.c1, 2.0);
    EXPECT_TRUE(r.zero_at_origin);
    EXPECT_GT(r.l1, 0.0);
    EXPECT_TRUE(std::isfinite(r.l1));
}

TEST(Growth, PolynomialClassIsDegreeMinusOne) {
    const auto samples = symmetric_samples(10.0, 0.1);
    for (int degree : {2, 3, 4, 5}) {
        std::vector<double> a(static_cast<std::size_t>(degree + 1), 0.0);
        a.back() = 1.0;
        const GrowthReport r = verify_growth_bounds(NonlinearSource::polynomial(a), samples);
        ASSERT_TRUE(r.c1_class.has_value()) << degree;
        EXPECT_EQ(*r.c1_class, degree - 1);
        EXPECT_TRUE(r.passed);
    }
}

TEST(Growth, LinearIsLipschitzOne) {
    const auto samples = symmetric_samples(10.0, 0.1);
    const GrowthReport r = verify_growth_bounds(NonlinearSource::linear(), samples);
    EXPECT_TRUE(r.passed);
    ASSERT_TRUE(r.lipschitz_ratio.has_value());
    EXPECT_NEAR(*r.lipschitz_ratio, 1.0, 1e-12);
    EXPECT_NEAR(*r.linear_growth_ratio, 1.0, 1e-12);
}

TEST(Growth, ConstantTermBreaksLinearGrowth) {
    const std::vector<double> samples{0.0, 0.5, 1.0};
    const GrowthReport r = verify_growth_bounds(NonlinearSource::polynomial({0.5, 1.0}), samples);
    EXPECT_FALSE(r.zero_at_origin);
    EXPECT_EQ(*r.linear_growth_ratio, std::numeric_limits<double>::infinity());
}

TEST(Growth, BoundedRatioWithinDeclaredConstants) {
    const auto samples = symmetric_samples(10.0, 0.1);
    const GrowthReport r = verify_growth_bounds(NonlinearSource::bounded_ratio(), samples);
    EXPECT_TRUE(r.passed);
    EXPECT_LE(*r.lipschitz_ratio, 1.0);
    EXPECT_LE(*r.linear_growth_ratio, 1.0);
}

TEST(Growth, SampledLipschitzMatchesFactorization) {
    const std::vector<double> a{0.3, 1.0, -0.5, -1.0};
    const auto samples = symmetric_samples(3.0, 0.25);
    double expected = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            double q = 0.0;
            for (std::size_t n = 1; n < a.size(); ++n)
                q += a[n] * power_difference_quotient(samples[i], samples[j], static_cast<int>(n));
            expected = std::max(expected, std::abs(q));
        }
    }
    const GrowthReport r = verify_growth_bounds(NonlinearSource::polynomial(a), samples);
    EXPECT_NEAR(*r.lipschitz_ratio, expected, 1e-12 * expected);
}

TEST(Growth, RejectsEmptySamples) {
    EXPECT_THROW(verify_growth_bounds(NonlinearSource::linear(), std::vector<double>{}), ConfigError);
}

TEST(NemytskiiProperty, LipschitzTransferInMassNorm) {
    // P1 mass matrices are spectrally equivalent to their lumped versions with ratio 3 (1D)
    // and 4 (2D); the nodal bound holds exactly in the lumped norm.
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int dim : {1, 2}) {
        const Mesh mesh = dim == 1 ? uniform_interval_mesh(40) : structured_square_mesh(8);
        const SparseMatrix m = assemble_mass(mesh, BoundarySpec::dirichlet());
        const Vector lumped = DenseMatrix(m).rowwise().sum();
        const double equivalence = dim == 1 ? std::sqrt(3.0) : 2.0;
        for (const NonlinearSource& f : {NonlinearSource::linear(), NonlinearSource::bounded_ratio()}) {
            const double k = *f.constants().lipschitz_k;
            for (int trial = 0; trial < 50; ++trial) {
                Vector u(m.rows()), v(m.rows());
                for (Eigen::Index i = 0; i < u.size(); ++i) {
                    u(i) = g(rng);
                    v(i) = u(i) + 1e-3 * g(rng);
                }
                Vector fu, fv;
                nemytskii_apply(f, 0.0, u, fu);
                nemytskii_apply(f, 0.0, v, fv);
                const Vector df = fu - fv, du = u - v;
                EXPECT_LE(std::sqrt(df.dot(lumped.cwiseProduct(df))),
                          k * std::sqrt(du.dot(lumped.cwiseProduct(du))) * (1 + 1e-12));
                EXPECT_LE(m_norm(m, df), equivalence * k * m_norm(m, du) * (1 + 1e-12));
            }
        }
    }
}
