#include "nafem/coefficients.hpp"
#include "nafem/errors.hpp"
#include "nafem/expression.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

using namespace nafem;

namespace {

// Random expression text over the full grammar.
std::string random_expression(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 3 : 9);
    std::uniform_real_distribution<double> num(0.0, 5.0);
    switch (pick(rng)) {
    case 0: return std::to_string(num(rng));
    case 1: return "t";
    case 2: return "x";
    case 3: return "y";
    case 4: return "-" + random_expression(rng, depth - 1);
    case 5: return "(" + random_expression(rng, depth - 1) + " + " + random_expression(rng, depth - 1) + ")";
    case 6: return random_expression(rng, depth - 1) + " - " + random_expression(rng, depth - 1);
    case 7: return random_expression(rng, depth - 1) + "*" + random_expression(rng, depth - 1);
    case 8: return "sin(" + random_expression(rng, depth - 1) + ")";
    default: return "exp(cos(" + random_expression(rng, depth - 1) + "))";
    }
}

}  // namespace

TEST(Expression, Constant) {
    const Expression e = Expression::parse("1");
    EXPECT_TRUE(e.is_constant());
    EXPECT_EQ(e(0.3, 0.2), 1.0);
}

TEST(Expression, DriftingAtTimeZero) {
    EXPECT_EQ(Expression::parse("1 + 0.5*sin(t)*x")(0.0, 0.7), 1.0);
}

TEST(Expression, DriftingAtQuarterPeriod) {
    EXPECT_NEAR(Expression::parse("1 + 0.5*sin(t)*x")(std::numbers::pi / 2, 1.0), 1.5, 1e-15);
}

TEST(Expression, PrecedenceAndAssociativity) {
    EXPECT_EQ(Expression::parse("2 - 3 - 4")(0, 0), -5.0);
    EXPECT_EQ(Expression::parse("8 / 4 / 2")(0, 0), 1.0);
    EXPECT_EQ(Expression::parse("-2 * 3 + 1")(0, 0), -5.0);
    EXPECT_EQ(Expression::parse("2 * (3 + 1)")(0, 0), 8.0);
    EXPECT_EQ(Expression::parse("--x")(0, 2.5), 2.5);
    EXPECT_DOUBLE_EQ(Expression::parse("exp(y) * cos(t)")(0.0, 0.0, 1.0), std::exp(1.0));
}

TEST(Expression, DependencyFlags) {
    const Expression e = Expression::parse("1 + 0.5*sin(t)*x");
    EXPECT_TRUE(e.depends_on_time());
    EXPECT_TRUE(e.depends_on_space());
    EXPECT_FALSE(Expression::parse("x*y").depends_on_time());
}

TEST(Expression, SyntaxErrorsCarryPosition) {
    try {
        (void)Expression::parse("1 + * x");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 4u);
    }
    try {
        (void)Expression::parse("2*foo");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 2u);
    }
    EXPECT_THROW(Expression::parse("sin(x"), ParseError);
    EXPECT_THROW(Expression::parse(""), ParseError);
    EXPECT_THROW(Expression::parse("1 2"), ParseError);
    EXPECT_THROW(Expression::parse("1e999"), ParseError);
}

TEST(Expression, DivisionByZeroIsNotFinite) {
    EXPECT_FALSE(std::isfinite(Expression::parse("1/x")(0.0, 0.0)));
}

TEST(ExpressionProperty, PrintParseRoundTrip) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::string text = random_expression(rng, 4);
        const Expression e = Expression::parse(text);
        const std::string printed = e.to_string();
        const Expression again = Expression::parse(printed);
        EXPECT_EQ(again.to_string(), printed) << text;
        for (int k = 0; k < 5; ++k) {
            const double t = coord(rng), x = coord(rng), y = coord(rng);
            const double a = e(t, x, y), b = again(t, x, y);
            if (std::isfinite(a)) EXPECT_EQ(a, b) << text;
        }
    }
}

TEST(Ellipticity, UnitDiffusion1D) {
    const SampleGrid g = default_sample_grid(1, 1.0);
    EXPECT_EQ(check_ellipticity(catalog_field("constant", 1), g.times, g.points), 1.0);
}

TEST(Ellipticity, DriftingOverFullPeriod) {
    const SampleGrid g = default_sample_grid(1, 2.0 * std::numbers::pi);
    EXPECT_NEAR(check_ellipticity(catalog_field("drifting", 1), g.times, g.points), 0.5, 1e-12);
}

TEST(Ellipticity, IdentityIn2D) {
    const SampleGrid g = default_sample_grid(2, 1.0);
    EXPECT_EQ(check_ellipticity(catalog_field("constant", 2), g.times, g.points), 1.0);
}

TEST(Ellipticity, NonFiniteCoefficientNamesSample) {
    const CoefficientField f = field_from_expressions(1, {{"q11", "1/x"}});
    const SampleGrid g = default_sample_grid(1, 1.0);
    try {
        (void)check_ellipticity(f, g.times, g.points);
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("x="), std::string::npos);
    }
}

TEST(Catalog, EveryFieldMeetsDocumentedConstants) {
    for (int dim : {1, 2}) {
        for (const std::string& name : catalog_field_names()) {
            for (double horizon : {1.0, 3.0}) {
                const CoefficientField f = catalog_field(name, dim, horizon);
                const SampleGrid g = default_sample_grid(dim, horizon, dim == 1 ? 33 : 9);
                EXPECT_GE(check_ellipticity(f, g.times, g.points), f.ellipticity_c - 1e-12) << name;
                EXPECT_LE(sampled_holder_constant(f, g.times, g.points), f.holder_c2 * (1 + 1e-6) + 1e-12)
                    << name;
            }
        }
    }
}

TEST(Catalog, UnknownNameRejected) {
    EXPECT_THROW(catalog_field("nope", 1), ConfigError);
}

TEST(Catalog, AutonomyFlags) {
    EXPECT_TRUE(catalog_field("constant", 1).is_autonomous());
    EXPECT_TRUE(catalog_field("reaction", 2).is_autonomous());
    EXPECT_FALSE(catalog_field("drifting", 1).is_autonomous());
    EXPECT_FALSE(catalog_field("advection", 2).is_autonomous());
}

TEST(FieldExpressions, DefaultsAndOverrides) {
    const CoefficientField f = field_from_expressions(2, {{"q22", "2 + x"}, {"q0", "-1"}});
    const Eigen::Matrix2d q = f.diffusion_at(0.0, Point(0.5, 0.5));
    EXPECT_EQ(q(0, 0), 1.0);
    EXPECT_EQ(q(1, 1), 2.5);
    EXPECT_EQ(q(0, 1), 0.0);
    EXPECT_EQ(f.reaction_at(0.0, Point(0.1, 0.2)), -1.0);
}

TEST(FieldExpressions, ParseErrorNamesKey) {
    try {
        (void)field_from_expressions(1, {{"q11", "1 + "}});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("q11"), std::string::npos);
    }
}

TEST(FieldExpressions, RejectsUnknownAndTwoDimensionalKeysIn1D) {
    EXPECT_THROW(field_from_expressions(1, {{"q33", "1"}}), ConfigError);
    EXPECT_THROW(field_from_expressions(1, {{"q22", "1"}}), ConfigError);
}

TEST(Boundary, RobinNeedsFiniteAlpha) {
    EXPECT_THROW(BoundarySpec::robin(std::nan("")), ConfigError);
    EXPECT_EQ(BoundarySpec::robin(2.0).alpha0, 2.0);
}

TEST(Divergence, MatchesAnalyticDerivative) {
    const CoefficientField f = catalog_field("drifting", 1);
    const Eigen::Vector2d d = f.diffusion_divergence(1.0, Point(0.3, 0.0));
    EXPECT_NEAR(d(0), 0.5 * std::sin(1.0), 1e-9);
}
