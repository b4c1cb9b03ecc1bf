#pragma once

#include "nafem/expression.hpp"
#include "nafem/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nafem {

struct BoundarySpec {
    enum class Kind { Dirichlet, Robin };

    Kind kind = Kind::Dirichlet;
    double alpha0 = 0.0;  ///< Robin coefficient in  dv/dn_A + alpha0 v = 0

    static BoundarySpec dirichlet() { return {}; }
    static BoundarySpec robin(double alpha0);

    [[nodiscard]] bool is_dirichlet() const { return kind == Kind::Dirichlet; }
};

/// Time-dependent coefficients of
///
///     A(t)u = sum_ij d_i(q_ij d_j u) - sum_j q_j d_j u + q_0 u
///
/// together with the declared time-Hoelder data |q_ij(t,x) - q_ij(s,x)| <= c2 |t-s|^gamma
/// and the documented ellipticity constant (if any).
struct CoefficientField {
    std::string name = "custom";
    int dim = 1;
    std::array<std::array<Expression, 2>, 2> diffusion;  ///< q_ij
    std::array<Expression, 2> advection;                 ///< q_j
    Expression reaction;                                 ///< q_0
    double holder_gamma = 1.0;
    double holder_c2 = 0.0;
    double ellipticity_c = 0.0;  ///< documented lower bound; 0 when unknown

    [[nodiscard]] Eigen::Matrix2d diffusion_at(double t, const Point& p) const;
    [[nodiscard]] Eigen::Vector2d advection_at(double t, const Point& p) const;
    [[nodiscard]] double reaction_at(double t, const Point& p) const;

    /// sum_i d_i q_ij, by central differences of the expressions.
    [[nodiscard]] Eigen::Vector2d diffusion_divergence(double t, const Point& p) const;

    [[nodiscard]] bool is_autonomous() const;
    [[nodiscard]] bool diffusion_constant() const;
    [[nodiscard]] bool advection_constant() const;
    [[nodiscard]] bool has_advection() const;
};

/// Names accepted by catalog_field().
const std::vector<std::string>& catalog_field_names();

/// Built-in fields: "constant" (q = I), "drifting" (q = (1 + 0.5 sin(t) x) I),
/// "anisotropic" (diag(1 + t/(1+T), 1)), "advection" (q = I, q_j = 0.25 cos(t)),
/// "reaction" (q = I, q_0 = -1). `horizon` is T.
CoefficientField catalog_field(std::string_view name, int dim, double horizon = 1.0);

/// Field from config keys q11, q12, q21, q22, q1, q2, q0 (1D: q11, q1, q0 only).
/// Missing diffusion keys default to the identity, others to zero.
CoefficientField field_from_expressions(int dim, const std::map<std::string, std::string>& keys);

struct SampleGrid {
    std::vector<double> times;
    std::vector<Point> points;
};

/// 33 equispaced times on [0, T] and 33 (1D) or 33 x 33 (2D) points on the closed domain.
SampleGrid default_sample_grid(int dim, double horizon, int per_axis = 33);

/// Minimum over the samples of the smallest eigenvalue of the symmetric part of q(t,x).
/// Throws NumericalError naming (t,x) at a non-finite coefficient.
double check_ellipticity(const CoefficientField& field, const std::vector<double>& times,
                         const std::vector<Point>& points);

/// Largest sampled |q_ij(t,x) - q_ij(s,x)| / |t-s|^gamma over distinct time pairs.
double sampled_holder_constant(const CoefficientField& field, const std::vector<double>& times,
                               const std::vector<Point>& points);

}  // namespace nafem
