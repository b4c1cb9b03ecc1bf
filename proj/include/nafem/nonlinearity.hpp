#pragma once

#include "nafem/linalg.hpp"
#include "nafem/projections.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nafem {

enum class GrowthKind { Lipschitz, BoundedRatio, NemytskiiPolynomial, LinearGrowth };

/// Declared constants of a nonlinearity. Only the fields relevant to its kind are set.
struct GrowthConstants {
    std::optional<double> lipschitz_k;      ///< |F(t,v) - F(t,w)| <= K |v - w|
    std::optional<double> linear_growth_c;  ///< |F(t,v)| <= C |v|
    std::optional<double> l1;               ///< polynomial growth constant
    std::optional<double> c1;               ///< polynomial growth exponent on the sup-norm
    std::optional<double> sharp_c1;         ///< |F(v)| <= C |v|^sharp_c1 |v|_C^sharp_c2
    std::optional<double> sharp_c2;
    std::optional<double> delta;            ///< smoothing index of the optimal-rate condition
};

/// Pointwise (Nemytskii) nonlinearity F(t,u)(x) = phi(t, u(x)) with growth metadata.
class NonlinearSource {
public:
    using Evaluator = std::function<double(double t, double u)>;

    static NonlinearSource zero();
    /// phi(u) = u.
    static NonlinearSource linear();
    /// phi(t,u) = f(t) u / (1 + |u|); `f_sup` bounds |f| on [0,T]. Default f = 1.
    static NonlinearSource bounded_ratio(std::function<double(double)> f = {}, double f_sup = 1.0);
    /// phi(u) = sum_i a_i u^i with exact coefficients a_0..a_l.
    static NonlinearSource polynomial(std::vector<double> coefficients, std::string name = "poly");
    /// u - u^3
    static NonlinearSource allen_cahn();
    /// -u^3
    static NonlinearSource cubic();

    /// "zero", "linear", "bounded_ratio", "allen_cahn", "cubic" or "poly:a0,a1,...".
    static NonlinearSource from_name(std::string_view name);

    [[nodiscard]] double operator()(double t, double u) const { return eval_(t, u); }

    [[nodiscard]] GrowthKind kind() const { return kind_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] bool is_zero() const { return zero_; }
    [[nodiscard]] const std::vector<double>& coefficients() const { return coefficients_; }
    [[nodiscard]] const GrowthConstants& constants() const { return constants_; }

private:
    NonlinearSource() = default;

    GrowthKind kind_ = GrowthKind::Lipschitz;
    std::string name_;
    bool zero_ = false;
    Evaluator eval_;
    std::vector<double> coefficients_;
    GrowthConstants constants_;
};

/// Nodal application: out_k = phi(t, u_k). Throws NumericalError naming the node on overflow.
void nemytskii_apply(const NonlinearSource& f, double t, const Vector& u, Vector& out);
StateVector nemytskii_apply(const NonlinearSource& f, double t, const StateVector& u);

struct GrowthReport {
    double c1 = 0.0;             ///< exponent the L1 constants refer to
    double l1_growth = 0.0;      ///< smallest L1 with |F(w)| <= L1 + L1|w|(1 + |w|_C^c1)
    double l1_difference = 0.0;  ///< smallest L1 with |F(w)-F(v)| <= L1|w-v|(1 + |w|_C^c1 + |v|_C^c1)
    double l1 = 0.0;             ///< max of the two
    /// Smallest integer exponent whose sampled ratios stay bounded as the sample range doubles.
    std::optional<int> c1_class;
    bool zero_at_origin = false;
    std::optional<double> lipschitz_ratio;      ///< sampled sup |F(w)-F(v)| / |w-v|
    std::optional<double> linear_growth_ratio;  ///< sampled sup |F(v)| / |v| (inf if F(0) != 0)
    bool passed = false;
    std::vector<std::string> failures;
};

/// Sampled check of the declared growth class. Samples are discrete functions; the
/// L2 norm uses `mass`, the sup-norm proxy is the largest nodal magnitude.
GrowthReport verify_growth_bounds(const NonlinearSource& f, std::span<const Vector> samples,
                                  const SparseMatrix& mass, double t = 0.0);

/// Scalar samples, each read as a constant function on a unit-measure domain.
GrowthReport verify_growth_bounds(const NonlinearSource& f, std::span<const double> samples,
                                  double t = 0.0);

}  // namespace nafem
