#pragma once

#include "nafem/coefficients.hpp"
#include "nafem/linalg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nafem {

enum class StudyKind { Manufactured, Nonsmooth, Lemma, Smoothing };
enum class TEvalRule { Fixed, H, HSquared };
enum class DtRule { Auto, QuarterHSquared, Fixed };
enum class OutputFormat { Csv, Json };

std::string_view to_string(StudyKind kind);
std::string_view to_string(TEvalRule rule);
std::string_view to_string(DtRule rule);
std::string_view to_string(OutputFormat format);

StudyKind parse_study_kind(std::string_view text);
TEvalRule parse_teval_rule(std::string_view text);
DtRule parse_dt_rule(std::string_view text);
OutputFormat parse_output_format(std::string_view text);

struct ExperimentConfig {
    StudyKind study = StudyKind::Manufactured;
    int dim = 1;
    std::vector<int> levels{8, 16, 32, 64};
    std::string field = "drifting";
    /// Coefficient expressions (q11, q12, q21, q22, q1, q2, q0). Non-empty overrides `field`.
    std::map<std::string, std::string> expressions;
    BoundarySpec bc;
    std::string nonlinearity = "allen_cahn";
    double beta = 1.0;
    double eps = 0.05;
    double lemma_gamma = 0.0;
    TEvalRule teval_rule = TEvalRule::Fixed;
    double t_eval = 1.0;
    DtRule dt_rule = DtRule::Auto;
    double dt = 1e-3;  ///< used by DtRule::Fixed
    double tau = 0.25;
    double t = 0.75;
    double horizon = 1.0;
    std::optional<int> reference_level;
    double probe_tau_min = 1e-3;
    double probe_tau_max = 1e-1;
    int probe_points = 9;
    std::uint64_t seed = 42;
    std::string out;
    OutputFormat format = OutputFormat::Csv;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;

    [[nodiscard]] CoefficientField make_field() const;
    [[nodiscard]] double step_for(double h) const;
    [[nodiscard]] double evaluation_time(double h) const;
};

struct ErrorRow {
    int level = 0;
    double h = 0.0;
    double dt = 0.0;
    double t_eval = 0.0;
    double error_l2 = 0.0;
    std::optional<double> eoc;
};

/// Fixed-h sweep over shrinking t - tau.
struct SweepRow {
    double elapsed = 0.0;  ///< t - tau
    double error_l2 = 0.0;
    std::optional<double> ratio;  ///< error(elapsed) / error(2 elapsed)
};

struct ErrorTable {
    ExperimentConfig config;
    std::vector<ErrorRow> rows;
    std::vector<SweepRow> sweep;
    /// Set when a level failed; `rows` then holds the completed levels.
    std::optional<std::string> aborted;

    [[nodiscard]] std::optional<double> final_eoc() const;
};

struct SmoothingRow {
    double tau = 0.0;
    double norm = 0.0;
    bool in_fit = false;
};

struct SmoothingTable {
    ExperimentConfig config;
    int level = 0;
    double start = 0.0;
    double lambda_min = 0.0;
    double alpha = 0.0;  ///< minus the fitted log-log slope
    std::vector<SmoothingRow> rows;
};

/// orders_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
std::vector<double> compute_eoc(const std::vector<double>& errors, const std::vector<double>& hs);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

ErrorTable run_manufactured_study(const ExperimentConfig& config);
ErrorTable run_nonsmooth_study(const ExperimentConfig& config);
ErrorTable run_lemma_study(const ExperimentConfig& config);
SmoothingTable run_smoothing_probe(const ExperimentConfig& config);

/// Ritz-projection errors of sin(pi x) (sin(pi x) sin(pi y) in 2D) over the levels.
struct RitzRow {
    int level = 0;
    double h = 0.0;
    double error_l2 = 0.0;
    double error_h1 = 0.0;
};
std::vector<RitzRow> run_ritz_study(const ExperimentConfig& config, double t);

/// Quadrature for the right-hand sides a(t)(v, phi_k) and (A(t)v, phi_k).
enum class LoadQuadrature { Assembly, Accurate };

/// Discrete L2 norm of M^{-1} S(t) R_h(t) v + P_h(A(t) v) for the smooth sine mode, and
/// the L2 norm of P_h A(t) v for scale. The identity is exact for exact loads, so the
/// residual measures the load quadrature (Assembly) or rounding (Accurate).
struct IdentityResidual {
    int level = 0;
    double t = 0.0;
    double residual = 0.0;
    double scale = 0.0;
};
IdentityResidual operator_identity_residual(const ExperimentConfig& config, int level, double t,
                                            LoadQuadrature quadrature = LoadQuadrature::Accurate);

}  // namespace nafem
