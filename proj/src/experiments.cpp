#include "nafem/experiments.hpp"

#include "nafem/analytic.hpp"
#include "nafem/assembly.hpp"
#include "nafem/errors.hpp"
#include "nafem/mesh.hpp"
#include "nafem/nonlinearity.hpp"
#include "nafem/projections.hpp"
#include "nafem/timestepper.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace nafem {

std::string_view to_string(StudyKind kind) {
    switch (kind) {
    case StudyKind::Manufactured: return "manufactured";
    case StudyKind::Nonsmooth: return "nonsmooth";
    case StudyKind::Lemma: return "lemma";
    case StudyKind::Smoothing: return "smoothing";
    }
    return "?";
}

std::string_view to_string(TEvalRule rule) {
    switch (rule) {
    case TEvalRule::Fixed: return "fixed";
    case TEvalRule::H: return "h";
    case TEvalRule::HSquared: return "hsq";
    }
    return "?";
}

std::string_view to_string(DtRule rule) {
    switch (rule) {
    case DtRule::Auto: return "auto";
    case DtRule::QuarterHSquared: return "hsq";
    case DtRule::Fixed: return "fixed";
    }
    return "?";
}

std::string_view to_string(OutputFormat format) {
    return format == OutputFormat::Csv ? "csv" : "json";
}

StudyKind parse_study_kind(std::string_view text) {
    for (StudyKind k : {StudyKind::Manufactured, StudyKind::Nonsmooth, StudyKind::Lemma,
                        StudyKind::Smoothing}) {
        if (text == to_string(k)) return k;
    }
    throw ConfigError("unknown study '" + std::string(text) +
                      "' (known: manufactured, nonsmooth, lemma, smoothing)");
}

TEvalRule parse_teval_rule(std::string_view text) {
    for (TEvalRule r : {TEvalRule::Fixed, TEvalRule::H, TEvalRule::HSquared}) {
        if (text == to_string(r)) return r;
    }
    throw ConfigError("unknown t_eval rule '" + std::string(text) + "' (known: fixed, h, hsq)");
}

DtRule parse_dt_rule(std::string_view text) {
    for (DtRule r : {DtRule::Auto, DtRule::QuarterHSquared, DtRule::Fixed}) {
        if (text == to_string(r)) return r;
    }
    throw ConfigError("unknown dt rule '" + std::string(text) + "' (known: auto, hsq, fixed)");
}

OutputFormat parse_output_format(std::string_view text) {
    if (text == "csv") return OutputFormat::Csv;
    if (text == "json") return OutputFormat::Json;
    throw ConfigError("unknown output format '" + std::string(text) + "' (known: csv, json)");
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (dim != 1 && dim != 2) fail("dim must be 1 or 2");
    if (levels.empty()) fail("at least one level is required");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 2) fail("levels must be >= 2");
        if (i > 0 && levels[i] <= levels[i - 1]) fail("levels must be strictly increasing");
    }
    if (!(beta > 0.0 && beta <= 2.0)) fail("beta must lie in (0, 2]");
    if (!(eps > 0.0) || !std::isfinite(eps)) fail("eps must be positive");
    if (!(lemma_gamma >= 0.0 && lemma_gamma <= 2.0)) fail("gamma must lie in [0, 2]");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("T must be positive");
    if (teval_rule == TEvalRule::Fixed && !(t_eval > 0.0 && t_eval <= horizon)) {
        fail("t_eval must lie in (0, T]");
    }
    if (dt_rule == DtRule::Fixed && (!(dt > 0.0) || !std::isfinite(dt))) fail("dt must be positive");
    if (!(tau >= 0.0) || !std::isfinite(tau)) fail("tau must be >= 0");
    if (!(t > tau) || !(t <= horizon)) fail("t must satisfy tau < t <= T");
    if (!(probe_tau_min > 0.0 && probe_tau_max > probe_tau_min)) {
        fail("probe range needs 0 < probe_tau_min < probe_tau_max");
    }
    if (probe_points < 2) fail("probe_points must be >= 2");
    if (reference_level && *reference_level < 2 * levels.back()) {
        fail("reference level must be at least twice the finest level");
    }
    if (!bc.is_dirichlet() && !std::isfinite(bc.alpha0)) fail("alpha0 must be finite");
    (void)NonlinearSource::from_name(nonlinearity);
    (void)make_field();
}

CoefficientField ExperimentConfig::make_field() const {
    if (!expressions.empty()) {
        return field_from_expressions(dim, expressions);
    }
    return catalog_field(field, dim, horizon);
}

double ExperimentConfig::step_for(double h) const {
    switch (dt_rule) {
    case DtRule::Auto: return std::min(h * h / 4.0, 1e-3);
    case DtRule::QuarterHSquared: return h * h / 4.0;
    case DtRule::Fixed: return dt;
    }
    return dt;
}

double ExperimentConfig::evaluation_time(double h) const {
    switch (teval_rule) {
    case TEvalRule::Fixed: return t_eval;
    case TEvalRule::H: return h;
    case TEvalRule::HSquared: return h * h;
    }
    return t_eval;
}

std::optional<double> ErrorTable::final_eoc() const {
    if (rows.empty()) return std::nullopt;
    return rows.back().eoc;
}

std::vector<double> compute_eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
    if (errors.size() != hs.size()) {
        throw ConfigError("errors and mesh sizes differ in length");
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
            throw ConfigError("errors must be positive and finite");
        }
        if (!(hs[i] > 0.0)) {
            throw ConfigError("mesh sizes must be positive");
        }
        if (i > 0 && !(hs[i] < hs[i - 1])) {
            throw ConfigError("mesh sizes must be strictly decreasing");
        }
    }
    std::vector<double> orders;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        orders.push_back(std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]));
    }
    return orders;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ConfigError("slope fit needs at least two paired samples");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw ConfigError("log-log fit needs positive samples");
        }
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) {
        throw ConfigError("slope fit needs distinct abscissae");
    }
    return (n * sxy - sx * sy) / denom;
}

namespace {

// probe times with tau * lambda_min above this sit on the plateau
constexpr double kFitWindow = 0.25;

struct Level {
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const FeSpace> space;
    std::shared_ptr<const AssembledSystem> system;
};

Level make_level(const ExperimentConfig& config, const CoefficientField& field, int n) {
    Level l;
    l.mesh = std::make_shared<const Mesh>(config.dim == 1 ? uniform_interval_mesh(n)
                                                          : structured_square_mesh(n));
    l.space = make_space(*l.mesh, config.bc);
    l.system = std::make_shared<const AssembledSystem>(l.space, field);
    return l;
}

void fill_eoc(ErrorTable& table) {
    std::vector<double> errors, hs;
    for (const ErrorRow& r : table.rows) {
        errors.push_back(r.error_l2);
        hs.push_back(r.h);
    }
    if (table.rows.size() < 2) return;
    const std::vector<double> orders = compute_eoc(errors, hs);
    for (std::size_t i = 0; i < orders.size(); ++i) {
        table.rows[i + 1].eoc = orders[i];
    }
}

std::string level_failure(int n, const std::exception& e) {
    std::ostringstream os;
    os << "level " << n << " failed: " << e.what();
    return os.str();
}

int reference_resolution(const ExperimentConfig& config) {
    const int finest = config.levels.back();
    const int n_ref = config.reference_level.value_or(4 * finest);
    if (n_ref < 2 * finest) {
        throw ConfigError("reference resolution insufficient: need n_ref >= " +
                          std::to_string(2 * finest));
    }
    for (int n : config.levels) {
        if (n_ref % n != 0) {
            throw ConfigError("reference level " + std::to_string(n_ref) +
                              " is not a multiple of level " + std::to_string(n));
        }
    }
    return n_ref;
}

}  // namespace

ErrorTable run_manufactured_study(const ExperimentConfig& config) {
    config.validate();
    if (!config.bc.is_dirichlet()) {
        throw ConfigError("the manufactured study needs Dirichlet boundary conditions");
    }
    ErrorTable table{config, {}, {}, std::nullopt};
    const CoefficientField field = config.make_field();
    const NonlinearSource f = NonlinearSource::from_name(config.nonlinearity);
    const SmoothFunction u = decaying_sine_mode(config.dim);
    const SpaceTimeFunction source =
        manufactured_source(field, u, [f](double t, double v) { return f(t, v); });

    for (int n : config.levels) {
        try {
            const Level level = make_level(config, field, n);
            const double h = level.mesh->h();
            const double t_eval = config.evaluation_time(h);
            const TimeGrid grid = TimeGrid::with_target_step(0.0, t_eval, config.step_for(h));
            const StateVector u0 = l2_project(*level.space, u.value, 0.0);
            const Trajectory traj = evolve_semilinear(*level.system, f, u0, grid, source);
            const Vector exact = level.space->interpolate(u.value, t_eval);
            const double err = m_norm(level.space->mass(), traj.states.back().values - exact);
            table.rows.push_back({n, h, grid.dt, t_eval, err, std::nullopt});
        } catch (const NumericalError& e) {
            table.aborted = level_failure(n, e);
            break;
        }
    }
    fill_eoc(table);
    return table;
}

ErrorTable run_nonsmooth_study(const ExperimentConfig& config) {
    config.validate();
    ErrorTable table{config, {}, {}, std::nullopt};
    const int n_ref = reference_resolution(config);
    const CoefficientField field = config.make_field();
    const NonlinearSource f = NonlinearSource::from_name(config.nonlinearity);

    const Level ref = make_level(config, field, n_ref);
    const SpectralBasis basis = SpectralBasis::compute(*ref.system, 0.0);
    const StateVector u0_ref = make_initial_data(basis, config.beta, config.eps, config.seed);

    std::vector<Level> levels;
    std::vector<double> t_evals, dts;
    for (int n : config.levels) {
        levels.push_back(make_level(config, field, n));
        const double h = levels.back().mesh->h();
        t_evals.push_back(config.evaluation_time(h));
        dts.push_back(config.step_for(h));
        if (!(t_evals.back() > 0.0 && t_evals.back() <= config.horizon)) {
            throw ConfigError("evaluation time outside (0, T]");
        }
    }
    const double dt_ref = *std::min_element(dts.begin(), dts.end()) / 4.0;
    const double t_end = *std::max_element(t_evals.begin(), t_evals.end());

    Trajectory reference;
    try {
        reference = evolve_semilinear(*ref.system, f, u0_ref,
                                      TimeGrid::with_target_step(0.0, t_end, dt_ref), {}, t_evals);
    } catch (const NumericalError& e) {
        table.aborted = std::string("reference solution failed: ") + e.what();
        return table;
    }

    for (std::size_t i = 0; i < levels.size(); ++i) {
        const Level& level = levels[i];
        const int n = config.levels[i];
        try {
            const StateVector u0 = l2_project(*level.space, *ref.space, u0_ref);
            const TimeGrid grid = TimeGrid::with_target_step(0.0, t_evals[i], dts[i]);
            const Trajectory traj = evolve_semilinear(*level.system, f, u0, grid);
            const StateVector exact =
                restrict_nodal(*level.space, *ref.space, reference.at(t_evals[i]));
            const double err =
                m_norm(level.space->mass(), traj.states.back().values - exact.values);
            table.rows.push_back({n, level.mesh->h(), grid.dt, t_evals[i], err, std::nullopt});
        } catch (const NumericalError& e) {
            table.aborted = level_failure(n, e);
            break;
        }
    }
    fill_eoc(table);
    return table;
}

ErrorTable run_lemma_study(const ExperimentConfig& config) {
    config.validate();
    ErrorTable table{config, {}, {}, std::nullopt};
    const int n_ref = reference_resolution(config);
    const CoefficientField field = config.make_field();
    const NonlinearSource zero = NonlinearSource::zero();
    const double tau = config.tau;
    const double t = config.t;

    const Level ref = make_level(config, field, n_ref);
    const SpectralBasis basis = SpectralBasis::compute(*ref.system, tau);
    const StateVector v_ref = make_graded_data(basis, config.lemma_gamma, config.eps, config.seed);

    std::vector<Level> levels;
    std::vector<double> dts;
    for (int n : config.levels) {
        levels.push_back(make_level(config, field, n));
        dts.push_back(config.step_for(levels.back().mesh->h()));
    }
    const double h_f = levels.back().mesh->h();
    const double dt_f = dts.back();
    const double dt_ref = *std::min_element(dts.begin(), dts.end()) / 4.0;

    // dyadic sweep t - tau, (t - tau)/2, ... kept well above h^2 and the step
    std::vector<double> elapsed{t - tau};
    const double floor = std::max(32.0 * h_f * h_f, 10.0 * dt_f);
    while (elapsed.back() / 2.0 >= floor) {
        elapsed.push_back(elapsed.back() / 2.0);
    }
    std::vector<double> checkpoints;
    for (double s : elapsed) {
        checkpoints.push_back(tau + s);
    }

    Trajectory reference;
    try {
        reference = evolve_semilinear(*ref.system, zero, v_ref,
                                      TimeGrid::with_target_step(tau, t, dt_ref), {}, checkpoints);
    } catch (const NumericalError& e) {
        table.aborted = std::string("reference solution failed: ") + e.what();
        return table;
    }

    Trajectory finest;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const Level& level = levels[i];
        const int n = config.levels[i];
        const bool last = i + 1 == levels.size();
        try {
            const StateVector v = l2_project(*level.space, *ref.space, v_ref);
            const TimeGrid grid = TimeGrid::with_target_step(tau, t, dts[i]);
            Trajectory traj = evolve_semilinear(*level.system, zero, v, grid, {},
                                                last ? checkpoints : std::vector<double>{});
            const StateVector exact = restrict_nodal(*level.space, *ref.space, reference.at(t));
            const double err = m_norm(level.space->mass(), traj.at(t).values - exact.values);
            table.rows.push_back({n, level.mesh->h(), grid.dt, t, err, std::nullopt});
            if (last) finest = std::move(traj);
        } catch (const NumericalError& e) {
            table.aborted = level_failure(n, e);
            break;
        }
    }
    fill_eoc(table);

    if (!table.aborted) {
        const Level& level = levels.back();
        for (std::size_t k = 0; k < elapsed.size(); ++k) {
            const double when = tau + elapsed[k];
            const StateVector exact = restrict_nodal(*level.space, *ref.space, reference.at(when));
            SweepRow row{elapsed[k],
                         m_norm(level.space->mass(), finest.at(when).values - exact.values),
                         std::nullopt};
            if (k > 0) {
                row.ratio = row.error_l2 / table.sweep.back().error_l2;
            }
            table.sweep.push_back(row);
        }
    }
    return table;
}

SmoothingTable run_smoothing_probe(const ExperimentConfig& config) {
    config.validate();
    const CoefficientField field = config.make_field();
    const int n = config.levels.back();
    const Level level = make_level(config, field, n);
    const double s = config.tau;

    SmoothingTable table;
    table.config = config;
    table.level = n;
    table.start = s;

    const SpectralBasis basis = SpectralBasis::compute(*level.system, s);
    table.lambda_min = basis.eigenvalues()(0);
    if (!(table.lambda_min > 0.0)) {
        throw NumericalError("smoothing probe needs a positive spectrum at the start time");
    }

    const SparseMatrix& m = level.space->mass();
    const DenseMatrix sd = DenseMatrix(level.system->stiffness_at(s));
    const Eigen::LLT<DenseMatrix> mass_llt{DenseMatrix(m)};
    const double dt_target = config.step_for(level.mesh->h());

    std::vector<double> fit_tau, fit_norm;
    const double ratio = std::log(config.probe_tau_max / config.probe_tau_min);
    for (int i = 0; i < config.probe_points; ++i) {
        const double tau =
            config.probe_tau_min * std::exp(ratio * i / (config.probe_points - 1));
        const long steps = std::max(20L, static_cast<long>(std::ceil(tau / dt_target - 1e-9)));
        const DenseMatrix u = evolution_matrix(*level.system, TimeGrid::uniform(s, s + tau, steps));
        const DenseMatrix b = mass_llt.solve(sd * u);
        SmoothingRow row{tau, m_operator_norm(m, b), tau * table.lambda_min <= kFitWindow};
        if (row.in_fit) {
            fit_tau.push_back(row.tau);
            fit_norm.push_back(row.norm);
        }
        table.rows.push_back(row);
    }
    if (fit_tau.size() < 2) {
        throw ConfigError("fewer than two probe times fall inside the fit window tau * lambda_min <= 1/4");
    }
    table.alpha = -loglog_slope(fit_tau, fit_norm);
    return table;
}

std::vector<RitzRow> run_ritz_study(const ExperimentConfig& config, double t) {
    config.validate();
    const CoefficientField field = config.make_field();
    const SmoothFunction v = sine_mode(config.dim);
    std::vector<RitzRow> rows;
    for (int n : config.levels) {
        const Level level = make_level(config, field, n);
        const StateVector r = ritz_project(*level.system, t, v);
        rows.push_back({n, level.mesh->h(), l2_distance(*level.space, r.values, v, t),
                        h1_seminorm_distance(*level.space, r.values, v, t)});
    }
    return rows;
}

IdentityResidual operator_identity_residual(const ExperimentConfig& config, int n, double t,
                                            LoadQuadrature quadrature) {
    config.validate();
    if (!config.bc.is_dirichlet()) {
        throw ConfigError("the operator identity check needs Dirichlet boundary conditions");
    }
    const CoefficientField field = config.make_field();
    const Level level = make_level(config, field, n);
    const SmoothFunction v = sine_mode(config.dim);
    const SparseMatrix& m = level.space->mass();
    const QuadratureRule& rule = quadrature == LoadQuadrature::Assembly
                                     ? assembly_rule(config.dim)
                                     : accurate_rule(config.dim);

    const SparseMatrix s = level.system->stiffness_at(t);
    const Vector r = solve_general(s, level.system->elliptic_load(v, t, rule));
    const Vector ah_r = -solve_spd(m, s * r);
    const Vector av_load = level.space->load(
        [&](double time, const Point& x) { return apply_operator(field, v, time, x); }, t, rule);
    const Vector p = solve_spd(m, av_load);
    return {n, t, m_norm(m, ah_r - p), m_norm(m, p)};
}

}  // namespace nafem
