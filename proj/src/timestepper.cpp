#include "nafem/timestepper.hpp"

#include "nafem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nafem {

namespace {

constexpr double kTimeTol = 1e-12;
constexpr int kMaxCorrections = 3;
constexpr double kCorrectionTol = 1e-12;

long steps_for(double length, double dt_target) {
    if (length <= 0.0) {
        return 0;
    }
    return std::max(1L, static_cast<long>(std::ceil(length / dt_target - 1e-9)));
}

bool growth_guard_applies(const AssembledSystem& system, const TimeGrid& grid) {
    const BoundarySpec& bc = system.space().bc();
    if (!bc.is_dirichlet() && bc.alpha0 < 0.0) {
        return false;
    }
    const int per_axis = 9;
    const SampleGrid sample = default_sample_grid(system.field().dim, 1.0, per_axis);
    std::vector<double> times;
    for (int i = 0; i < per_axis; ++i) {
        times.push_back(grid.start + (grid.end - grid.start) * i / (per_axis - 1));
    }
    return check_ellipticity(system.field(), times, sample.points) > 0.0;
}

void check_growth(const SparseMatrix& m, const Vector& before, const Vector& after, double dt,
                  double t) {
    const double n0 = m_norm(m, before);
    const double n1 = m_norm(m, after);
    if (n1 > (1.0 + 10.0 * dt) * n0) {
        std::ostringstream os;
        os << "step at t=" << t << " grew the M-norm by factor " << n1 / n0
           << " (dt=" << dt << " too large?)";
        throw NumericalError(os.str());
    }
}

// Advances every column of `states` through the grid with the homogeneous step.
void propagate_homogeneous(const AssembledSystem& system, std::vector<Vector>& states,
                           const TimeGrid& grid) {
    if (grid.steps == 0) {
        return;
    }
    const bool guard = growth_guard_applies(system, grid);
    MidpointStepper stepper(system);
    for (long m = 0; m < grid.steps; ++m) {
        const double t_mid = grid.start + (static_cast<double>(m) + 0.5) * grid.dt;
        stepper.prepare(t_mid, grid.dt);
        for (Vector& u : states) {
            Vector next = stepper.advance(u, nullptr);
            if (guard) {
                check_growth(system.mass(), u, next, grid.dt, t_mid);
            }
            u = std::move(next);
        }
    }
}

}  // namespace

TimeGrid TimeGrid::uniform(double start, double end, long steps) {
    if (!std::isfinite(start) || !std::isfinite(end) || end < start) {
        throw ConfigError("time grid needs finite start <= end");
    }
    if (steps < 0 || (steps == 0 && end != start) || (steps > 0 && end == start)) {
        throw ConfigError("time grid step count inconsistent with its interval");
    }
    TimeGrid g{start, end, 0.0, steps};
    g.dt = steps > 0 ? (end - start) / static_cast<double>(steps) : 0.0;
    return g;
}

TimeGrid TimeGrid::with_target_step(double start, double end, double dt_target) {
    if (!(dt_target > 0.0) || !std::isfinite(dt_target)) {
        throw ConfigError("time step must be positive");
    }
    if (!std::isfinite(start) || !std::isfinite(end) || end < start) {
        throw ConfigError("time grid needs finite start <= end");
    }
    TimeGrid g = uniform(start, end, steps_for(end - start, dt_target));
    if (g.steps == 0) {
        g.dt = dt_target;
    }
    return g;
}

const StateVector& Trajectory::at(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (std::abs(times[i] - t) <= kTimeTol * std::max(1.0, std::abs(t))) {
            return states[i];
        }
    }
    std::ostringstream os;
    os << "trajectory has no checkpoint at t=" << t;
    throw ConfigError(os.str());
}

MidpointStepper::MidpointStepper(const AssembledSystem& system)
    : system_(system), autonomous_(system.field().is_autonomous()) {
    s_ = system.space().zero_pattern();
    lhs_ = s_;
    rhs_ = s_;
}

void MidpointStepper::prepare(double t_mid, double dt) {
    if (dt == dt_ && (autonomous_ || t_mid == t_mid_)) {
        return;
    }
    if (!autonomous_ || dt_ < 0.0) {
        system_.stiffness_into(t_mid, s_);
    }
    const SparseMatrix& m = system_.mass();
    const double half = 0.5 * dt;
    const Eigen::Index nnz = s_.nonZeros();
    const double* mv = m.valuePtr();
    const double* sv = s_.valuePtr();
    double* lv = lhs_.valuePtr();
    double* rv = rhs_.valuePtr();
    for (Eigen::Index i = 0; i < nnz; ++i) {
        lv[i] = mv[i] + half * sv[i];
        rv[i] = mv[i] - half * sv[i];
    }
    solver_.factorize(lhs_);
    dt_ = dt;
    t_mid_ = t_mid;
}

Vector MidpointStepper::advance(const Vector& u, const Vector* forcing) const {
    Vector b = rhs_ * u;
    if (forcing != nullptr) {
        b += dt_ * *forcing;
    }
    return solver_.solve(b);
}

StateVector evolve_homogeneous(const AssembledSystem& system, const StateVector& v,
                               const TimeGrid& grid) {
    require_on(system.space(), v);
    std::vector<Vector> states{v.values};
    propagate_homogeneous(system, states, grid);
    return StateVector{v.mesh_id, std::move(states.front())};
}

Trajectory evolve_semilinear(const AssembledSystem& system, const NonlinearSource& f,
                             const StateVector& u0, const TimeGrid& grid,
                             const SpaceTimeFunction& extra_source,
                             std::vector<double> checkpoints) {
    require_on(system.space(), u0);
    std::sort(checkpoints.begin(), checkpoints.end());
    for (double c : checkpoints) {
        if (!(c >= grid.start - kTimeTol) || !(c <= grid.end + kTimeTol)) {
            std::ostringstream os;
            os << "checkpoint t=" << c << " outside [" << grid.start << ", " << grid.end << "]";
            throw ConfigError(os.str());
        }
    }
    std::vector<double> marks;
    for (double c : checkpoints) {
        const double clamped = std::clamp(c, grid.start, grid.end);
        if (marks.empty() || clamped - marks.back() > kTimeTol) {
            marks.push_back(clamped);
        }
    }
    if (marks.empty() || grid.end - marks.back() > kTimeTol) {
        marks.push_back(grid.end);
    }

    const SparseMatrix& m = system.mass();
    const bool forced = !f.is_zero() || static_cast<bool>(extra_source);
    MidpointStepper stepper(system);
    Trajectory out;

    Vector u = u0.values;
    Vector u_prev;
    double dt_prev = 0.0;
    Vector f_used, f_new, g;
    double seg_start = grid.start;

    for (double mark : marks) {
        const double len = mark - seg_start;
        long steps = 0;
        double dt = 0.0;
        if (len > kTimeTol) {
            const bool whole = seg_start == grid.start && mark == grid.end;
            steps = whole ? grid.steps : steps_for(len, grid.dt);
            dt = whole ? grid.dt : len / static_cast<double>(steps);
        }
        for (long k = 0; k < steps; ++k) {
            const double t_mid = seg_start + (static_cast<double>(k) + 0.5) * dt;
            stepper.prepare(t_mid, dt);
            if (!forced) {
                Vector next = stepper.advance(u, nullptr);
                u_prev = std::move(u);
                u = std::move(next);
                dt_prev = dt;
                continue;
            }
            Vector predictor = u;
            if (dt_prev > 0.0) {
                predictor += (0.5 * dt / dt_prev) * (u - u_prev);
            }
            if (!f.is_zero()) {
                nemytskii_apply(f, t_mid, predictor, f_used);
            }
            const Vector load = extra_source ? system.space().load(extra_source, t_mid)
                                             : Vector::Zero(u.size());
            auto build = [&](const Vector& fvals) {
                Vector rhs = load;
                if (!f.is_zero()) {
                    rhs += m * fvals;
                }
                return rhs;
            };
            g = build(f_used);
            Vector next = stepper.advance(u, &g);
            if (!f.is_zero()) {
                nemytskii_apply(f, t_mid, Vector(0.5 * (u + next)), f_new);
                double change = m_norm(m, f_new - f_used);
                if (change > dt * dt * dt) {
                    for (int sweep = 0; sweep < kMaxCorrections && change > kCorrectionTol;
                         ++sweep) {
                        f_used = f_new;
                        g = build(f_used);
                        next = stepper.advance(u, &g);
                        nemytskii_apply(f, t_mid, Vector(0.5 * (u + next)), f_new);
                        change = m_norm(m, f_new - f_used);
                    }
                }
            }
            u_prev = std::move(u);
            u = std::move(next);
            dt_prev = dt;
        }
        out.times.push_back(mark);
        out.states.push_back(StateVector{u0.mesh_id, u});
        seg_start = mark;
    }
    return out;
}

DenseMatrix evolution_matrix(const AssembledSystem& system, const TimeGrid& grid,
                             Eigen::Index dense_cap) {
    const int n = system.num_dofs();
    if (n > dense_cap) {
        throw ConfigError("evolution matrix size " + std::to_string(n) + " exceeds dense cap " +
                          std::to_string(dense_cap));
    }
    std::vector<Vector> states;
    states.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        states.push_back(Vector::Unit(n, k));
    }
    propagate_homogeneous(system, states, grid);
    DenseMatrix out(n, n);
    for (int k = 0; k < n; ++k) {
        out.col(k) = states[static_cast<std::size_t>(k)];
    }
    return out;
}

}  // namespace nafem
