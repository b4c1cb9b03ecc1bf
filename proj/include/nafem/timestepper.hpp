#pragma once

#include "nafem/analytic.hpp"
#include "nafem/assembly.hpp"
#include "nafem/linalg.hpp"
#include "nafem/nonlinearity.hpp"
#include "nafem/projections.hpp"

#include <vector>

namespace nafem {

/// Uniform time grid start = t_0 < ... < t_steps = end.
struct TimeGrid {
    double start = 0.0;
    double end = 0.0;
    double dt = 0.0;
    long steps = 0;

    /// Exactly `steps` steps; zero steps only when start == end.
    static TimeGrid uniform(double start, double end, long steps);
    /// Smallest step count whose step does not exceed `dt_target`.
    static TimeGrid with_target_step(double start, double end, double dt_target);
};

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;

    /// State stored at time t (to 1e-12); throws ConfigError if absent.
    [[nodiscard]] const StateVector& at(double t) const;
};

/// One implicit-midpoint step
///     (M + dt/2 S(t_mid)) u_next = (M - dt/2 S(t_mid)) u + dt g.
/// Reassembles and refactors only when t_mid or dt demands it.
class MidpointStepper {
public:
    explicit MidpointStepper(const AssembledSystem& system);

    void prepare(double t_mid, double dt);
    /// `forcing` is g (already M-weighted); nullptr for the homogeneous step.
    [[nodiscard]] Vector advance(const Vector& u, const Vector* forcing) const;

    [[nodiscard]] double dt() const { return dt_; }

private:
    const AssembledSystem& system_;
    bool autonomous_;
    SparseMatrix s_, lhs_, rhs_;
    FactoredSolver solver_;
    double dt_ = -1.0;
    double t_mid_ = 0.0;
};

/// U_h(end, start) v. Throws NumericalError when a step grows the M-norm by more
/// than 1 + 10 dt on a coercive field.
StateVector evolve_homogeneous(const AssembledSystem& system, const StateVector& v,
                               const TimeGrid& grid);

/// Integrates M u' = -S(t)u + M I_h F(t,u) + b(t), b the load of `extra_source` (if set).
/// F enters through a two-step extrapolation to the midpoint, followed by up to three
/// fixed-point sweeps when the correction exceeds dt^3.
///
/// The result holds u at each checkpoint (sorted, inside [start, end]) and at `end`.
/// Checkpoints split the grid; each piece is stepped uniformly with a step <= grid.dt.
Trajectory evolve_semilinear(const AssembledSystem& system, const NonlinearSource& f,
                             const StateVector& u0, const TimeGrid& grid,
                             const SpaceTimeFunction& extra_source = {},
                             std::vector<double> checkpoints = {});

/// Dense U_h(end, start) on the retained dofs; column k is evolve_homogeneous(e_k).
DenseMatrix evolution_matrix(const AssembledSystem& system, const TimeGrid& grid,
                             Eigen::Index dense_cap = kDefaultDenseCap);

}  // namespace nafem
