#pragma once

#include "nafem/analytic.hpp"
#include "nafem/assembly.hpp"
#include "nafem/linalg.hpp"

#include <cstdint>

namespace nafem {

/// Coefficients of a function of V_h at the retained degrees of freedom,
/// tagged with the mesh they live on.
struct StateVector {
    std::uint64_t mesh_id = 0;
    Vector values;

    [[nodiscard]] Eigen::Index size() const { return values.size(); }
};

/// Wraps `values` as a state on `space`, checking length and finiteness.
StateVector make_state(const FeSpace& space, Vector values);

/// Throws ConfigError unless `state` belongs to `space`.
void require_on(const FeSpace& space, const StateVector& state);

/// P_h u: solves M p = (u, phi_k), the load by the accurate quadrature rule.
StateVector l2_project(const FeSpace& space, const SpaceTimeFunction& u, double t,
                       double tol = kDefaultSolveTol);

/// P_h of a P1 function given on a nested finer mesh (exact inner products).
StateVector l2_project(const FeSpace& coarse, const FeSpace& fine, const StateVector& u,
                       double tol = kDefaultSolveTol);

/// Interpolation matrix from coarse nodal values to fine nodal values on nested meshes
/// (rows: fine dofs, columns: coarse dofs).
SparseMatrix prolongation(const FeSpace& coarse, const FeSpace& fine);

/// Fine nodal values restricted to the coarse nodes (exact on nested meshes).
StateVector restrict_nodal(const FeSpace& coarse, const FeSpace& fine, const StateVector& u);

/// R_h(t) v: solves S(t) r = a(t)(v, phi_k). Rejects fields whose sampled
/// ellipticity at t is not positive.
StateVector ritz_project(const AssembledSystem& system, double t, const SmoothFunction& v,
                         double tol = kDefaultSolveTol);

/// R_h(t) applied to an element of V_h.
StateVector ritz_project(const AssembledSystem& system, double t, const StateVector& chi,
                         double tol = kDefaultSolveTol);

/// Eigenpairs of the discrete operator -A_h(t0): S(t0) psi = lambda M psi, with
/// M-orthonormal eigenvectors. Realizes fractional powers on a reference mesh.
class SpectralBasis {
public:
    static SpectralBasis compute(const AssembledSystem& system, double t0 = 0.0,
                                 Eigen::Index dense_cap = kDefaultDenseCap);

    [[nodiscard]] const Vector& eigenvalues() const { return eigenvalues_; }
    [[nodiscard]] const DenseMatrix& eigenvectors() const { return eigenvectors_; }
    [[nodiscard]] const SparseMatrix& mass() const { return mass_; }
    [[nodiscard]] std::uint64_t mesh_id() const { return mesh_id_; }
    [[nodiscard]] Eigen::Index size() const { return eigenvalues_.size(); }

    /// Coordinates <v, psi_k>_M.
    [[nodiscard]] Vector coordinates(const Vector& v) const;

private:
    Vector eigenvalues_;
    DenseMatrix eigenvectors_;
    SparseMatrix mass_;
    std::uint64_t mesh_id_ = 0;
};

/// (-A_h(t0))^s v = sum_k lambda_k^s <v, psi_k>_M psi_k, for s >= -1.
StateVector fractional_apply(const SpectralBasis& basis, double s, const StateVector& v);

/// u0 = sum_k c_k psi_k, |c_k| = lambda_k^(-beta/2 - 1/4 - eps/2), signs drawn from `seed`.
/// Places u0 just inside D((-A(0))^(beta/2)). Requires beta in (0, 2], eps > 0.
StateVector make_initial_data(const SpectralBasis& basis, double beta, double eps,
                              std::uint64_t seed);

/// Same construction for any regularity index in [0, 2]; regularity 0 gives data in H only.
StateVector make_graded_data(const SpectralBasis& basis, double regularity, double eps,
                             std::uint64_t seed);

/// Continuous L2 and H^1-seminorm distances between a discrete function and a smooth one,
/// by high-order quadrature.
double l2_distance(const FeSpace& space, const Vector& values, const SmoothFunction& u, double t);
double h1_seminorm_distance(const FeSpace& space, const Vector& values, const SmoothFunction& u,
                            double t);

}  // namespace nafem
