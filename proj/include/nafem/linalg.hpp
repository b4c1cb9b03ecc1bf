#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <vector>

namespace nafem {

/// Compressed row storage; column indices sorted within each row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

inline constexpr double kDefaultSolveTol = 1e-10;
inline constexpr Eigen::Index kDefaultDenseCap = 2048;

/// Thomas algorithm for tridiagonal systems, no pivoting.
template <typename Scalar>
class TridiagonalLu {
public:
    using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    TridiagonalLu() = default;

    /// `lower(i)` couples row i to i-1 (lower(0) unused), `upper(i)` row i to i+1.
    void factorize(const VectorType& lower, const VectorType& diag, const VectorType& upper) {
        const Eigen::Index n = diag.size();
        lower_ = lower;
        upper_ = upper;
        pivot_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            pivot_(i) = diag(i);
            if (i > 0) {
                pivot_(i) -= lower_(i) * upper_(i - 1) / pivot_(i - 1);
            }
        }
    }

    [[nodiscard]] Eigen::Index size() const { return pivot_.size(); }
    [[nodiscard]] bool nonsingular() const { return (pivot_.array() != Scalar(0)).all(); }

    [[nodiscard]] VectorType solve(const VectorType& rhs) const {
        const Eigen::Index n = pivot_.size();
        VectorType y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            y(i) = rhs(i);
            if (i > 0) {
                y(i) -= lower_(i) / pivot_(i - 1) * y(i - 1);
            }
        }
        VectorType x(n);
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            x(i) = y(i);
            if (i + 1 < n) {
                x(i) -= upper_(i) * x(i + 1);
            }
            x(i) /= pivot_(i);
        }
        return x;
    }

private:
    VectorType lower_, upper_, pivot_;
};

[[nodiscard]] bool is_tridiagonal(const SparseMatrix& a);
[[nodiscard]] bool is_symmetric(const SparseMatrix& a, double rel_tol = 1e-12);

/// Solves an SPD system to relative residual `tol`: banded direct solve for
/// tridiagonal matrices, Jacobi-preconditioned CG (cap 10 n iterations) otherwise.
/// Throws SolverError with the final residual on failure.
Vector solve_spd(const SparseMatrix& m, const Vector& b, double tol = kDefaultSolveTol);

/// Same contract for general square systems (BiCGSTAB for non-tridiagonal,
/// CG when the matrix is symmetric).
Vector solve_general(const SparseMatrix& a, const Vector& b, double tol = kDefaultSolveTol);

/// Factor once, solve many. Used by the time integrators where the same
/// matrix serves several right-hand sides.
class FactoredSolver {
public:
    explicit FactoredSolver(double tol = kDefaultSolveTol) : tol_(tol) {}

    void factorize(const SparseMatrix& a);
    [[nodiscard]] Vector solve(const Vector& b) const;

private:
    double tol_;
    SparseMatrix a_;
    bool tridiagonal_ = false;
    bool analyzed_ = false;
    TridiagonalLu<double> tri_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

struct GeneralizedEigenpairs {
    Vector eigenvalues;        ///< ascending
    DenseMatrix eigenvectors;  ///< columns, M-orthonormal
};

/// Dense solution of S v = lambda M v for symmetric S and SPD M.
/// Problems larger than `dense_cap` unknowns are rejected.
GeneralizedEigenpairs generalized_symmetric_eig(const SparseMatrix& s, const SparseMatrix& m,
                                                Eigen::Index dense_cap = kDefaultDenseCap);

[[nodiscard]] inline double m_inner(const SparseMatrix& m, const Vector& u, const Vector& v) {
    return u.dot(m * v);
}

[[nodiscard]] inline double m_norm(const SparseMatrix& m, const Vector& v) {
    return std::sqrt(std::max(0.0, v.dot(m * v)));
}

/// Operator norm of X induced by the M-inner product, by power iteration
/// on the M-adjoint product.
double m_operator_norm(const SparseMatrix& m, const DenseMatrix& x, int max_iterations = 2000,
                       double rel_tol = 1e-13);

}  // namespace nafem
