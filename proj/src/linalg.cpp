#include "nafem/linalg.hpp"

#include "nafem/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>

#include <string>

namespace nafem {

namespace {

void check_system(const SparseMatrix& a, const Vector& b) {
    if (a.rows() != a.cols()) {
        throw ConfigError("linear system matrix is not square");
    }
    if (a.rows() != b.size()) {
        throw ConfigError("dimension mismatch: matrix has " + std::to_string(a.rows()) +
                          " rows, right-hand side has " + std::to_string(b.size()) + " entries");
    }
    if (!b.allFinite()) {
        throw NumericalError("right-hand side contains non-finite entries");
    }
}

double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
    const double bnorm = b.norm();
    const double r = (a * x - b).norm();
    return bnorm > 0.0 ? r / bnorm : r;
}

void extract_tridiagonal(const SparseMatrix& a, Vector& lower, Vector& diag, Vector& upper) {
    const Eigen::Index n = a.rows();
    lower = Vector::Zero(n);
    diag = Vector::Zero(n);
    upper = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
            if (it.col() == i - 1) {
                lower(i) = it.value();
            } else if (it.col() == i) {
                diag(i) = it.value();
            } else if (it.col() == i + 1) {
                upper(i) = it.value();
            }
        }
    }
}

Vector sparse_lu_solve(const SparseMatrix& a, const Vector& b) {
    Eigen::SparseMatrix<double> col_major = a;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(col_major);
    if (lu.info() != Eigen::Success) {
        throw SolverError("sparse LU factorization failed", 1.0, 0);
    }
    return lu.solve(b);
}

// Direct path for 1D banded systems; returns false if the residual is not met
// (e.g. a zero pivot), so the caller can fall back.
bool try_tridiagonal(const SparseMatrix& a, const Vector& b, double tol, Vector& x) {
    if (!is_tridiagonal(a)) {
        return false;
    }
    Vector lower, diag, upper;
    extract_tridiagonal(a, lower, diag, upper);
    TridiagonalLu<double> lu;
    lu.factorize(lower, diag, upper);
    if (!lu.nonsingular()) {
        return false;
    }
    x = lu.solve(b);
    return x.allFinite() && relative_residual(a, x, b) <= tol;
}

template <typename Solver>
Vector krylov_solve(const SparseMatrix& a, const Vector& b, double tol, const char* name) {
    Eigen::SparseMatrix<double> col_major = a;
    Solver solver;
    solver.setTolerance(tol);
    solver.setMaxIterations(std::max<Eigen::Index>(10 * a.rows(), 10));
    solver.compute(col_major);
    Vector x = solver.solve(b);
    const double res = x.allFinite() ? relative_residual(a, x, b) : 1.0;
    if (solver.info() != Eigen::Success || res > tol) {
        throw SolverError(std::string(name) + " did not converge", res,
                          static_cast<long>(solver.iterations()));
    }
    return x;
}

}  // namespace

bool is_tridiagonal(const SparseMatrix& a) {
    for (Eigen::Index i = 0; i < a.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
            if (std::abs(it.col() - it.row()) > 1) {
                return false;
            }
        }
    }
    return true;
}

bool is_symmetric(const SparseMatrix& a, double rel_tol) {
    if (a.rows() != a.cols()) {
        return false;
    }
    const SparseMatrix t = a.transpose();
    const double scale = std::max(1.0, a.coeffs().cwiseAbs().maxCoeff());
    const SparseMatrix diff = a - t;
    return diff.nonZeros() == 0 || diff.coeffs().cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Vector solve_spd(const SparseMatrix& m, const Vector& b, double tol) {
    if (!(tol > 0.0)) {
        throw ConfigError("solver tolerance must be positive");
    }
    check_system(m, b);
    Vector x;
    if (try_tridiagonal(m, b, tol, x)) {
        return x;
    }
    return krylov_solve<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                                                 Eigen::Lower | Eigen::Upper>>(m, b, tol, "CG");
}

Vector solve_general(const SparseMatrix& a, const Vector& b, double tol) {
    if (!(tol > 0.0)) {
        throw ConfigError("solver tolerance must be positive");
    }
    check_system(a, b);
    Vector x;
    if (try_tridiagonal(a, b, tol, x)) {
        return x;
    }
    if (is_symmetric(a)) {
        return krylov_solve<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                                                     Eigen::Lower | Eigen::Upper>>(a, b, tol, "CG");
    }
    try {
        return krylov_solve<Eigen::BiCGSTAB<Eigen::SparseMatrix<double>>>(a, b, tol, "BiCGSTAB");
    } catch (const SolverError&) {
        // BiCGSTAB can break down on indefinite advection-dominated systems.
        x = sparse_lu_solve(a, b);
        const double res = relative_residual(a, x, b);
        if (!x.allFinite() || res > tol) {
            throw SolverError("sparse LU fallback failed", res, 0);
        }
        return x;
    }
}

void FactoredSolver::factorize(const SparseMatrix& a) {
    if (a.rows() != a.cols()) {
        throw ConfigError("linear system matrix is not square");
    }
    a_ = a;
    tridiagonal_ = is_tridiagonal(a);
    if (tridiagonal_) {
        Vector lower, diag, upper;
        extract_tridiagonal(a, lower, diag, upper);
        tri_.factorize(lower, diag, upper);
        if (!tri_.nonsingular()) {
            throw SolverError("zero pivot in banded factorization", 1.0, 0);
        }
        return;
    }
    Eigen::SparseMatrix<double> col_major = a;
    if (!analyzed_) {
        lu_.analyzePattern(col_major);
        analyzed_ = true;
    }
    lu_.factorize(col_major);
    if (lu_.info() != Eigen::Success) {
        throw SolverError("sparse LU factorization failed", 1.0, 0);
    }
}

Vector FactoredSolver::solve(const Vector& b) const {
    check_system(a_, b);
    Vector x = tridiagonal_ ? tri_.solve(b) : Vector(lu_.solve(b));
    const double res = x.allFinite() ? relative_residual(a_, x, b) : 1.0;
    if (res > tol_) {
        throw SolverError("factored solve missed tolerance", res, 0);
    }
    return x;
}

GeneralizedEigenpairs generalized_symmetric_eig(const SparseMatrix& s, const SparseMatrix& m,
                                                Eigen::Index dense_cap) {
    if (s.rows() != s.cols() || m.rows() != m.cols() || s.rows() != m.rows()) {
        throw ConfigError("eigenproblem matrices must be square and of equal size");
    }
    if (s.rows() > dense_cap) {
        throw ConfigError("eigenproblem size " + std::to_string(s.rows()) +
                          " exceeds dense cap " + std::to_string(dense_cap));
    }
    if (!is_symmetric(s) || !is_symmetric(m)) {
        throw ConfigError("generalized eigenproblem requires symmetric matrices");
    }
    const DenseMatrix sd = DenseMatrix(s);
    const DenseMatrix md = DenseMatrix(m);
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> solver(
        sd, md, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("generalized eigensolver failed (is M positive definite?)");
    }
    GeneralizedEigenpairs out{solver.eigenvalues(), solver.eigenvectors()};
    for (Eigen::Index k = 0; k < out.eigenvectors.cols(); ++k) {
        const double norm = std::sqrt(out.eigenvectors.col(k).dot(md * out.eigenvectors.col(k)));
        out.eigenvectors.col(k) /= norm;
    }
    return out;
}

double m_operator_norm(const SparseMatrix& m, const DenseMatrix& x, int max_iterations,
                       double rel_tol) {
    const DenseMatrix md = DenseMatrix(m);
    Eigen::LLT<DenseMatrix> llt(md);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("mass matrix is not positive definite");
    }
    const DenseMatrix lower = llt.matrixL();
    // B = L^T X L^{-T} has the same 2-norm as X in the M-inner product.
    const DenseMatrix lt_x = lower.transpose() * x;
    const DenseMatrix b = lower.triangularView<Eigen::Lower>()
                              .solve(lt_x.transpose())
                              .transpose();
    const DenseMatrix btb = b.transpose() * b;

    const Eigen::Index n = btb.rows();
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
    }
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        Vector w = btb * v;
        const double next = v.dot(w);
        const double wn = w.norm();
        if (wn == 0.0) {
            return 0.0;
        }
        v = w / wn;
        if (it > 0 && std::abs(next - estimate) <= rel_tol * std::abs(next)) {
            estimate = next;
            break;
        }
        estimate = next;
    }
    return std::sqrt(std::max(0.0, estimate));
}

}  // namespace nafem
