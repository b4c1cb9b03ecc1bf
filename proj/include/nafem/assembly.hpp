#pragma once

#include "nafem/analytic.hpp"
#include "nafem/coefficients.hpp"
#include "nafem/linalg.hpp"
#include "nafem/mesh.hpp"
#include "nafem/quadrature.hpp"

#include <array>
#include <memory>
#include <vector>

namespace nafem {

/// P1 space V_h on a mesh with boundary treatment. Dirichlet nodes are
/// eliminated; with Robin conditions every node is a degree of freedom.
///
/// All matrices produced on one space share a single sparsity pattern, so
/// time integrators can combine them value-by-value.
class FeSpace {
public:
    FeSpace(std::shared_ptr<const Mesh> mesh, BoundarySpec bc);

    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    [[nodiscard]] const BoundarySpec& bc() const { return bc_; }

    [[nodiscard]] int num_dofs() const { return static_cast<int>(node_of_dof_.size()); }
    [[nodiscard]] int dof_of_node(int node) const { return dof_of_node_[static_cast<std::size_t>(node)]; }
    [[nodiscard]] int node_of_dof(int dof) const { return node_of_dof_[static_cast<std::size_t>(dof)]; }

    /// Gram matrix of the retained basis functions.
    [[nodiscard]] const SparseMatrix& mass() const { return mass_; }

    /// Copy of the shared pattern with all stored values zero.
    [[nodiscard]] SparseMatrix zero_pattern() const;

    /// b_k = integral of f(t, .) phi_k by the assembly quadrature.
    [[nodiscard]] Vector load(const SpaceTimeFunction& f, double t) const;
    [[nodiscard]] Vector load(const SpaceTimeFunction& f, double t, const QuadratureRule& rule) const;

    /// Nodal values at the retained degrees of freedom.
    [[nodiscard]] Vector interpolate(const SpaceTimeFunction& f, double t) const;

    /// Stiffness of the Laplacian plus mass: the Gram matrix of the H^1 inner product.
    [[nodiscard]] SparseMatrix h1_gram() const;

    // Element-level plumbing shared by the assemblers.
    struct ElementFrame {
        double measure = 0.0;
        int vertices = 0;
        std::array<Point, 3> corners;
        std::array<Eigen::Vector2d, 3> grads;  ///< gradients of the barycentric coordinates
        std::array<int, 3> dofs{-1, -1, -1};

        [[nodiscard]] Point map(const std::array<double, 3>& bary) const;
    };

    struct BoundaryFacet {
        int element = 0;
        std::array<int, 2> local{0, 0};  ///< local vertex indices; 1D facets use local[0] only
        int vertices = 1;
        double length = 1.0;
        Eigen::Vector2d normal = Eigen::Vector2d::Zero();
    };

    [[nodiscard]] const ElementFrame& frame(int e) const { return frames_[static_cast<std::size_t>(e)]; }
    /// Positions of the local (k, l) pairs in the value array; -1 when eliminated.
    [[nodiscard]] const std::array<int, 9>& slots(int e) const { return slots_[static_cast<std::size_t>(e)]; }
    [[nodiscard]] const std::vector<BoundaryFacet>& boundary_facets() const { return facets_; }

private:
    std::shared_ptr<const Mesh> mesh_;
    BoundarySpec bc_;
    std::vector<int> dof_of_node_;
    std::vector<int> node_of_dof_;
    std::vector<ElementFrame> frames_;
    std::vector<std::array<int, 9>> slots_;
    std::vector<BoundaryFacet> facets_;
    SparseMatrix pattern_;
    SparseMatrix mass_;
};

/// Space plus coefficient field: realizes the bilinear form a(t) on V_h.
///
/// Sign convention: stiffness_at(t) is the matrix of a(t)(phi_l, phi_k), so the
/// semi-discrete system reads M u' = -S(t) u + b and the matrix of A_h(t) is -M^{-1} S(t).
class AssembledSystem {
public:
    AssembledSystem(std::shared_ptr<const FeSpace> space, CoefficientField field);

    [[nodiscard]] const FeSpace& space() const { return *space_; }
    [[nodiscard]] const std::shared_ptr<const FeSpace>& space_ptr() const { return space_; }
    [[nodiscard]] const Mesh& mesh() const { return space_->mesh(); }
    [[nodiscard]] const CoefficientField& field() const { return field_; }
    [[nodiscard]] const SparseMatrix& mass() const { return space_->mass(); }
    [[nodiscard]] int num_dofs() const { return space_->num_dofs(); }

    [[nodiscard]] SparseMatrix stiffness_at(double t) const;

    /// Refills `out` (which must carry the space pattern) with S(t).
    void stiffness_into(double t, SparseMatrix& out) const;

    /// g_k = a(t)(v, phi_k) by the accurate quadrature rule with the analytic gradient of v.
    [[nodiscard]] Vector elliptic_load(const SmoothFunction& v, double t) const;
    [[nodiscard]] Vector elliptic_load(const SmoothFunction& v, double t,
                                       const QuadratureRule& rule) const;

private:
    std::shared_ptr<const FeSpace> space_;
    CoefficientField field_;
};

/// Builds a shared space from a mesh value.
std::shared_ptr<const FeSpace> make_space(const Mesh& mesh, const BoundarySpec& bc);

SparseMatrix assemble_mass(const Mesh& mesh, const BoundarySpec& bc);
SparseMatrix assemble_operator(const Mesh& mesh, const CoefficientField& field, double t,
                               const BoundarySpec& bc);
Vector assemble_load(const Mesh& mesh, const SpaceTimeFunction& f, double t,
                     const BoundarySpec& bc);

}  // namespace nafem
