#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

namespace nafem {

using Point = Eigen::Vector2d;

/// Conforming simplicial mesh of (0,1) or (0,1)^2.
///
/// Meshes are structured: every node sits on the grid {i/n} (1D) or
/// {(i/n, j/n)} (2D), where n is `cells_per_side()`. The node numbering is
/// free (refine() appends midpoint nodes after the coarse ones), so grid
/// lookups go through node_at_grid(). A mesh is immutable after construction.
class Mesh {
public:
    /// Validates the connectivity: positive element measures, all nodes on the grid,
    /// total measure equal to one. 1D elements use the first two slots of each array.
    Mesh(int dim, int cells_per_side, std::vector<Point> nodes,
         std::vector<std::array<int, 3>> elements);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int cells_per_side() const noexcept { return n_; }
    [[nodiscard]] int num_nodes() const noexcept { return static_cast<int>(nodes_.size()); }
    [[nodiscard]] int num_elements() const noexcept { return static_cast<int>(elements_.size()); }
    [[nodiscard]] int vertices_per_element() const noexcept { return dim_ + 1; }

    [[nodiscard]] const Point& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const std::vector<Point>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::array<int, 3>& element(int e) const {
        return elements_[static_cast<std::size_t>(e)];
    }
    [[nodiscard]] const std::vector<std::array<int, 3>>& elements() const noexcept {
        return elements_;
    }

    /// Sorted indices of nodes on the boundary of the domain.
    [[nodiscard]] const std::vector<int>& boundary_nodes() const noexcept { return boundary_; }
    [[nodiscard]] bool on_boundary(int node) const {
        return on_boundary_[static_cast<std::size_t>(node)] != 0;
    }

    /// Maximal element diameter.
    [[nodiscard]] double h() const noexcept { return h_; }

    [[nodiscard]] double element_measure(int e) const;
    [[nodiscard]] double element_diameter(int e) const;

    /// Node at grid position (i, j); j is ignored in 1D.
    [[nodiscard]] int node_at_grid(int i, int j = 0) const;

    /// Process-unique identity, used to tag state vectors.
    [[nodiscard]] std::uint64_t id() const noexcept { return id_; }

private:
    int dim_;
    int n_;
    std::vector<Point> nodes_;
    std::vector<std::array<int, 3>> elements_;
    std::vector<int> boundary_;
    std::vector<char> on_boundary_;
    std::vector<int> grid_to_node_;
    double h_ = 0.0;
    std::uint64_t id_;
};

/// n equal elements on (0,1).
Mesh uniform_interval_mesh(int n);

/// n x n cells on (0,1)^2, each split along the lower-left to upper-right diagonal.
Mesh structured_square_mesh(int n);

/// Uniform refinement: bisection in 1D, red refinement in 2D. Coarse nodes keep
/// their indices; new nodes are appended.
Mesh refine(const Mesh& mesh);

/// For each node of `coarse`, the index of the coincident node of `fine`.
/// Requires fine.cells_per_side() to be a multiple of coarse.cells_per_side().
std::vector<int> nested_node_map(const Mesh& coarse, const Mesh& fine);

}  // namespace nafem
