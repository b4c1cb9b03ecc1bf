#include "nafem/mesh.hpp"

#include "nafem/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace nafem {

namespace {

std::uint64_t next_mesh_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

int grid_index(double coordinate, int n) {
    const double scaled = coordinate * n;
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) > 1e-9 || rounded < 0 || rounded > n) {
        throw ConfigError("mesh node coordinate " + std::to_string(coordinate) +
                          " is not on the structured grid");
    }
    return static_cast<int>(rounded);
}

}  // namespace

Mesh::Mesh(int dim, int cells_per_side, std::vector<Point> nodes,
           std::vector<std::array<int, 3>> elements)
    : dim_(dim),
      n_(cells_per_side),
      nodes_(std::move(nodes)),
      elements_(std::move(elements)),
      id_(next_mesh_id()) {
    if (dim_ != 1 && dim_ != 2) {
        throw ConfigError("mesh dimension must be 1 or 2");
    }
    if (n_ < 1) {
        throw ConfigError("mesh needs at least one cell per side");
    }
    const int side = n_ + 1;
    const std::size_t grid_size = dim_ == 1 ? static_cast<std::size_t>(side)
                                            : static_cast<std::size_t>(side) * side;
    if (nodes_.size() != grid_size) {
        throw ConfigError("structured mesh node count mismatch");
    }

    grid_to_node_.assign(grid_size, -1);
    on_boundary_.assign(nodes_.size(), 0);
    for (int k = 0; k < num_nodes(); ++k) {
        const int i = grid_index(nodes_[k].x(), n_);
        const int j = dim_ == 2 ? grid_index(nodes_[k].y(), n_) : 0;
        auto& slot = grid_to_node_[static_cast<std::size_t>(j) * side + i];
        if (slot != -1) {
            throw ConfigError("duplicate mesh node");
        }
        slot = k;
        const bool boundary = i == 0 || i == n_ || (dim_ == 2 && (j == 0 || j == n_));
        if (boundary) {
            on_boundary_[k] = 1;
            boundary_.push_back(k);
        }
    }

    double total = 0.0;
    for (int e = 0; e < num_elements(); ++e) {
        for (int v = 0; v < vertices_per_element(); ++v) {
            const int idx = elements_[e][v];
            if (idx < 0 || idx >= num_nodes()) {
                throw ConfigError("element references unknown node");
            }
        }
        const double measure = element_measure(e);
        if (!(measure > 0.0)) {
            throw ConfigError("element " + std::to_string(e) + " has non-positive measure");
        }
        total += measure;
        h_ = std::max(h_, element_diameter(e));
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ConfigError("elements do not cover the unit domain");
    }
}

double Mesh::element_measure(int e) const {
    const auto& el = element(e);
    if (dim_ == 1) {
        return node(el[1]).x() - node(el[0]).x();
    }
    return signed_area(node(el[0]), node(el[1]), node(el[2]));
}

double Mesh::element_diameter(int e) const {
    const auto& el = element(e);
    if (dim_ == 1) {
        return std::abs(node(el[1]).x() - node(el[0]).x());
    }
    const double ab = (node(el[1]) - node(el[0])).norm();
    const double bc = (node(el[2]) - node(el[1])).norm();
    const double ca = (node(el[0]) - node(el[2])).norm();
    return std::max({ab, bc, ca});
}

int Mesh::node_at_grid(int i, int j) const {
    const int side = n_ + 1;
    if (i < 0 || i > n_ || (dim_ == 2 && (j < 0 || j > n_))) {
        throw ConfigError("grid position outside the mesh");
    }
    return grid_to_node_[static_cast<std::size_t>(dim_ == 2 ? j : 0) * side + i];
}

Mesh uniform_interval_mesh(int n) {
    if (n < 1) {
        throw ConfigError("interval mesh needs n >= 1 elements");
    }
    std::vector<Point> nodes;
    nodes.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        nodes.emplace_back(static_cast<double>(i) / n, 0.0);
    }
    std::vector<std::array<int, 3>> elements;
    elements.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        elements.push_back({i, i + 1, -1});
    }
    return Mesh(1, n, std::move(nodes), std::move(elements));
}

Mesh structured_square_mesh(int n) {
    if (n < 1) {
        throw ConfigError("square mesh needs n >= 1 cells per side");
    }
    const int side = n + 1;
    std::vector<Point> nodes;
    nodes.reserve(static_cast<std::size_t>(side) * side);
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            nodes.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
        }
    }
    auto id = [side](int i, int j) { return j * side + i; };
    std::vector<std::array<int, 3>> elements;
    elements.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return Mesh(2, n, std::move(nodes), std::move(elements));
}

Mesh refine(const Mesh& mesh) {
    std::vector<Point> nodes = mesh.nodes();
    std::vector<std::array<int, 3>> elements;
    std::map<std::pair<int, int>, int> midpoints;

    auto midpoint = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        const auto [it, inserted] = midpoints.try_emplace(key, static_cast<int>(nodes.size()));
        if (inserted) {
            nodes.push_back(0.5 * (nodes[static_cast<std::size_t>(a)] +
                                   nodes[static_cast<std::size_t>(b)]));
        }
        return it->second;
    };

    if (mesh.dim() == 1) {
        elements.reserve(2 * static_cast<std::size_t>(mesh.num_elements()));
        for (const auto& el : mesh.elements()) {
            const int m = midpoint(el[0], el[1]);
            elements.push_back({el[0], m, -1});
            elements.push_back({m, el[1], -1});
        }
    } else {
        elements.reserve(4 * static_cast<std::size_t>(mesh.num_elements()));
        for (const auto& el : mesh.elements()) {
            const int a = el[0], b = el[1], c = el[2];
            const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
            elements.push_back({a, ab, ca});
            elements.push_back({ab, b, bc});
            elements.push_back({ca, bc, c});
            elements.push_back({ab, bc, ca});
        }
    }
    return Mesh(mesh.dim(), 2 * mesh.cells_per_side(), std::move(nodes), std::move(elements));
}

std::vector<int> nested_node_map(const Mesh& coarse, const Mesh& fine) {
    if (coarse.dim() != fine.dim() || fine.cells_per_side() % coarse.cells_per_side() != 0) {
        throw ConfigError("meshes are not nested");
    }
    const int ratio = fine.cells_per_side() / coarse.cells_per_side();
    const int n = coarse.cells_per_side();
    std::vector<int> map(static_cast<std::size_t>(coarse.num_nodes()));
    for (int k = 0; k < coarse.num_nodes(); ++k) {
        const Point& p = coarse.node(k);
        const int i = static_cast<int>(std::lround(p.x() * n));
        const int j = coarse.dim() == 2 ? static_cast<int>(std::lround(p.y() * n)) : 0;
        map[static_cast<std::size_t>(k)] = fine.node_at_grid(i * ratio, j * ratio);
    }
    return map;
}

}  // namespace nafem
