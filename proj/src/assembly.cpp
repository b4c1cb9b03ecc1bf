#include "nafem/assembly.hpp"

#include "nafem/errors.hpp"
#include "nafem/quadrature.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace nafem {

namespace {

using Local = Eigen::Matrix3d;

Local local_mass(const FeSpace::ElementFrame& f) {
    Local m = Local::Zero();
    if (f.vertices == 2) {
        const double h = f.measure;
        m(0, 0) = m(1, 1) = h / 3.0;
        m(0, 1) = m(1, 0) = h / 6.0;
    } else {
        m.setConstant(f.measure / 12.0);
        m.diagonal().setConstant(f.measure / 6.0);
    }
    return m;
}

void check_finite(double value, const char* what, double t, int element) {
    if (!std::isfinite(value)) {
        std::ostringstream os;
        os << "non-finite " << what << " at t=" << t << " in element " << element;
        throw NumericalError(os.str());
    }
}

Local local_operator(const CoefficientField& field, const FeSpace::ElementFrame& f, double t,
                     int element) {
    const int nv = f.vertices;
    const QuadratureRule& rule = assembly_rule(field.dim);
    Local k = Local::Zero();

    if (field.diffusion_constant()) {
        const Eigen::Matrix2d q = field.diffusion_at(t, f.corners[0]);
        check_finite(q.sum(), "diffusion coefficient", t, element);
        for (int a = 0; a < nv; ++a) {
            for (int b = 0; b < nv; ++b) {
                k(a, b) += f.measure * f.grads[a].dot(q * f.grads[b]);
            }
        }
    } else {
        for (std::size_t qp = 0; qp < rule.size(); ++qp) {
            const Eigen::Matrix2d q = field.diffusion_at(t, f.map(rule.points[qp]));
            check_finite(q.sum(), "diffusion coefficient", t, element);
            const double w = rule.weights[qp] * f.measure;
            for (int a = 0; a < nv; ++a) {
                for (int b = 0; b < nv; ++b) {
                    k(a, b) += w * f.grads[a].dot(q * f.grads[b]);
                }
            }
        }
    }

    if (field.has_advection()) {
        if (field.advection_constant()) {
            const Eigen::Vector2d adv = field.advection_at(t, f.corners[0]);
            check_finite(adv.sum(), "advection coefficient", t, element);
            // integral of phi_k over the element is measure / (dim + 1)
            for (int a = 0; a < nv; ++a) {
                for (int b = 0; b < nv; ++b) {
                    k(a, b) += adv.dot(f.grads[b]) * f.measure / nv;
                }
            }
        } else {
            for (std::size_t qp = 0; qp < rule.size(); ++qp) {
                const Eigen::Vector2d adv = field.advection_at(t, f.map(rule.points[qp]));
                check_finite(adv.sum(), "advection coefficient", t, element);
                const double w = rule.weights[qp] * f.measure;
                for (int a = 0; a < nv; ++a) {
                    for (int b = 0; b < nv; ++b) {
                        k(a, b) += w * adv.dot(f.grads[b]) * rule.points[qp][a];
                    }
                }
            }
        }
    }

    if (field.reaction.is_constant()) {
        const double q0 = field.reaction(t, 0.0, 0.0);
        check_finite(q0, "reaction coefficient", t, element);
        if (q0 != 0.0) {
            k -= q0 * local_mass(f);
        }
    } else {
        for (std::size_t qp = 0; qp < rule.size(); ++qp) {
            const double q0 = field.reaction_at(t, f.map(rule.points[qp]));
            check_finite(q0, "reaction coefficient", t, element);
            const double w = rule.weights[qp] * f.measure;
            for (int a = 0; a < nv; ++a) {
                for (int b = 0; b < nv; ++b) {
                    k(a, b) -= w * q0 * rule.points[qp][a] * rule.points[qp][b];
                }
            }
        }
    }
    return k;
}

void scatter(const Local& local, const std::array<int, 9>& slots, int nv, double* values) {
    for (int a = 0; a < nv; ++a) {
        for (int b = 0; b < nv; ++b) {
            const int s = slots[static_cast<std::size_t>(a * 3 + b)];
            if (s >= 0) {
                values[s] += local(a, b);
            }
        }
    }
}

}  // namespace

Point FeSpace::ElementFrame::map(const std::array<double, 3>& bary) const {
    Point p = Point::Zero();
    for (int v = 0; v < vertices; ++v) {
        p += bary[static_cast<std::size_t>(v)] * corners[static_cast<std::size_t>(v)];
    }
    return p;
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, BoundarySpec bc)
    : mesh_(std::move(mesh)), bc_(bc) {
    if (!mesh_) {
        throw ConfigError("finite element space needs a mesh");
    }
    if (bc_.kind == BoundarySpec::Kind::Robin && !std::isfinite(bc_.alpha0)) {
        throw ConfigError("Robin boundary requires a finite alpha0");
    }
    const Mesh& m = *mesh_;
    dof_of_node_.assign(static_cast<std::size_t>(m.num_nodes()), -1);
    for (int node = 0; node < m.num_nodes(); ++node) {
        if (bc_.is_dirichlet() && m.on_boundary(node)) {
            continue;
        }
        dof_of_node_[static_cast<std::size_t>(node)] = static_cast<int>(node_of_dof_.size());
        node_of_dof_.push_back(node);
    }

    const int nv = m.vertices_per_element();
    frames_.resize(static_cast<std::size_t>(m.num_elements()));
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(m.num_elements()) * nv * nv);
    for (int e = 0; e < m.num_elements(); ++e) {
        ElementFrame& f = frames_[static_cast<std::size_t>(e)];
        const auto& el = m.element(e);
        f.vertices = nv;
        f.measure = m.element_measure(e);
        for (int v = 0; v < nv; ++v) {
            f.corners[v] = m.node(el[v]);
            f.dofs[v] = dof_of_node(el[v]);
        }
        if (nv == 2) {
            const double h = f.measure;
            f.grads[0] = Eigen::Vector2d(-1.0 / h, 0.0);
            f.grads[1] = Eigen::Vector2d(1.0 / h, 0.0);
        } else {
            Eigen::Matrix2d jac;
            jac.col(0) = f.corners[1] - f.corners[0];
            jac.col(1) = f.corners[2] - f.corners[0];
            const Eigen::Matrix2d inv_t = jac.inverse().transpose();
            f.grads[1] = inv_t.col(0);
            f.grads[2] = inv_t.col(1);
            f.grads[0] = -f.grads[1] - f.grads[2];
        }
        for (int a = 0; a < nv; ++a) {
            for (int b = 0; b < nv; ++b) {
                if (f.dofs[a] >= 0 && f.dofs[b] >= 0) {
                    triplets.emplace_back(f.dofs[a], f.dofs[b], 0.0);
                }
            }
        }
    }
    pattern_.resize(num_dofs(), num_dofs());
    pattern_.setFromTriplets(triplets.begin(), triplets.end());
    pattern_.makeCompressed();

    const int* outer = pattern_.outerIndexPtr();
    const int* inner = pattern_.innerIndexPtr();
    slots_.resize(frames_.size());
    for (std::size_t e = 0; e < frames_.size(); ++e) {
        auto& s = slots_[e];
        s.fill(-1);
        const ElementFrame& f = frames_[e];
        for (int a = 0; a < nv; ++a) {
            for (int b = 0; b < nv; ++b) {
                const int r = f.dofs[a], c = f.dofs[b];
                if (r < 0 || c < 0) {
                    continue;
                }
                const int* pos = std::lower_bound(inner + outer[r], inner + outer[r + 1], c);
                s[static_cast<std::size_t>(a * 3 + b)] = static_cast<int>(pos - inner);
            }
        }
    }

    if (!bc_.is_dirichlet()) {
        const int n = m.cells_per_side();
        auto grid = [n](double c) { return static_cast<int>(std::lround(c * n)); };
        for (int e = 0; e < m.num_elements(); ++e) {
            const auto& el = m.element(e);
            if (m.dim() == 1) {
                for (int v = 0; v < 2; ++v) {
                    const int i = grid(m.node(el[v]).x());
                    if (i == 0 || i == n) {
                        BoundaryFacet facet;
                        facet.element = e;
                        facet.local = {v, v};
                        facet.vertices = 1;
                        facet.normal = Eigen::Vector2d(i == 0 ? -1.0 : 1.0, 0.0);
                        facets_.push_back(facet);
                    }
                }
                continue;
            }
            for (int a = 0; a < 3; ++a) {
                const int b = (a + 1) % 3;
                const Point& pa = m.node(el[a]);
                const Point& pb = m.node(el[b]);
                Eigen::Vector2d normal = Eigen::Vector2d::Zero();
                if (grid(pa.x()) == 0 && grid(pb.x()) == 0) {
                    normal = {-1.0, 0.0};
                } else if (grid(pa.x()) == n && grid(pb.x()) == n) {
                    normal = {1.0, 0.0};
                } else if (grid(pa.y()) == 0 && grid(pb.y()) == 0) {
                    normal = {0.0, -1.0};
                } else if (grid(pa.y()) == n && grid(pb.y()) == n) {
                    normal = {0.0, 1.0};
                } else {
                    continue;
                }
                BoundaryFacet facet;
                facet.element = e;
                facet.local = {a, b};
                facet.vertices = 2;
                facet.length = (pb - pa).norm();
                facet.normal = normal;
                facets_.push_back(facet);
            }
        }
    }

    mass_ = zero_pattern();
    double* values = mass_.valuePtr();
    for (int e = 0; e < m.num_elements(); ++e) {
        scatter(local_mass(frame(e)), slots(e), nv, values);
    }
}

SparseMatrix FeSpace::zero_pattern() const {
    SparseMatrix p = pattern_;
    std::fill(p.valuePtr(), p.valuePtr() + p.nonZeros(), 0.0);
    return p;
}

Vector FeSpace::load(const SpaceTimeFunction& f, double t) const {
    return load(f, t, assembly_rule(mesh_->dim()));
}

Vector FeSpace::load(const SpaceTimeFunction& f, double t, const QuadratureRule& rule) const {
    Vector b = Vector::Zero(num_dofs());
    for (int e = 0; e < mesh_->num_elements(); ++e) {
        const ElementFrame& fr = frame(e);
        for (std::size_t qp = 0; qp < rule.size(); ++qp) {
            const double value = f(t, fr.map(rule.points[qp]));
            if (!std::isfinite(value)) {
                std::ostringstream os;
                os << "non-finite source value at t=" << t << " in element " << e;
                throw NumericalError(os.str());
            }
            const double w = rule.weights[qp] * fr.measure * value;
            for (int a = 0; a < fr.vertices; ++a) {
                if (fr.dofs[a] >= 0) {
                    b(fr.dofs[a]) += w * rule.points[qp][a];
                }
            }
        }
    }
    return b;
}

Vector FeSpace::interpolate(const SpaceTimeFunction& f, double t) const {
    Vector v(num_dofs());
    for (int d = 0; d < num_dofs(); ++d) {
        v(d) = f(t, mesh_->node(node_of_dof(d)));
    }
    return v;
}

SparseMatrix FeSpace::h1_gram() const {
    SparseMatrix g = mass_;
    double* values = g.valuePtr();
    const int nv = mesh_->vertices_per_element();
    for (int e = 0; e < mesh_->num_elements(); ++e) {
        const ElementFrame& f = frame(e);
        Local k = Local::Zero();
        for (int a = 0; a < nv; ++a) {
            for (int b = 0; b < nv; ++b) {
                k(a, b) = f.measure * f.grads[a].dot(f.grads[b]);
            }
        }
        scatter(k, slots(e), nv, values);
    }
    return g;
}

AssembledSystem::AssembledSystem(std::shared_ptr<const FeSpace> space, CoefficientField field)
    : space_(std::move(space)), field_(std::move(field)) {
    if (!space_) {
        throw ConfigError("assembled system needs a space");
    }
    if (field_.dim != space_->mesh().dim()) {
        throw ConfigError("coefficient field dimension does not match the mesh");
    }
}

SparseMatrix AssembledSystem::stiffness_at(double t) const {
    SparseMatrix s = space_->zero_pattern();
    stiffness_into(t, s);
    return s;
}

void AssembledSystem::stiffness_into(double t, SparseMatrix& out) const {
    const FeSpace& sp = *space_;
    const Mesh& m = sp.mesh();
    if (out.nonZeros() != sp.mass().nonZeros() || out.rows() != sp.num_dofs()) {
        out = sp.zero_pattern();
    }
    double* values = out.valuePtr();
    std::fill(values, values + out.nonZeros(), 0.0);
    const int nv = m.vertices_per_element();
    for (int e = 0; e < m.num_elements(); ++e) {
        scatter(local_operator(field_, sp.frame(e), t, e), sp.slots(e), nv, values);
    }

    if (sp.bc().is_dirichlet() || sp.bc().alpha0 == 0.0) {
        return;
    }
    const double alpha0 = sp.bc().alpha0;
    const QuadratureRule& edge_rule = assembly_rule(1);
    for (const auto& facet : sp.boundary_facets()) {
        const auto& f = sp.frame(facet.element);
        const auto& slots = sp.slots(facet.element);
        if (facet.vertices == 1) {
            const int a = facet.local[0];
            const Point& p = f.corners[a];
            const double qnn = facet.normal.dot(field_.diffusion_at(t, p) * facet.normal);
            check_finite(qnn, "conormal weight", t, facet.element);
            values[slots[static_cast<std::size_t>(a * 3 + a)]] += alpha0 * qnn;
            continue;
        }
        const int a = facet.local[0], b = facet.local[1];
        Eigen::Matrix2d local = Eigen::Matrix2d::Zero();
        for (std::size_t qp = 0; qp < edge_rule.size(); ++qp) {
            const double la = edge_rule.points[qp][0], lb = edge_rule.points[qp][1];
            const Point p = la * f.corners[a] + lb * f.corners[b];
            const double qnn = facet.normal.dot(field_.diffusion_at(t, p) * facet.normal);
            check_finite(qnn, "conormal weight", t, facet.element);
            const double w = edge_rule.weights[qp] * facet.length * alpha0 * qnn;
            local(0, 0) += w * la * la;
            local(0, 1) += w * la * lb;
            local(1, 0) += w * lb * la;
            local(1, 1) += w * lb * lb;
        }
        const std::array<int, 2> idx{a, b};
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                values[slots[static_cast<std::size_t>(idx[i] * 3 + idx[j])]] += local(i, j);
            }
        }
    }
}

Vector AssembledSystem::elliptic_load(const SmoothFunction& v, double t) const {
    return elliptic_load(v, t, accurate_rule(space_->mesh().dim()));
}

Vector AssembledSystem::elliptic_load(const SmoothFunction& v, double t,
                                      const QuadratureRule& rule) const {
    const FeSpace& sp = *space_;
    const Mesh& m = sp.mesh();
    Vector g = Vector::Zero(sp.num_dofs());
    for (int e = 0; e < m.num_elements(); ++e) {
        const auto& f = sp.frame(e);
        for (std::size_t qp = 0; qp < rule.size(); ++qp) {
            const Point p = f.map(rule.points[qp]);
            const Eigen::Vector2d flux = field_.diffusion_at(t, p) * v.gradient(t, p);
            const double lower = field_.advection_at(t, p).dot(v.gradient(t, p)) -
                                 field_.reaction_at(t, p) * v.value(t, p);
            check_finite(flux.sum() + lower, "elliptic load integrand", t, e);
            const double w = rule.weights[qp] * f.measure;
            for (int a = 0; a < f.vertices; ++a) {
                if (f.dofs[a] >= 0) {
                    g(f.dofs[a]) += w * (f.grads[a].dot(flux) + lower * rule.points[qp][a]);
                }
            }
        }
    }
    if (sp.bc().is_dirichlet() || sp.bc().alpha0 == 0.0) {
        return g;
    }
    const double alpha0 = sp.bc().alpha0;
    const QuadratureRule& edge_rule = assembly_rule(1);
    for (const auto& facet : sp.boundary_facets()) {
        const auto& f = sp.frame(facet.element);
        if (facet.vertices == 1) {
            const int a = facet.local[0];
            const Point& p = f.corners[a];
            const double qnn = facet.normal.dot(field_.diffusion_at(t, p) * facet.normal);
            g(f.dofs[a]) += alpha0 * qnn * v.value(t, p);
            continue;
        }
        const int a = facet.local[0], b = facet.local[1];
        for (std::size_t qp = 0; qp < edge_rule.size(); ++qp) {
            const double la = edge_rule.points[qp][0], lb = edge_rule.points[qp][1];
            const Point p = la * f.corners[a] + lb * f.corners[b];
            const double qnn = facet.normal.dot(field_.diffusion_at(t, p) * facet.normal);
            const double w = edge_rule.weights[qp] * facet.length * alpha0 * qnn * v.value(t, p);
            g(f.dofs[a]) += w * la;
            g(f.dofs[b]) += w * lb;
        }
    }
    return g;
}

std::shared_ptr<const FeSpace> make_space(const Mesh& mesh, const BoundarySpec& bc) {
    return std::make_shared<const FeSpace>(std::make_shared<const Mesh>(mesh), bc);
}

SparseMatrix assemble_mass(const Mesh& mesh, const BoundarySpec& bc) {
    return make_space(mesh, bc)->mass();
}

SparseMatrix assemble_operator(const Mesh& mesh, const CoefficientField& field, double t,
                               const BoundarySpec& bc) {
    return AssembledSystem(make_space(mesh, bc), field).stiffness_at(t);
}

Vector assemble_load(const Mesh& mesh, const SpaceTimeFunction& f, double t,
                     const BoundarySpec& bc) {
    return make_space(mesh, bc)->load(f, t);
}

}  // namespace nafem
