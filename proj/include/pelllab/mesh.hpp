#pragma once

#include <array>
#include <vector>

#include "pelllab/field.hpp"

namespace pelllab {

// P1 elements on the grid: segments in 1D, two triangles per cell in 2D.
// Element gradients are constant; vertex values are averaged with equal weights.
struct Element {
    std::size_t cell = 0;
    double measure = 0.0;
    int nv = 0;
    std::array<int, 3> node{};               // global node ids
    Eigen::Matrix<double, 2, 3> grad = Eigen::Matrix<double, 2, 3>::Zero();  // rows: axes
};

class Mesh {
public:
    explicit Mesh(const GridDomain& dom);

    const GridDomain& domain() const { return dom_; }
    int dim() const { return dom_.dim; }
    int n_nodes() const { return static_cast<int>(coords_.size()); }
    int n_dofs() const { return n_dofs_; }
    // -1 for nodes removed by the Dirichlet condition.
    int dof(int node) const { return dof_[node]; }
    const std::vector<Element>& elements() const { return elems_; }
    const std::array<double, 2>& coord(int node) const { return coords_[node]; }
    std::array<double, 2> dof_coord(int k) const { return coords_[dof_node_[k]]; }

    // Lumped mass per dof.
    const RVec& mass() const { return mass_; }

    // Nodal samples of f at the dofs.
    template <class F>
    CVec sample(F&& f) const {
        CVec u(n_dofs_);
        for (int k = 0; k < n_dofs_; ++k) {
            const auto& x = coords_[dof_node_[k]];
            u(k) = f(x[0], x[1]);
        }
        return u;
    }

    // Value of u at an element vertex (0 on Dirichlet nodes).
    cplx vertex_value(const CVec& u, const Element& e, int i) const {
        const int k = dof_[e.node[i]];
        return k < 0 ? cplx(0.0) : u(k);
    }
    // Constant element gradient of u as a complex d-vector.
    CVec gradient(const CVec& u, const Element& e) const;
    // Equal-weight vertex average.
    cplx average(const CVec& u, const Element& e) const;

private:
    GridDomain dom_;
    std::vector<std::array<double, 2>> coords_;
    std::vector<int> dof_;
    std::vector<int> dof_node_;
    std::vector<Element> elems_;
    RVec mass_;
    int n_dofs_ = 0;
};

}  // namespace pelllab
