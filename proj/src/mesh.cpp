#include "pelllab/mesh.hpp"

namespace pelllab {

Mesh::Mesh(const GridDomain& dom) : dom_(dom) {
    dom_.validate();
    const bool dirichlet = dom_.bc == Boundary::Dirichlet;
    if (dom_.dim == 1) {
        const int N = dom_.n_cells[0];
        const double a = dom_.extents[0].first, h = dom_.h(0);
        for (int i = 0; i <= N; ++i) {
            coords_.push_back({a + i * h, 0.0});
            dof_.push_back(dirichlet && (i == 0 || i == N) ? -1 : 0);
        }
        for (int k = 0; k < N; ++k) {
            Element e;
            e.cell = static_cast<std::size_t>(k);
            e.measure = h;
            e.nv = 2;
            e.node = {k, k + 1, 0};
            e.grad(0, 0) = -1.0 / h;
            e.grad(0, 1) = 1.0 / h;
            elems_.push_back(e);
        }
    } else {
        const int Nx = dom_.n_cells[0], Ny = dom_.n_cells[1];
        const double ax = dom_.extents[0].first, ay = dom_.extents[1].first;
        const double hx = dom_.h(0), hy = dom_.h(1);
        auto id = [&](int i, int j) { return i + (Nx + 1) * j; };
        for (int j = 0; j <= Ny; ++j)
            for (int i = 0; i <= Nx; ++i) {
                coords_.push_back({ax + i * hx, ay + j * hy});
                const bool bnd = i == 0 || i == Nx || j == 0 || j == Ny;
                dof_.push_back(dirichlet && bnd ? -1 : 0);
            }
        auto triangle = [&](std::size_t cell, std::array<int, 3> v) {
            Element e;
            e.cell = cell;
            e.nv = 3;
            e.node = v;
            const auto& x0 = coords_[v[0]];
            const auto& x1 = coords_[v[1]];
            const auto& x2 = coords_[v[2]];
            Eigen::Matrix2d B;
            B << x1[0] - x0[0], x2[0] - x0[0], x1[1] - x0[1], x2[1] - x0[1];
            e.measure = std::abs(B.determinant()) / 2.0;
            const Eigen::Matrix2d Bit = B.inverse().transpose();
            e.grad.col(1) = Bit.col(0);
            e.grad.col(2) = Bit.col(1);
            e.grad.col(0) = -(e.grad.col(1) + e.grad.col(2));
            elems_.push_back(e);
        };
        for (int l = 0; l < Ny; ++l)
            for (int k = 0; k < Nx; ++k) {
                const auto cell = static_cast<std::size_t>(k + Nx * l);
                triangle(cell, {id(k, l), id(k + 1, l), id(k + 1, l + 1)});
                triangle(cell, {id(k, l), id(k + 1, l + 1), id(k, l + 1)});
            }
    }
    for (std::size_t n = 0; n < dof_.size(); ++n) {
        if (dof_[n] < 0) continue;
        dof_[n] = n_dofs_++;
        dof_node_.push_back(static_cast<int>(n));
    }
    mass_ = RVec::Zero(n_dofs_);
    for (const auto& e : elems_)
        for (int i = 0; i < e.nv; ++i) {
            const int k = dof_[e.node[i]];
            if (k >= 0) mass_(k) += e.measure / e.nv;
        }
}

CVec Mesh::gradient(const CVec& u, const Element& e) const {
    CVec g = CVec::Zero(dom_.dim);
    for (int i = 0; i < e.nv; ++i) {
        const cplx ui = vertex_value(u, e, i);
        for (int a = 0; a < dom_.dim; ++a) g(a) += e.grad(a, i) * ui;
    }
    return g;
}

cplx Mesh::average(const CVec& u, const Element& e) const {
    cplx s = 0.0;
    for (int i = 0; i < e.nv; ++i) s += vertex_value(u, e, i);
    return s / static_cast<double>(e.nv);
}

}  // namespace pelllab
