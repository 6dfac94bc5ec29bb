#include <doctest.h>

#include <limits>

#include "pelllab/semigroup.hpp"

using namespace pelllab;

namespace {

CoefficientTuple laplacian(int d = 1, double V = 0.0) {
    return CoefficientTuple::constant(CMat::Identity(d, d), V);
}

GridDomain square(int n, Boundary bc) {
    GridDomain g;
    g.dim = 2;
    g.extents = {{0.0, M_PI}, {0.0, M_PI}};
    g.n_cells = {n, n};
    g.bc = bc;
    return g;
}

CVec sine(const DiscreteForm& F) {
    return F.mesh->sample([](double x, double) { return cplx(std::sin(x)); });
}

CoefficientTuple complex_tuple(int d) {
    CMat A = CMat::Identity(d, d) * cplx(1.0, 0.3);
    if (d == 2) A(0, 1) = {0.2, -0.1};
    return CoefficientTuple::constant(A, CVec::Constant(d, {0.2, 0.1}), CVec::Constant(d, {-0.3, 0.4}), 0.5);
}

// Discrete Dirichlet eigenvalue on sin: K sin = λ_h M sin for the 1D stencil.
double rayleigh_sin(int N) {
    const auto F = assemble(laplacian(), GridDomain::interval(0, M_PI, N, Boundary::Dirichlet));
    const CVec u = sine(F);
    return (u.dot(F.stiffness * u)).real() / (u.dot(F.mass.cast<cplx>().asDiagonal() * u)).real();
}

}  // namespace

TEST_CASE("assembly: 1D Dirichlet Laplacian is the standard tridiagonal stencil") {
    const int N = 16;
    const auto dom = GridDomain::interval(0, M_PI, N, Boundary::Dirichlet);
    const auto F = assemble(laplacian(), dom);
    const double h = dom.h(0);
    REQUIRE(F.n_dofs() == N - 1);
    const Eigen::MatrixXcd K(F.stiffness);
    for (int i = 0; i < N - 1; ++i) {
        CHECK(F.mass(i) == doctest::Approx(h));
        for (int j = 0; j < N - 1; ++j) {
            const double ref = i == j ? 2.0 / h : (std::abs(i - j) == 1 ? -1.0 / h : 0.0);
            CHECK(std::abs(K(i, j) - ref) < 1e-12);
        }
    }
}

TEST_CASE("assembly: Hermitian for self-adjoint data, exact adjoint identity") {
    const auto dom1 = GridDomain::interval(0, 1, 20, Boundary::Neumann);
    const auto herm = CoefficientTuple::constant(CMat::Identity(1, 1) * 2.0, CVec::Constant(1, 0.4),
                                                 CVec::Constant(1, 0.4), 0.7);
    const auto F = assemble(herm, dom1);
    CHECK((F.stiffness - SpMat(F.stiffness.adjoint())).norm() < 1e-12);

    for (const auto& dom : {GridDomain::interval(0, 1, 20, Boundary::Dirichlet), square(6, Boundary::Neumann)}) {
        const auto t = complex_tuple(dom.dim);
        const auto Fa = assemble(t, dom), Fs = assemble(adjoint(t), dom);
        CHECK((SpMat(Fa.stiffness.adjoint()) - Fs.stiffness).norm() <= 1e-12);
        CHECK((Fa.term_A + Fa.term_b + Fa.term_c + Fa.term_V - Fa.stiffness).norm() == 0.0);
    }
}

TEST_CASE("assembly errors") {
    const auto dom = GridDomain::interval(0, 1, 8, Boundary::Dirichlet);
    CHECK_THROWS_AS(assemble(CoefficientTuple::constant(CMat::Identity(1, 1) * -1.0), dom),
                    std::invalid_argument);
    CHECK_THROWS_AS(assemble(laplacian(2), dom), std::invalid_argument);
    CHECK_THROWS_AS(assemble(CoefficientTuple({Cell{CMat::Identity(1, 1), CVec::Zero(1), CVec::Zero(1), 0.0},
                                               Cell{CMat::Identity(1, 1), CVec::Zero(1), CVec::Zero(1), 0.0}},
                                              2),
                             dom),
                    std::invalid_argument);
}

TEST_CASE("discrete Dirichlet eigenvalue converges to 1 at second order") {
    for (int N : {16, 32, 64}) {
        const double h = M_PI / N;
        const double lam = rayleigh_sin(N);
        CHECK(lam == doctest::Approx(4.0 / (h * h) * std::pow(std::sin(h / 2), 2)).epsilon(1e-12));
        CHECK(std::abs(lam - 1.0) <= h * h / 10);
    }
    const double rich = (4.0 * rayleigh_sin(64) - rayleigh_sin(32)) / 3.0;
    CHECK(std::abs(rich - 1.0) < 1e-6);
}

TEST_CASE("evolve: t = 0 and eigenfunction decay") {
    for (int N : {64, 256}) {
        const auto dom = GridDomain::interval(0, M_PI, N, Boundary::Dirichlet);
        const auto F = assemble(laplacian(), dom);
        const CVec f = sine(F);
        const double h = dom.h(0);
        for (Scheme s : {Scheme::BackwardEuler, Scheme::CrankNicolson}) {
            EvolveOptions opt;
            opt.scheme = s;
            opt.dt_max = 1e-3;
            opt.cn_guard = 1e9;
            const auto st = evolve(F, f, {0.0, 1.0}, opt);
            CHECK((st[0].u - f).norm() == 0.0);
            const double err = lp_norm(CVec(st[1].u - std::exp(-1.0) * f), 2.0, F);
            CHECK(err <= 3 * (h * h + opt.dt_max));
        }
    }
}

TEST_CASE("evolve: guards and argument checks") {
    const auto F = assemble(laplacian(), GridDomain::interval(0, M_PI, 128, Boundary::Dirichlet));
    const CVec f = sine(F);
    EvolveOptions opt;
    opt.scheme = Scheme::CrankNicolson;
    opt.dt_max = 0.1;
    CHECK_THROWS_AS(evolve(F, f, {1.0}, opt), std::domain_error);
    CHECK_THROWS_AS(evolve(F, f, {1.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(evolve(F, CVec::Zero(3), {1.0}), std::invalid_argument);
}

TEST_CASE("Neumann mass conservation for real A") {
    auto dom = square(12, Boundary::Neumann);
    CMat A(2, 2);
    A << 2.0, 0.5, -0.3, 1.0;
    const auto F = assemble(CoefficientTuple::constant(A), dom);
    const CVec f = F.mesh->sample([](double x, double y) { return cplx(std::exp(-x) * (1 + y * y)); });
    const auto st = evolve(F, f, {0.1, 0.5, 1.0});
    const cplx m0 = F.mass.cast<cplx>().dot(f);
    for (const auto& s : st) CHECK(std::abs(F.mass.cast<cplx>().dot(s.u) - m0) <= 1e-10 * std::abs(m0));
}

TEST_CASE("lp_norm examples") {
    const auto one = GridDomain::interval(0, 1, 50, Boundary::Neumann);
    const CVec ones = CVec::Ones(51);
    for (double p : {1.0, 1.5, 2.0, 4.0, std::numeric_limits<double>::infinity()}) CHECK(lp_norm(ones, p, one) == doctest::Approx(1.0));
    const auto F = assemble(laplacian(), GridDomain::interval(0, M_PI, 64, Boundary::Dirichlet));
    CHECK(lp_norm(sine(F), 2.0, F) == doctest::Approx(std::sqrt(M_PI / 2)).epsilon(1e-12));
    // ∫ sin³ over (0,π) = 4/3; the error falls at least like h².
    double prev = 0.0;
    for (int N : {16, 32, 64}) {
        const auto G = assemble(laplacian(), GridDomain::interval(0, M_PI, N, Boundary::Dirichlet));
        const double err = std::abs(std::pow(lp_norm(sine(G), 3.0, G), 3) - 4.0 / 3.0);
        if (prev > 0) CHECK(prev / err >= 3.8);
        prev = err;
    }
    CHECK_THROWS_AS(lp_norm(ones, 0.5, one), std::invalid_argument);
}

TEST_CASE("duality, semigroup property and the L2 energy identity") {
    const auto dom = GridDomain::interval(0, M_PI, 64, Boundary::Dirichlet);
    const auto t = complex_tuple(1);
    const auto F = assemble(t, dom), Fs = assemble(adjoint(t), dom);
    const CVec f = sine(F);
    const CVec g = F.mesh->sample([](double x, double) { return cplx(x * (M_PI - x), std::sin(2 * x)); });
    const auto M = F.mass.cast<cplx>().asDiagonal();
    const CVec Tf = evolve(F, f, {0.5}).back().u;
    const CVec Tsg = evolve(Fs, g, {0.5}).back().u;
    CHECK(std::abs(g.dot(M * Tf) - Tsg.dot(M * f)) <= 1e-12 * (1 + std::abs(g.dot(M * Tf))));

    const CVec a = evolve(F, evolve(F, f, {0.3}).back().u, {0.2}).back().u;
    const CVec b = evolve(F, f, {0.5}).back().u;
    CHECK((a - b).norm() <= 1e-12 * b.norm());

    EvolveOptions cn;
    cn.scheme = Scheme::CrankNicolson;
    cn.dt_max = 1e-3;
    const CVec u1 = evolve(F, f, {1e-3}, cn).back().u;
    const CVec mid = (u1 + f) / 2.0;
    const double lhs = ((u1.dot(M * u1)).real() - (f.dot(M * f)).real()) / 1e-3;
    const double rhs = -2.0 * (mid.dot(F.stiffness * mid)).real();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("contractivity: Laplacian, nonnegative potential, complex A inside the angle") {
    const auto dom = GridDomain::interval(0, M_PI, 256, Boundary::Dirichlet);
    const auto F = assemble(laplacian(), dom);
    std::vector<CVec> probes;
    for (const auto& s : standard_probes(3)) probes.push_back(make_probe(s, F));
    const std::vector<double> tg{0.01, 0.1, 0.5};
    for (double p : {1.5, 2.0, 4.0, 8.0}) {
        const auto r = check_contractivity(laplacian(), p, dom, 0.0, probes, tg);
        CHECK(r.status == "pass");
        CHECK(r.max_ratio <= 1.0 + 1e-12);
        const auto rv = check_contractivity(laplacian(1, 2.0), p, dom, 0.0, probes, tg);
        CHECK(rv.status == "pass");
        const double ang = std::acos(std::abs(1 - 2 / p));
        const auto inside = CoefficientTuple::constant(CMat::Identity(1, 1) * std::polar(1.0, 0.8 * ang));
        const auto ri = check_contractivity(inside, p, dom, 0.0, probes, tg);
        CHECK(ri.class_passed);
        CHECK(ri.contractive);
    }
    const auto r2 = check_contractivity(complex_tuple(1), 2.0, dom, 0.0, probes, tg);
    CHECK(r2.class_passed);
    CHECK(r2.max_ratio <= 1.0 + 1e-3);
}

TEST_CASE("contrapositive: growth past the p-ellipticity angle") {
    const auto dom = GridDomain::interval(0, M_PI, 256, Boundary::Dirichlet);
    const auto F = assemble(laplacian(), dom);
    const std::vector<CVec> probes{sine(F)};
    for (double p : {1.5, 4.0}) {
        const double ang = std::acos(std::abs(1 - 2 / p));
        const auto bad = CoefficientTuple::constant(CMat::Identity(1, 1) * std::polar(1.0, ang + 0.2));
        const auto r = check_contractivity(bad, p, dom, 0.0, probes, {0.05});
        CHECK_FALSE(r.class_passed);
        CHECK(r.growth.growth_detected);
        CHECK(r.growth.min_margin < 0.0);
        CHECK(r.status == "pass");
    }
}

TEST_CASE("dissipativity margin changes sign with Delta_p") {
    const auto dom = GridDomain::interval(0, M_PI, 256, Boundary::Dirichlet);
    for (double p : {1.5, 3.0, 4.0}) {
        const double ang = std::acos(std::abs(1 - 2 / p));
        for (double dphi : {-0.1, 0.1}) {
            const auto t = CoefficientTuple::constant(CMat::Identity(1, 1) * std::polar(1.0, ang + dphi));
            const auto g = search_lp_growth(assemble(t, dom), p);
            CAPTURE(p);
            CAPTURE(dphi);
            if (dphi < 0)
                CHECK(g.min_margin > 0.0);
            else
                CHECK(g.min_margin < 0.0);
        }
    }
}

TEST_CASE("flow monotonicity: zero data, heat case, Hessian identity") {
    const auto dom = GridDomain::interval(0, M_PI, 128, Boundary::Dirichlet);
    const auto F = assemble(laplacian(), dom);
    const CVec z = CVec::Zero(F.n_dofs());
    std::vector<double> tg;
    for (int k = 0; k <= 10; ++k) tg.push_back(0.05 * k);
    const auto r0 = flow_monotonicity(laplacian(), laplacian(), 2.0, z, z, dom, tg);
    for (double E : r0.flow_E) CHECK(E == 0.0);

    const CVec f = F.mesh->sample([](double x, double) { return cplx(std::sin(x) + 0.3 * std::sin(2 * x), 0.2 * std::sin(3 * x)); });
    const CVec g = F.mesh->sample([](double x, double) { return cplx(std::sin(x), 0.5 * std::sin(2 * x)); });
    for (double p : {2.0, 4.0}) {
        const auto r = flow_monotonicity(laplacian(), laplacian(), p, f, g, dom, tg);
        CHECK(r.passed);
        CHECK(r.monotone);
        CHECK(r.hessian_rel_error < 0.1);
        CHECK(r.flow_E.back() < r.flow_E.front());
        CHECK(r.lp_norms.size() == 2);
    }
}

TEST_CASE("bilinear functional") {
    const auto dom = GridDomain::interval(0, M_PI, 256, Boundary::Dirichlet);
    const auto F = assemble(laplacian(), dom);
    const CVec f = sine(F);
    const auto r = bilinear_functional(laplacian(), laplacian(), f, f, dom, 20.0);
    CHECK(r.value == doctest::Approx(M_PI / 4).epsilon(0.02));
    const CVec z = CVec::Zero(F.n_dofs());
    CHECK(bilinear_functional(laplacian(), laplacian(), z, f, dom, 20.0).value == 0.0);
    CHECK_THROWS_AS(bilinear_functional(laplacian(), laplacian(), f, f, dom, 0.5), std::runtime_error);
}

TEST_CASE("Lp gradient estimate") {
    const auto dom = GridDomain::interval(0, M_PI, 256, Boundary::Dirichlet);
    const auto Fv = assemble(laplacian(1, 1.5), dom);
    const CVec u = sine(Fv);
    const auto r2 = lp_gradient_estimate(Fv, 2.0, u, {});
    double vpart = 0.0;
    for (const auto& e : Fv.mesh->elements()) vpart += e.measure * 1.5 * std::norm(Fv.mesh->average(u, e));
    CHECK(r2.weighted_energy == doctest::Approx(gradient_norm2(u, Fv) + vpart).epsilon(1e-12));

    const double c = 0.4;
    const auto Fn = assemble(laplacian(1, -c), dom);
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
        const auto r = lp_gradient_estimate(Fn, p, sine(Fn), {c / 1.0, 0.0});
        CAPTURE(p);
        CHECK(r.inequality_holds);
        CHECK(r.lhs > 0.0);
    }
    // Refinement: three digits.
    auto energy = [](int N) {
        const auto d = GridDomain::interval(0, M_PI, N, Boundary::Dirichlet);
        const auto F = assemble(laplacian(), d);
        return lp_gradient_estimate(F, 3.0, sine(F), {}).weighted_energy;
    };
    CHECK(energy(512) == doctest::Approx(energy(256)).epsilon(1e-3));
}

TEST_CASE("potential truncation") {
    const Cell a{CMat::Identity(1, 1), CVec::Zero(1), CVec::Zero(1), -7.0};
    const Cell b{CMat::Identity(1, 1), CVec::Zero(1), CVec::Zero(1), 2.0};
    const CoefficientTuple t({a, b}, 2);
    const auto t3 = truncate_potential(t, 3.0);
    CHECK(t3.at(0).V == -3.0);
    CHECK(t3.at(1).V == 2.0);
    CHECK(truncate_potential(t, 7.0).at(0).V == -7.0);
    CHECK(truncate_potential(laplacian(1, 4.0), 0.0).at(0).V == 4.0);
    CHECK_THROWS_AS(truncate_potential(t, -1.0), std::invalid_argument);
}

TEST_CASE("truncation convergence for a grid-singular negative potential") {
    const auto dom = square(16, Boundary::Dirichlet);
    const auto V = singular_profile(dom, 0.2, 1.5, {M_PI / 2, M_PI / 2});
    std::vector<Cell> cells;
    for (double v : V) cells.push_back(Cell{CMat::Identity(2, 2), CVec::Zero(2), CVec::Zero(2), -v});
    const CoefficientTuple t(cells, V.size());
    const auto F = assemble(t, dom);
    const CVec f = F.mesh->sample([](double x, double y) { return cplx(std::sin(x) * std::sin(y)); });
    std::vector<double> nl;
    for (int n = 1; n <= 256; n *= 2) nl.push_back(n);
    const auto r = check_truncation_convergence(t, dom, f, 0.5, nl, 1e-2, true);
    CHECK(r.passed);
    CHECK(r.grad_errors.front() > 0.0);
    CHECK(r.grad_errors.back() == 0.0);
    for (double c : r.lower_bound_constants) CHECK(c > 0.2);

    const auto bounded = check_truncation_convergence(laplacian(2, -0.5), dom, f, 0.5, {1.0, 2.0});
    CHECK(bounded.grad_errors[0] == 0.0);
    CHECK(bounded.potential_errors[1] == 0.0);
}
