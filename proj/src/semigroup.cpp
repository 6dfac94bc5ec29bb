#include "pelllab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "pelllab/bellman.hpp"
#include "pelllab/hess.hpp"

namespace pelllab {

namespace {

using Triplet = Eigen::Triplet<cplx>;

const Cell& cell_of(const CoefficientTuple& t, std::size_t x) {
    return t.is_constant() ? t.stored().front() : t.at(x);
}

void check_fit(const CoefficientTuple& t, const GridDomain& dom, const char* who) {
    if (t.d() != dom.dim)
        throw std::invalid_argument(std::string(who) + ": tuple dimension differs from the domain");
    if (!t.is_constant() && t.n_cells() != dom.cell_count())
        throw std::invalid_argument(std::string(who) + ": tuple has " +
                                    std::to_string(t.n_cells()) + " cells, domain has " +
                                    std::to_string(dom.cell_count()));
}

// A broadcast tuple restated with the domain's cell count.
CoefficientTuple fit_to(const CoefficientTuple& t, const GridDomain& dom) {
    return t.is_constant() ? CoefficientTuple(t.stored(), dom.cell_count()) : t;
}

SpMat diag(const RVec& m) {
    SpMat D(m.size(), m.size());
    std::vector<Triplet> tr;
    for (Eigen::Index k = 0; k < m.size(); ++k) tr.emplace_back(k, k, m(k));
    D.setFromTriplets(tr.begin(), tr.end());
    return D;
}

RVec element_grad(const Element& e, int i, int d) { return e.grad.col(i).head(d); }

// Per-element vertex average and gradient of nodal u.
struct ElemData {
    cplx avg;
    CVec grad;
};

ElemData elem_data(const Mesh& mesh, const CVec& u, const Element& e) {
    return {mesh.average(u, e), mesh.gradient(u, e)};
}

double time_step_count(double span, double dt_max) {
    return std::max(1.0, std::ceil(span / dt_max - 1e-9));
}

// Evolve u over [0, span] in equal steps of at most dt_max.
CVec advance(const DiscreteForm& form, const CVec& u, double span, const EvolveOptions& opt) {
    if (span <= 0.0) return u;
    const double m = time_step_count(span, opt.dt_max);
    const Propagator P(form, opt.scheme, span / m, opt.theta);
    CVec v = u;
    for (int k = 0; k < static_cast<int>(m); ++k) v = P.step(v);
    return v;
}

}  // namespace

DiscreteForm assemble(const CoefficientTuple& t, const GridDomain& domain) {
    domain.validate();
    check_fit(t, domain, "assemble");
    for (const auto& c : t.stored())
        if (!(ellipticity_constants(c.A).lambda > 0.0))
            throw std::invalid_argument("assemble: A is not elliptic at a cell");

    DiscreteForm F;
    F.mesh = std::make_shared<const Mesh>(domain);
    const Mesh& mesh = *F.mesh;
    const int n = mesh.n_dofs(), d = domain.dim;
    F.mass = mesh.mass();
    F.bc = domain.bc;
    F.h = 0.0;
    for (int a = 0; a < d; ++a) F.h = std::max(F.h, domain.h(a));
    F.V.resize(domain.cell_count());
    for (std::size_t x = 0; x < domain.cell_count(); ++x) F.V[x] = cell_of(t, x).V;

    std::vector<Triplet> tA, tb, tc, tV;
    std::vector<Eigen::Triplet<double>> tD;
    for (const auto& e : mesh.elements()) {
        const Cell& c = cell_of(t, e.cell);
        const double w = e.measure / e.nv;
        for (int i = 0; i < e.nv; ++i) {
            const int ki = mesh.dof(e.node[i]);
            if (ki < 0) continue;
            const RVec gi = element_grad(e, i, d);
            // u⟨c,∇v⟩ with v = φ_i, u = φ_j
            const cplx cgi = (c.c.transpose() * gi.cast<cplx>())(0);
            tV.emplace_back(ki, ki, c.V * w);
            for (int j = 0; j < e.nv; ++j) {
                const int kj = mesh.dof(e.node[j]);
                if (kj < 0) continue;
                const RVec gj = element_grad(e, j, d);
                tA.emplace_back(ki, kj, e.measure * (gi.cast<cplx>().transpose() * c.A * gj.cast<cplx>())(0));
                tD.emplace_back(ki, kj, e.measure * gi.dot(gj));
                tb.emplace_back(ki, kj, w * (c.b.transpose() * gj.cast<cplx>())(0));
                tc.emplace_back(ki, kj, w * cgi);
            }
        }
    }
    auto build = [n](SpMat& M, const std::vector<Triplet>& tr) {
        M.resize(n, n);
        M.setFromTriplets(tr.begin(), tr.end());
    };
    build(F.term_A, tA);
    build(F.term_b, tb);
    build(F.term_c, tc);
    build(F.term_V, tV);
    F.dirichlet_energy.resize(n, n);
    F.dirichlet_energy.setFromTriplets(tD.begin(), tD.end());
    F.stiffness = F.term_A + F.term_b + F.term_c + F.term_V;
    return F;
}

std::string to_string(Scheme s) {
    return s == Scheme::BackwardEuler ? "backward_euler" : "crank_nicolson";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "backward_euler" || s == "BackwardEuler") return Scheme::BackwardEuler;
    if (s == "crank_nicolson" || s == "CrankNicolson") return Scheme::CrankNicolson;
    throw std::invalid_argument("unknown scheme: " + s);
}

Propagator::Propagator(const DiscreteForm& form, Scheme scheme, double dt, double theta)
    : dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("Propagator: dt > 0 required");
    const SpMat M = diag(form.mass);
    const SpMat K = std::polar(1.0, theta) * form.stiffness;
    const double w = scheme == Scheme::BackwardEuler ? 1.0 : 0.5;
    const SpMat lhs = M + (w * dt) * K;
    rhs_ = scheme == Scheme::BackwardEuler ? M : SpMat(M - (w * dt) * K);
    lu_.compute(lhs);
    if (lu_.info() != Eigen::Success) throw std::runtime_error("Propagator: sparse LU failed");
}

CVec Propagator::step(const CVec& u) const { return lu_.solve(rhs_ * u); }

double stiffness_radius(const DiscreteForm& form) {
    double r = 0.0;
    RVec rows = RVec::Zero(form.n_dofs());
    for (int k = 0; k < form.stiffness.outerSize(); ++k)
        for (SpMat::InnerIterator it(form.stiffness, k); it; ++it) rows(it.row()) += std::abs(it.value());
    for (int k = 0; k < form.n_dofs(); ++k) r = std::max(r, rows(k) / form.mass(k));
    return r;
}

std::vector<SemigroupState> evolve(const DiscreteForm& form, const CVec& f,
                                   const std::vector<double>& t_grid, const EvolveOptions& opt) {
    if (f.size() != form.n_dofs()) throw std::invalid_argument("evolve: size of f differs from the dofs");
    if (!(opt.dt_max > 0.0)) throw std::invalid_argument("evolve: dt_max > 0 required");
    for (std::size_t k = 0; k < t_grid.size(); ++k)
        if (t_grid[k] < 0.0 || (k > 0 && t_grid[k] < t_grid[k - 1]))
            throw std::invalid_argument("evolve: t_grid must be nondecreasing and >= 0");
    const double rho = opt.scheme == Scheme::CrankNicolson ? stiffness_radius(form) : 0.0;

    std::vector<SemigroupState> out;
    std::vector<std::unique_ptr<Propagator>> cache;
    CVec u = f;
    double t = 0.0;
    for (double tk : t_grid) {
        const double span = tk - t;
        if (span > 0.0) {
            const double m = time_step_count(span, opt.dt_max);
            const double dt = span / m;
            if (opt.scheme == Scheme::CrankNicolson && dt * rho > opt.cn_guard)
                throw std::domain_error("evolve: dt too large for Crank-Nicolson (dt*rho = " +
                                        std::to_string(dt * rho) + ")");
            auto it = std::find_if(cache.begin(), cache.end(), [&](const auto& c) {
                return std::abs(c->dt() - dt) <= 1e-12 * dt;
            });
            if (it == cache.end()) {
                cache.push_back(std::make_unique<Propagator>(form, opt.scheme, dt, opt.theta));
                it = cache.end() - 1;
            }
            for (int k = 0; k < static_cast<int>(m); ++k) u = (*it)->step(u);
            t = tk;
        }
        out.push_back({tk, u, opt.scheme, opt.dt_max});
    }
    return out;
}

double lp_norm(const CVec& u, double p, const DiscreteForm& form) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p >= 1 required");
    if (std::isinf(p)) return u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
    double s = 0.0;
    for (Eigen::Index k = 0; k < u.size(); ++k) s += form.mass(k) * std::pow(std::abs(u(k)), p);
    return std::pow(s, 1.0 / p);
}

double lp_norm(const CVec& u, double p, const GridDomain& domain) {
    const Mesh mesh(domain);
    if (u.size() != mesh.n_dofs()) throw std::invalid_argument("lp_norm: size differs from the dofs");
    DiscreteForm F;
    F.mass = mesh.mass();
    return lp_norm(u, p, F);
}

double gradient_norm2(const CVec& u, const DiscreteForm& form) {
    double s = 0.0;
    for (const auto& e : form.mesh->elements())
        s += e.measure * form.mesh->gradient(u, e).squaredNorm();
    return s;
}

ProbeSpec ProbeSpec::from_json(const nlohmann::json& j) {
    ProbeSpec p;
    p.type = j.value("type", p.type);
    if (p.type != "eigenmode" && p.type != "bump" && p.type != "random")
        throw std::invalid_argument("probe type must be eigenmode, bump or random");
    const auto params = j.value("params", nlohmann::json::object());
    p.mode = params.value("mode", p.mode);
    p.center = params.value("center", p.center);
    p.width = params.value("width", p.width);
    p.seed = params.value("seed", p.seed);
    p.phase = params.value("phase", p.phase);
    return p;
}

nlohmann::json to_json(const ProbeSpec& p) {
    return {{"type", p.type},
            {"params",
             {{"mode", p.mode}, {"center", p.center}, {"width", p.width}, {"seed", p.seed}, {"phase", p.phase}}}};
}

CVec make_probe(const ProbeSpec& spec, const DiscreteForm& form) {
    const Mesh& mesh = *form.mesh;
    const auto& dom = mesh.domain();
    auto rel = [&](int a, double x) { return (x - dom.extents[a].first) / dom.length(a); };
    CVec u;
    if (spec.type == "random") {
        std::mt19937_64 rng(spec.seed);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        u.resize(mesh.n_dofs());
        for (int k = 0; k < mesh.n_dofs(); ++k) u(k) = {U(rng), U(rng)};
    } else {
        u = mesh.sample([&](double x, double y) -> cplx {
            const double xs[2] = {x, y};
            double v = 1.0;
            if (spec.type == "eigenmode") {
                for (int a = 0; a < dom.dim; ++a) {
                    const double arg = spec.mode * M_PI * rel(a, xs[a]);
                    v *= dom.bc == Boundary::Dirichlet ? std::sin(arg) : std::cos(arg);
                }
            } else {
                double r2 = 0.0;
                for (int a = 0; a < dom.dim; ++a)
                    r2 += std::pow((rel(a, xs[a]) - spec.center) / spec.width, 2);
                v = r2 < 1.0 ? std::pow(1.0 - r2, 3) : 0.0;
            }
            return v;
        });
    }
    if (spec.phase != 0.0) {
        for (int k = 0; k < mesh.n_dofs(); ++k)
            u(k) *= std::polar(1.0, spec.phase * rel(0, mesh.dof_coord(k)[0]));
    }
    return u;
}

std::vector<ProbeSpec> standard_probes(int n_random, unsigned seed) {
    std::vector<ProbeSpec> out;
    out.push_back({"eigenmode", 1});
    out.push_back({"eigenmode", 2});
    out.push_back({"bump", 1, 0.3, 0.2});
    out.push_back({"bump", 1, 0.6, 0.15, 1, 3.0});
    for (int i = 0; i < n_random; ++i) out.push_back({"random", 1, 0.5, 0.25, seed + i});
    return out;
}

double dissipativity_margin(const CVec& u, double p, const DiscreteForm& form, double theta) {
    const CVec Ku = std::polar(1.0, theta) * (form.stiffness * u);
    double num = 0.0, den = 0.0;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const double m = std::abs(u(k));
        if (m == 0.0) continue;
        const cplx J = std::pow(m, p - 2.0) * u(k);
        num += (std::conj(J) * Ku(k)).real();
        den += form.mass(k) * std::pow(m, p);
    }
    return den > 0 ? num / den : 0.0;
}

nlohmann::json to_json(const GrowthSearch& g) {
    return {{"min_margin", g.min_margin},
            {"best_beta", g.best_beta},
            {"best_scale", g.best_scale},
            {"growth_ratio", g.growth_ratio},
            {"growth_detected", g.growth_detected}};
}

GrowthSearch search_lp_growth(const DiscreteForm& form, double p, double theta, int n_beta) {
    const Mesh& mesh = *form.mesh;
    const auto& dom = mesh.domain();
    auto rel = [&](int a, double x) { return (x - dom.extents[a].first) / dom.length(a); };
    const CVec base = mesh.sample([&](double x, double y) -> cplx {
        double v = std::pow(std::sin(M_PI * rel(0, x)), 2);
        if (dom.dim == 2) v *= std::pow(std::sin(M_PI * rel(1, y)), 2);
        return v;
    });
    // u = bump·exp(wψ) with ψ = sin(2πms)/(2πm): the form density is ψ′²|u|^p Re(e^{iθ}A w J̄_p w),
    // of one sign wherever the bump is flat, while |u| stays bounded.
    auto probe = [&](double beta, double R) {
        CVec u = base;
        const cplx w = std::polar(R, beta);
        const double m = std::max(1.0, std::round(R / (2 * M_PI)));
        for (int k = 0; k < mesh.n_dofs(); ++k) {
            const double s = rel(0, mesh.dof_coord(k)[0]);
            u(k) *= std::exp(w * std::sin(2 * M_PI * m * s) / (2 * M_PI * m));
        }
        return CVec(u / u.cwiseAbs().maxCoeff());
    };
    GrowthSearch g;
    g.min_margin = std::numeric_limits<double>::infinity();
    for (double R : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0})
        for (int i = 0; i < n_beta; ++i) {
            const double beta = 2 * M_PI * i / n_beta;
            const double m = dissipativity_margin(probe(beta, R), p, form, theta);
            if (m < g.min_margin) {
                g.min_margin = m;
                g.best_beta = beta;
                g.best_scale = R;
            }
        }
    if (g.min_margin < 0.0) {
        const CVec f = probe(g.best_beta, g.best_scale);
        const double tau = 0.05 / std::abs(g.min_margin);
        EvolveOptions opt;
        opt.scheme = Scheme::CrankNicolson;
        opt.dt_max = tau / 50;
        opt.theta = theta;
        opt.cn_guard = std::numeric_limits<double>::infinity();
        const CVec u = advance(form, f, tau, opt);
        g.growth_ratio = lp_norm(u, p, form) / lp_norm(f, p, form);
        g.growth_detected = g.growth_ratio > 1.0 + 1e-8;
    }
    return g;
}

nlohmann::json to_json(const ContractivityReport& r) {
    return {{"p", r.p},
            {"theta", r.theta},
            {"class_passed", r.class_passed},
            {"class_note", r.class_note},
            {"n_probes", r.n_probes},
            {"max_ratio", r.max_ratio},
            {"eps_h", r.eps_h},
            {"contractive", r.contractive},
            {"growth", to_json(r.growth)},
            {"status", r.status}};
}

ContractivityReport check_contractivity(const CoefficientTuple& t, double p,
                                        const GridDomain& domain, double theta,
                                        const std::vector<CVec>& probes,
                                        const std::vector<double>& t_grid, double eps_h,
                                        double dt_max, bool run_class_check) {
    ContractivityReport rep;
    rep.p = p;
    rep.theta = theta;
    rep.eps_h = eps_h;
    if (run_class_check) {
        const auto cr = check_perturbed_class(rotate(fit_to(t, domain), theta), p, domain, SearchGrid::standard(),
                                              ClassName::BP_p);
        rep.class_passed = cr.member;
        rep.class_note = cr.note;
    } else {
        rep.class_passed = true;
        rep.class_note = "class check skipped";
    }
    const DiscreteForm F = assemble(t, domain);
    EvolveOptions opt;
    opt.dt_max = dt_max;
    opt.theta = theta;
    for (const auto& f : probes) {
        const double n0 = lp_norm(f, p, F);
        if (n0 == 0.0) continue;
        for (const auto& s : evolve(F, f, t_grid, opt))
            rep.max_ratio = std::max(rep.max_ratio, lp_norm(s.u, p, F) / n0);
        ++rep.n_probes;
    }
    rep.contractive = rep.max_ratio <= 1.0 + eps_h;
    if (rep.class_passed) {
        rep.status = rep.contractive ? "pass" : "fail";
    } else {
        rep.growth = search_lp_growth(F, p, theta);
        rep.status = rep.growth.growth_detected || !rep.contractive ? "pass" : "not_refuted";
    }
    return rep;
}

nlohmann::json to_json(const FlowReport& r) {
    return {{"times", r.times},
            {"lp_norms", r.lp_norms},
            {"flow_E", r.flow_E},
            {"max_increase", r.max_increase},
            {"tol_flow", r.tol_flow},
            {"hessian_rel_error", r.hessian_rel_error},
            {"bilinear_value", r.bilinear_value},
            {"class_passed", r.class_passed},
            {"monotone", r.monotone},
            {"passed", r.passed}};
}

namespace {

bool convexity_classes(const CoefficientTuple& a0, const CoefficientTuple& b0, double p,
                       const GridDomain& domain) {
    const double q = p / (p - 1.0);
    const auto grid = SearchGrid::standard();
    const CoefficientTuple a = fit_to(a0, domain), b = fit_to(b0, domain);
    if (a.has_negative_potential() || b.has_negative_potential())
        return check_perturbed_class(a, p, domain, grid, ClassName::SP_p).member &&
               check_perturbed_class(a, 2.0, domain, grid, ClassName::SP_p).member &&
               check_perturbed_class(b, q, domain, grid, ClassName::SP_p).member;
    return check_class(a, p, ClassName::S_p).member && check_class(a, 2.0, ClassName::S_p).member &&
           check_class(b, q, ClassName::S_p).member;
}

}  // namespace

FlowReport flow_monotonicity(const CoefficientTuple& a, const CoefficientTuple& b, double p,
                             const CVec& f, const CVec& g, const GridDomain& domain,
                             const std::vector<double>& t_grid, const FlowOptions& opt) {
    const double q = p / (p - 1.0);
    FlowReport rep;
    rep.class_passed = opt.check_class ? convexity_classes(a, b, p, domain) : true;
    const DiscreteForm FA = assemble(a, domain), FB = assemble(b, domain);
    const auto bp = BellmanParams::make(p, opt.delta);
    EvolveOptions eo;
    eo.dt_max = opt.dt_max;
    const auto U = evolve(FA, f, t_grid, eo);
    const auto Vs = evolve(FB, g, t_grid, eo);
    const std::string ku = "u:" + std::to_string(p), kv = "v:" + std::to_string(q);
    for (std::size_t k = 0; k < U.size(); ++k) {
        rep.times.push_back(U[k].t);
        double E = 0.0;
        for (int i = 0; i < FA.n_dofs(); ++i) E += FA.mass(i) * q_value(U[k].u(i), Vs[k].u(i), bp);
        rep.flow_E.push_back(E);
        rep.lp_norms[ku].push_back(lp_norm(U[k].u, p, FA));
        rep.lp_norms[kv].push_back(lp_norm(Vs[k].u, q, FB));
    }
    for (std::size_t k = 1; k < rep.flow_E.size(); ++k)
        rep.max_increase = std::max(rep.max_increase, rep.flow_E[k] - rep.flow_E[k - 1]);
    const double E0 = rep.flow_E.empty() ? 0.0 : std::abs(rep.flow_E.front());
    rep.tol_flow = opt.c_flow * (FA.h * FA.h + opt.dt_max) * std::max(E0, 1e-12);
    rep.monotone = rep.max_increase <= rep.tol_flow;

    // E′ at the first state: exact for the semi-discrete flow, against −∫𝐇_Q on the elements.
    if (!U.empty()) {
        const CVec& u = U.front().u;
        const CVec& v = Vs.front().u;
        const CVec Ku = FA.stiffness * u, Kv = FB.stiffness * v;
        double discrete = 0.0;
        for (int i = 0; i < FA.n_dofs(); ++i) {
            const Vec4 gr = q_grad_real(u(i), v(i), bp);
            discrete -= gr(0) * Ku(i).real() + gr(1) * Ku(i).imag() + gr(2) * Kv(i).real() +
                        gr(3) * Kv(i).imag();
        }
        double cont = 0.0;
        const Mesh& mesh = *FA.mesh;
        for (const auto& e : mesh.elements()) {
            const auto du = elem_data(mesh, u, e), dv = elem_data(mesh, v, e);
            if (du.avg == 0.0 && dv.avg == 0.0) continue;
            RealJet j;
            j.value = q_value(du.avg, dv.avg, bp);
            j.grad = q_grad_real(du.avg, dv.avg, bp);
            j.hess = q_hess_unchecked(du.avg, dv.avg, bp);
            CVec om(2);
            om << du.avg, dv.avg;
            const std::vector<Cell> cells{cell_of(a, e.cell), cell_of(b, e.cell)};
            cont -= e.measure * generalized_hessian(j, cells, om, {du.grad, dv.grad}).total;
        }
        rep.hessian_rel_error = std::abs(discrete - cont) / std::max(std::abs(cont), 1e-300);
        if (discrete == 0.0 && cont == 0.0) rep.hessian_rel_error = 0.0;
    }
    rep.passed = rep.class_passed && rep.monotone && rep.hessian_rel_error <= 0.1;
    return rep;
}

nlohmann::json to_json(const BilinearResult& r) {
    return {{"value", r.value}, {"tail_estimate", r.tail_estimate}, {"T_max", r.T_max}, {"n_nodes", r.n_nodes}};
}

BilinearResult bilinear_functional(const CoefficientTuple& a, const CoefficientTuple& b,
                                   const CVec& f, const CVec& g, const GridDomain& domain,
                                   double T_max, int n_nodes, double dt_max, double tail_tol) {
    if (!(T_max > 0.0) || n_nodes < 2) throw std::invalid_argument("bilinear_functional: T_max > 0, n_nodes >= 2");
    const DiscreteForm FA = assemble(a, domain), FB = assemble(b, domain);
    const Mesh& mesh = *FA.mesh;
    auto integrand = [&](const CVec& u, const CVec& v) {
        double s = 0.0;
        for (const auto& e : mesh.elements()) {
            const auto du = elem_data(mesh, u, e), dv = elem_data(mesh, v, e);
            const double Va = std::abs(FA.V[e.cell]), Vb = std::abs(FB.V[e.cell]);
            s += e.measure * std::sqrt(du.grad.squaredNorm() + Va * std::norm(du.avg)) *
                 std::sqrt(dv.grad.squaredNorm() + Vb * std::norm(dv.avg));
        }
        return s;
    };
    EvolveOptions opt;
    opt.dt_max = dt_max;
    const double smax = std::sqrt(T_max);
    CVec u = f, v = g;
    double t = 0.0, prev_I = integrand(u, v), prev_s = 0.0, value = 0.0, last_I = prev_I, last_t = 0.0;
    for (int k = 1; k < n_nodes; ++k) {
        const double s = smax * k / (n_nodes - 1), tk = s * s;
        u = advance(FA, u, tk - t, opt);
        v = advance(FB, v, tk - t, opt);
        const double I = integrand(u, v);
        value += 0.5 * (s - prev_s) * (2 * prev_s * prev_I + 2 * s * I);
        last_t = t;
        last_I = prev_I;
        t = tk;
        prev_s = s;
        prev_I = I;
    }
    BilinearResult r;
    r.value = value;
    r.T_max = T_max;
    r.n_nodes = n_nodes;
    if (prev_I == 0.0) {
        r.tail_estimate = 0.0;
    } else {
        const double rate = -std::log(prev_I / last_I) / (t - last_t);
        r.tail_estimate = rate > 0.0 ? prev_I / rate : std::numeric_limits<double>::infinity();
    }
    if (r.tail_estimate > tail_tol * std::max(std::abs(value), 1e-300))
        throw std::runtime_error("bilinear_functional: tail beyond T_max not converged (estimate " +
                                 std::to_string(r.tail_estimate) + ")");
    return r;
}

nlohmann::json to_json(const GradientEstimateReport& r) {
    return {{"p", r.p},
            {"weighted_energy", r.weighted_energy},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"inequality_holds", r.inequality_holds}};
}

GradientEstimateReport lp_gradient_estimate(const DiscreteForm& form, double p, const CVec& u,
                                            const SubcriticalityCert& cert) {
    cert.validate();
    const double q = p / (p - 1.0);
    const Mesh& mesh = *form.mesh;
    const int d = mesh.dim();
    const Cell I{CMat::Identity(d, d), CVec::Zero(d), CVec::Zero(d), 0.0};
    GradientEstimateReport r;
    r.p = p;
    double hf = 0.0, vplus = 0.0;
    for (const auto& e : mesh.elements()) {
        const auto du = elem_data(mesh, u, e);
        const double m = std::abs(du.avg);
        if (m == 0.0) continue;
        const double V = form.V[e.cell], Vp = std::max(V, 0.0), Vm = std::max(-V, 0.0);
        r.weighted_energy += e.measure * std::pow(m, p - 2.0) * (du.grad.squaredNorm() + Vp * m * m);
        r.lhs += e.measure * Vm * std::pow(m, p);
        vplus += e.measure * Vp * std::pow(m, p);
        CVec om(1);
        om << du.avg;
        hf += e.measure * generalized_hessian(power_jet(du.avg, p), {I}, om, {du.grad}).total;
    }
    r.rhs = cert.alpha * (q / 4.0) * hf + cert.sigma * vplus;
    r.inequality_holds = r.lhs <= r.rhs;
    return r;
}

CoefficientTuple truncate_potential(const CoefficientTuple& t, double n) {
    if (!(n >= 0.0)) throw std::invalid_argument("truncate_potential: n >= 0 required");
    return t.map([n](Cell c) {
        if (c.V < 0.0) c.V = -std::min(-c.V, n);
        return c;
    });
}

nlohmann::json to_json(const TruncationReport& r) {
    return {{"n_list", r.n_list},
            {"grad_errors", r.grad_errors},
            {"potential_errors", r.potential_errors},
            {"lower_bound_constants", r.lower_bound_constants},
            {"max_V_minus", r.max_V_minus},
            {"monotone", r.monotone},
            {"zero_after_saturation", r.zero_after_saturation},
            {"passed", r.passed}};
}

namespace {

// Smallest λ with (K+K*)/2 x = λ B x, B = D + lumped V₊, by inverse iteration.
double form_lower_bound(const DiscreteForm& F) {
    const SpMat H = (F.stiffness + SpMat(F.stiffness.adjoint())) * 0.5;
    RVec vp = RVec::Zero(F.n_dofs());
    for (const auto& e : F.mesh->elements())
        for (int i = 0; i < e.nv; ++i) {
            const int k = F.mesh->dof(e.node[i]);
            if (k >= 0) vp(k) += std::max(F.V[e.cell], 0.0) * e.measure / e.nv;
        }
    const SpMat B = F.dirichlet_energy.cast<cplx>() + diag(vp);
    Eigen::SparseLU<SpMat> lu(H);
    if (lu.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    CVec x = CVec::Ones(F.n_dofs());
    double lam = 0.0;
    for (int it = 0; it < 500; ++it) {
        x = lu.solve(B * x);
        x /= x.norm();
        const double nl = x.dot(H * x).real() / x.dot(B * x).real();
        if (it > 0 && std::abs(nl - lam) <= 1e-12 * std::abs(nl)) {
            lam = nl;
            break;
        }
        lam = nl;
    }
    return lam;
}

}  // namespace

TruncationReport check_truncation_convergence(const CoefficientTuple& t, const GridDomain& domain,
                                              const CVec& f, double z,
                                              const std::vector<double>& n_list, double dt_max,
                                              bool lower_bounds) {
    if (!(z > 0.0)) throw std::invalid_argument("check_truncation_convergence: real z > 0 required");
    TruncationReport rep;
    rep.n_list = n_list;
    for (const auto& c : t.stored()) rep.max_V_minus = std::max(rep.max_V_minus, c.V_minus());
    EvolveOptions opt;
    opt.dt_max = dt_max;
    const DiscreteForm F = assemble(t, domain);
    const CVec u = advance(F, f, z, opt);
    const Mesh& mesh = *F.mesh;
    for (double n : n_list) {
        const DiscreteForm Fn = assemble(truncate_potential(t, n), domain);
        const CVec un = advance(Fn, f, z, opt);
        rep.grad_errors.push_back(std::sqrt(gradient_norm2(CVec(un - u), F)));
        double pe = 0.0;
        for (const auto& e : mesh.elements()) {
            const cplx a = std::sqrt(std::abs(Fn.V[e.cell])) * mesh.average(un, e);
            const cplx b = std::sqrt(std::abs(F.V[e.cell])) * mesh.average(u, e);
            pe += e.measure * std::norm(a - b);
        }
        rep.potential_errors.push_back(std::sqrt(pe));
        if (lower_bounds) rep.lower_bound_constants.push_back(form_lower_bound(Fn));
    }
    rep.monotone = true;
    for (std::size_t i = 1; i < n_list.size(); ++i) {
        rep.monotone = rep.monotone && rep.grad_errors[i] <= rep.grad_errors[i - 1] &&
                       rep.potential_errors[i] <= rep.potential_errors[i - 1];
    }
    rep.zero_after_saturation = true;
    for (std::size_t i = 0; i < n_list.size(); ++i)
        if (n_list[i] >= rep.max_V_minus)
            rep.zero_after_saturation = rep.zero_after_saturation && rep.grad_errors[i] == 0.0 &&
                                        rep.potential_errors[i] == 0.0;
    rep.passed = rep.monotone && rep.zero_after_saturation;
    return rep;
}

std::vector<double> singular_profile(const GridDomain& domain, double c, double s,
                                     std::array<double, 2> x0, int sub) {
    domain.validate();
    std::vector<double> V(domain.cell_count());
    for (std::size_t x = 0; x < V.size(); ++x) {
        const auto ctr = domain.cell_center(x);
        double acc = 0.0;
        int cnt = 0;
        const int sy = domain.dim == 2 ? sub : 1;
        for (int i = 0; i < sub; ++i)
            for (int j = 0; j < sy; ++j) {
                const double px = ctr[0] + domain.h(0) * ((i + 0.5) / sub - 0.5);
                double r2 = (px - x0[0]) * (px - x0[0]);
                if (domain.dim == 2) {
                    const double py = ctr[1] + domain.h(1) * ((j + 0.5) / sub - 0.5);
                    r2 += (py - x0[1]) * (py - x0[1]);
                }
                acc += c * std::pow(r2, -s / 2.0);
                ++cnt;
            }
        V[x] = acc / cnt;
    }
    return V;
}

}  // namespace pelllab
