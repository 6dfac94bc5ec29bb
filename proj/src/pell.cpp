#include "pelllab/pell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <boost/math/special_functions/erf.hpp>
#include <boost/random/sobol.hpp>
#include <json.hpp>

#include "pelllab/mesh.hpp"

namespace pelllab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_p(double p) {
    if (!(p > 1.0)) throw std::invalid_argument("exponent p must be > 1");
}

double min_sym_eig(const RMat& S) {
    const RMat H = (S + S.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<RMat> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace

std::string to_string(ClassName c) {
    switch (c) {
        case ClassName::A_p: return "A_p";
        case ClassName::W_p: return "W_p";
        case ClassName::S_p: return "S_p";
        case ClassName::B_p: return "B_p";
        case ClassName::WP_p: return "WP_p";
        case ClassName::SP_p: return "SP_p";
        case ClassName::BP_p: return "BP_p";
    }
    return "?";
}

ClassName class_from_string(const std::string& s) {
    for (auto c : {ClassName::A_p, ClassName::W_p, ClassName::S_p, ClassName::B_p, ClassName::WP_p,
                   ClassName::SP_p, ClassName::BP_p})
        if (to_string(c) == s) return c;
    throw std::invalid_argument("unknown class '" + s + "'");
}

CVec jp_apply(const CVec& xi, double p) {
    require_p(p);
    CVec out = xi;
    out += (p - 2.0) * xi.real().cast<cplx>();
    return out;
}

RMat real_form(const CMat& A) {
    const auto d = A.rows();
    RMat M(2 * d, 2 * d);
    M << A.real(), -A.imag(), A.imag(), A.real();
    return M;
}

RVec realify(const CVec& v) {
    RVec x(2 * v.size());
    x << v.real(), v.imag();
    return x;
}

CVec complexify(const RVec& x) {
    const auto d = x.size() / 2;
    CVec v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = {x(i), x(d + i)};
    return v;
}

double delta_p(const CMat& A, double p) {
    require_p(p);
    const auto d = A.rows();
    const double g = std::abs(1.0 - 2.0 / p);
    RVec r(2 * d);
    r << RVec::Ones(d), -RVec::Ones(d);
    // Re⟨Aξ, ξ + gξ̄⟩ = xᵀ (I + gR) M(A) x with x = V(ξ), R = diag(I, −I).
    const RMat S = (RVec::Ones(2 * d) + g * r).asDiagonal() * real_form(A);
    return min_sym_eig(S);
}

double delta_p(const CoefficientTuple& t, double p) {
    double m = kInf;
    for (const auto& c : t.stored()) m = std::min(m, delta_p(c.A, p));
    return m;
}

double delta_p_search(const CMat& A, double p, int n_samples, int n_starts, unsigned seed) {
    require_p(p);
    const auto d = A.rows();
    const double g = std::abs(1.0 - 2.0 / p);
    auto f = [&](const CVec& xi) {
        return (xi.dot(A * xi)).real() + g * (xi.transpose() * A * xi)(0).real();
    };
    boost::random::sobol qrng(static_cast<unsigned>(2 * d));
    const double scale = 1.0 / (static_cast<double>(qrng.max()) + 1.0);
    std::vector<std::pair<double, CVec>> best;
    double fmin = kInf;
    CVec xi(d);
    for (int s = 0; s < n_samples; ++s) {
        for (Eigen::Index i = 0; i < d; ++i) {
            const double u1 = (static_cast<double>(qrng()) + 0.5) * scale;
            const double u2 = (static_cast<double>(qrng()) + 0.5) * scale;
            xi(i) = {std::sqrt(2.0) * boost::math::erf_inv(2.0 * u1 - 1.0),
                     std::sqrt(2.0) * boost::math::erf_inv(2.0 * u2 - 1.0)};
        }
        if (xi.norm() == 0.0) continue;
        xi.normalize();
        const double v = f(xi);
        fmin = std::min(fmin, v);
        if (static_cast<int>(best.size()) < n_starts) {
            best.emplace_back(v, xi);
            std::push_heap(best.begin(), best.end(),
                           [](const auto& a, const auto& b) { return a.first < b.first; });
        } else if (v < best.front().first) {
            std::pop_heap(best.begin(), best.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
            best.back() = {v, xi};
            std::push_heap(best.begin(), best.end(),
                           [](const auto& a, const auto& b) { return a.first < b.first; });
        }
    }
    // Riemannian gradient descent from the best quasi-random points plus random starts.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N01;
    for (int s = 0; s < n_starts / 2; ++s) {
        CVec z(d);
        for (Eigen::Index i = 0; i < d; ++i) z(i) = {N01(rng), N01(rng)};
        z.normalize();
        best.emplace_back(f(z), z);
    }
    const double L = 2.0 * (1.0 + g) * std::max(ellipticity_constants(A).Lambda, 1e-12);
    const CMat H1 = A + A.adjoint();
    const CMat H2 = A + A.transpose();
    for (auto& [v0, z] : best) {
        double v = v0;
        for (int it = 0; it < 4000; ++it) {
            CVec grad = H1 * z + g * (H2 * z).conjugate();
            grad -= z.dot(grad).real() * z;
            CVec zn = z - grad / L;
            zn.normalize();
            const double vn = f(zn);
            z = zn;
            if (std::abs(vn - v) < 1e-16 * std::max(1.0, std::abs(v))) {
                v = vn;
                break;
            }
            v = vn;
        }
        fmin = std::min(fmin, v);
    }
    return fmin;
}

double gamma_p(const Cell& cell, const CVec& xi, double p) {
    const CVec jx = jp_apply(xi, p);
    const CVec lin = cell.b.conjugate() + jp_apply(cell.c, p);
    // ⟨z, w⟩ = Σ z_j w̄_j, so ⟨Aξ, J_pξ⟩ = (J_pξ)^* Aξ.
    return jx.dot(cell.A * xi).real() + xi.dot(lin).real() + cell.V;
}

namespace {

// Γ_p(ξ) = xᵀSx + l·x + V in real coordinates.
void gamma_real_parts(const Cell& cell, double p, RMat& S, RVec& l) {
    const auto d = cell.A.rows();
    RVec jd(2 * d);
    jd << RVec::Constant(d, p - 1.0), RVec::Ones(d);
    const RMat Q = jd.asDiagonal() * real_form(cell.A);
    S = (Q + Q.transpose()) / 2.0;
    l = realify(cell.b.conjugate() + jp_apply(cell.c, p));
}

}  // namespace

double mu_p(const Cell& cell, double p) {
    require_p(p);
    if (cell.V < 0.0) throw std::domain_error("mu_p: defined for nonnegative potentials only");
    RMat S;
    RVec l;
    gamma_real_parts(cell, p, S, l);
    const auto n = S.rows();
    if (cell.V == 0.0) {
        if (l.norm() > 1e-14 * (1.0 + S.norm())) return -kInf;
        return min_sym_eig(S);
    }
    // Pencil (G, diag(I, V)) scaled to a standard symmetric problem.
    const double s = 1.0 / std::sqrt(cell.V);
    RMat G(n + 1, n + 1);
    G.topLeftCorner(n, n) = S;
    G.topRightCorner(n, 1) = l * (s / 2.0);
    G.bottomLeftCorner(1, n) = l.transpose() * (s / 2.0);
    G(n, n) = 1.0;
    return min_sym_eig(G);
}

double mu_p(const CoefficientTuple& t, double p) {
    double m = kInf;
    for (const auto& c : t.stored()) m = std::min(m, mu_p(c, p));
    return m;
}

double mu_p_ray(const Cell& cell, const CVec& e, double p) {
    const double a = gamma_p(Cell{cell.A, CVec::Zero(e.size()), CVec::Zero(e.size()), 0.0}, e, p);
    const CVec lin = cell.b.conjugate() + jp_apply(cell.c, p);
    const double l = e.dot(lin).real();
    if (cell.V == 0.0) return l == 0.0 ? a : -kInf;
    return ((a + 1.0) - std::sqrt((a - 1.0) * (a - 1.0) + l * l / cell.V)) / 2.0;
}

double sector_M(const CoefficientTuple& t) {
    double M = 0.0;
    for (const auto& c : t.stored()) {
        const double gap = (c.b.conjugate() - c.c).norm();
        if (gap == 0.0) continue;
        if (c.V <= 0.0) return kInf;
        M = std::max(M, gap / std::sqrt(c.V));
    }
    return M;
}

nlohmann::json to_json(const ClassReport& r) {
    nlohmann::json j;
    j["class"] = to_string(r.class_name);
    j["p"] = r.p;
    j["member"] = r.member;
    auto opt = [&](const char* k, const std::optional<double>& v) {
        if (!v) return;
        if (std::isfinite(*v))
            j["witness"][k] = *v;
        else
            j["witness"][k] = *v > 0 ? "inf" : "-inf";
    };
    opt("delta_p", r.delta_p);
    opt("mu_p", r.mu_p);
    opt("mu_q", r.mu_q);
    opt("gamma_min", r.gamma_min);
    opt("M", r.M);
    if (r.cert) j["cert"] = {{"alpha", r.cert->alpha}, {"sigma", r.cert->sigma}};
    if (!r.passing.empty()) {
        auto a = nlohmann::json::array();
        for (const auto& c : r.passing) a.push_back({c.alpha, c.sigma});
        j["passing"] = a;
    }
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

ClassReport check_class(const CoefficientTuple& t, double p, ClassName cls, double margin) {
    require_p(p);
    ClassReport r;
    r.class_name = cls;
    r.p = p;
    r.delta_p = delta_p(t, p);
    if (cls == ClassName::A_p) {
        r.member = *r.delta_p > margin;
        return r;
    }
    if (cls != ClassName::W_p && cls != ClassName::S_p && cls != ClassName::B_p)
        throw std::invalid_argument("check_class: use check_perturbed_class for perturbed classes");
    if (t.has_negative_potential()) {
        r.note = "negative potential: class requires V >= 0";
        return r;
    }
    r.M = sector_M(t);
    const bool elliptic_p = *r.delta_p > margin;
    const bool sector = std::isfinite(*r.M);
    const double mp = mu_p(t, p);
    if (cls == ClassName::W_p) {
        r.gamma_min = mp;
        r.member = elliptic_p && sector && mp >= -margin;
        return r;
    }
    r.mu_p = mp;
    bool ok = elliptic_p && sector && mp > margin;
    if (cls == ClassName::B_p) {
        const double q = conjugate_exponent(p);
        r.mu_q = mu_p(t, q);
        ok = ok && *r.mu_q > margin && delta_p(t, q) > margin;
    }
    r.member = ok;
    return r;
}


namespace {

struct PotentialMatrices {
    Eigen::SparseMatrix<double> K;  // ∫∇u·∇v
    RVec m_minus, m_plus;           // lumped ∫V₋|u|², ∫V₊|u|²
    RVec mass;
};

PotentialMatrices potential_matrices(const Mesh& mesh, const std::vector<double>& V) {
    PotentialMatrices pm;
    const int n = mesh.n_dofs();
    std::vector<Eigen::Triplet<double>> trip;
    pm.m_minus = RVec::Zero(n);
    pm.m_plus = RVec::Zero(n);
    for (const auto& e : mesh.elements()) {
        const double v = V.at(e.cell);
        for (int i = 0; i < e.nv; ++i) {
            const int ki = mesh.dof(e.node[i]);
            if (ki < 0) continue;
            if (v < 0) pm.m_minus(ki) += -v * e.measure / e.nv;
            if (v > 0) pm.m_plus(ki) += v * e.measure / e.nv;
            for (int j = 0; j < e.nv; ++j) {
                const int kj = mesh.dof(e.node[j]);
                if (kj < 0) continue;
                const double g = e.grad.col(i).dot(e.grad.col(j)) * e.measure;
                trip.emplace_back(ki, kj, g);
            }
        }
    }
    pm.K.resize(n, n);
    pm.K.setFromTriplets(trip.begin(), trip.end());
    pm.mass = mesh.mass();
    return pm;
}

}  // namespace

SubcriticalReport check_subcritical(const std::vector<double>& V, const SubcriticalityCert& cert,
                                    const GridDomain& domain, int n_probes, unsigned seed) {
    cert.validate();
    if (n_probes < 1) throw std::invalid_argument("check_subcritical: n_probes must be >= 1");
    if (V.size() != domain.cell_count())
        throw std::invalid_argument("check_subcritical: potential does not match the grid");
    SubcriticalReport rep;
    const bool any_negative = std::any_of(V.begin(), V.end(), [](double v) { return v < 0; });
    if (!any_negative) {
        rep.worst_ratio = 0.0;
        rep.worst_probe = "none (V >= 0)";
        return rep;
    }
    const Mesh mesh(domain);
    const auto pm = potential_matrices(mesh, V);
    const RVec B = pm.m_minus - cert.sigma * pm.m_plus;
    double worst = -kInf;
    auto consider = [&](const RVec& v, const std::string& name) {
        const double num = v.dot(B.cwiseProduct(v));
        const double den = v.dot(pm.K * v);
        const double scale = v.dot(pm.mass.cwiseProduct(v));
        double ratio;
        if (den <= 1e-14 * scale)
            ratio = num > 1e-14 * scale ? kInf : 0.0;
        else
            ratio = num / den;
        if (ratio > worst) {
            worst = ratio;
            rep.worst_probe = name;
            rep.violating_probe = v.cast<cplx>();
        }
    };

    // Eigenvectors of the grid Laplacian (closed form on the tensor grid).
    const int dim = domain.dim;
    const bool dir = domain.bc == Boundary::Dirichlet;
    auto mode = [&](int axis, int k, double x) {
        const double L = domain.length(axis), t = (x - domain.extents[axis].first) / L;
        return dir ? std::sin((k + 1) * M_PI * t) : std::cos(k * M_PI * t);
    };
    int count = 0;
    for (int s = 0; count < n_probes; ++s) {
        for (int kx = 0; kx <= s && count < n_probes; ++kx) {
            const int ky = dim == 2 ? s - kx : 0;
            if (dim == 1 && kx != s) continue;
            RVec v(mesh.n_dofs());
            for (int i = 0; i < mesh.n_dofs(); ++i) {
                const auto x = mesh.dof_coord(i);
                v(i) = mode(0, kx, x[0]) * (dim == 2 ? mode(1, ky, x[1]) : 1.0);
            }
            consider(v, "eigenmode(" + std::to_string(kx) + "," + std::to_string(ky) + ")");
            ++count;
        }
    }

    auto bump = [&](const std::vector<double>& c, double w) {
        RVec v(mesh.n_dofs());
        for (int i = 0; i < mesh.n_dofs(); ++i) {
            const auto x = mesh.dof_coord(i);
            double r2 = 0.0;
            for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
            v(i) = std::exp(-r2 / (2.0 * w * w));
        }
        return v;
    };
    std::mt19937_64 rng(seed);
    double hmin = domain.h(0), Lmax = domain.length(0);
    for (int a = 1; a < dim; ++a) {
        hmin = std::min(hmin, domain.h(a));
        Lmax = std::max(Lmax, domain.length(a));
    }
    std::uniform_real_distribution<double> U01(0.0, 1.0);
    for (int k = 0; k < n_probes; ++k) {
        std::vector<double> c(dim);
        for (int a = 0; a < dim; ++a)
            c[a] = domain.extents[a].first + U01(rng) * domain.length(a);
        const double w = 2.0 * hmin * std::pow(Lmax / (2.0 * hmin), U01(rng));
        consider(bump(c, w), "bump#" + std::to_string(k));
    }

    // Adversarial: bumps at the most negative cell, then the exact discrete maximiser.
    const auto it = std::min_element(V.begin(), V.end());
    const auto c = domain.cell_center(static_cast<std::size_t>(it - V.begin()));
    for (double w = 2.0 * hmin; w < Lmax; w *= 2.0) consider(bump(c, w), "adversarial-bump");
    if (mesh.n_dofs() <= 1500) {
        RMat K = RMat(pm.K);
        if (!dir) K += 1e-10 * RMat(pm.mass.asDiagonal());
        Eigen::GeneralizedSelfAdjointEigenSolver<RMat> ges(RMat(B.asDiagonal()), K);
        if (ges.info() == Eigen::Success)
            consider(ges.eigenvectors().col(mesh.n_dofs() - 1), "generalized-eigenvector");
    }
    rep.worst_ratio = worst;
    rep.not_refuted = worst <= cert.alpha * (1.0 + 1e-12) + 1e-14;
    return rep;
}

CoefficientTuple perturb(const CoefficientTuple& t, double p, const SubcriticalityCert& cert) {
    require_p(p);
    const double q = conjugate_exponent(p);
    const double shift = cert.alpha * p * q / 4.0;
    return t.map([&](const Cell& c) {
        Cell o = c;
        o.A -= shift * CMat::Identity(c.A.rows(), c.A.cols());
        o.V = (1.0 - cert.sigma) * c.V_plus();
        return o;
    });
}

SearchGrid SearchGrid::standard(int n_log) {
    SearchGrid g;
    g.alphas.push_back(0.0);
    for (int i = 0; i < n_log; ++i)
        g.alphas.push_back(1e-4 * std::pow(1e5, static_cast<double>(i) / (n_log - 1)));
    for (int i = 0; i <= 9; ++i) g.sigmas.push_back(0.1 * i);
    return g;
}

ClassName base_class(ClassName perturbed) {
    switch (perturbed) {
        case ClassName::WP_p: return ClassName::W_p;
        case ClassName::SP_p: return ClassName::S_p;
        case ClassName::BP_p: return ClassName::B_p;
        default: throw std::invalid_argument("base_class: not a perturbed class");
    }
}

ClassReport check_perturbed_class(const CoefficientTuple& t, double p, const GridDomain& domain,
                                  const SearchGrid& grid, ClassName cls, int n_probes,
                                  double margin) {
    if (grid.alphas.empty() || grid.sigmas.empty())
        throw std::invalid_argument("check_perturbed_class: empty search grid");
    const ClassName base = base_class(cls);
    ClassReport best;
    best.class_name = cls;
    best.p = p;
    double best_score = -kInf;
    auto V = t.potential();
    // A broadcast tuple carries one value for the whole grid.
    if (t.is_constant() && V.size() != domain.cell_count()) V.assign(domain.cell_count(), V.front());
    const bool nonneg = !t.has_negative_potential();
    for (double sigma : grid.sigmas) {
        double worst = 0.0;
        if (!nonneg) {
            SubcriticalityCert probe{0.0, sigma};
            worst = check_subcritical(V, probe, domain, n_probes).worst_ratio;
        }
        for (double alpha : grid.alphas) {
            if (alpha < worst * (1.0 + 1e-12) + 1e-14 && !(nonneg)) continue;
            const SubcriticalityCert cert{alpha, sigma};
            const auto rep = check_class(perturb(t, p, cert), p, base, margin);
            if (!rep.member) continue;
            best.passing.push_back(cert);
            double score = 0.0;
            if (rep.mu_p) score = *rep.mu_p;
            if (rep.mu_q) score = std::min(score, *rep.mu_q);
            if (rep.gamma_min) score = *rep.gamma_min;
            if (score > best_score) {
                best_score = score;
                best.cert = cert;
                best.delta_p = rep.delta_p;
                best.mu_p = rep.mu_p;
                best.mu_q = rep.mu_q;
                best.gamma_min = rep.gamma_min;
                best.M = rep.M;
            }
        }
    }
    best.member = best.cert.has_value();
    best.note = "subcriticality sampled: not refuted";
    return best;
}

CoefficientTuple rotate(const CoefficientTuple& t, double phi) {
    if (std::abs(phi) > M_PI / 2 + 1e-15) throw std::invalid_argument("rotate: |phi| must be <= pi/2");
    const cplx e = std::polar(1.0, phi);
    return t.map([&](const Cell& c) { return Cell{e * c.A, e * c.b, e * c.c, std::cos(phi) * c.V}; });
}

CoefficientTuple adjoint(const CoefficientTuple& t) {
    return t.map([](const Cell& c) {
        return Cell{c.A.adjoint(), c.c.conjugate(), c.b.conjugate(), c.V};
    });
}

}  // namespace pelllab
