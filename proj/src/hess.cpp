#include "pelllab/hess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace pelllab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Real blocks of the Kronecker pairing: index a = 2j + h picks Re (h = 0) or Im (h = 1)
// of the j-th complex d-vector.
struct Blocks {
    std::vector<RVec> W, MW, C;
};

Blocks make_blocks(const std::vector<Cell>& cells, const CVec& omega,
                   const std::vector<CVec>& xi) {
    const std::size_t N = cells.size();
    if (static_cast<std::size_t>(omega.size()) != N || xi.size() != N)
        throw std::invalid_argument("generalized_hessian: sizes of cells, omega and xi differ");
    Blocks bl;
    for (std::size_t j = 0; j < N; ++j) {
        const CVec axi = cells[j].A * xi[j];
        const CVec wc = omega(j) * cells[j].c;
        bl.W.push_back(xi[j].real());
        bl.W.push_back(xi[j].imag());
        bl.MW.push_back(axi.real());
        bl.MW.push_back(axi.imag());
        bl.C.push_back(wc.real());
        bl.C.push_back(wc.imag());
    }
    return bl;
}

double pair_form(const RMat& K, const std::vector<RVec>& left, const std::vector<RVec>& right) {
    double s = 0.0;
    const auto n = K.rows();
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            if (K(a, b) != 0.0) s += K(a, b) * left[b].dot(right[a]);
    return s;
}

RVec phase_part(cplx z, const CVec& X, bool real_part) {
    const double r = std::abs(z);
    const cplx ph = r > 0 ? std::conj(z) / r : cplx(1.0, 0.0);
    const CVec v = ph * X;
    return real_part ? RVec(v.real()) : RVec(v.imag());
}

RealJet q_real_jet_unchecked(const Vec4& w, const BellmanParams& bp) {
    const auto [z, e] = from_real4(w);
    RealJet j;
    j.value = q_value(z, e, bp);
    j.grad = q_grad_real(z, e, bp);
    j.hess = q_hess_unchecked(z, e, bp);
    return j;
}

CVec omega2(const Vec4& w) {
    CVec om(2);
    om << cplx(w(0), w(1)), cplx(w(2), w(3));
    return om;
}

Cell c_only(const Cell& c) {
    const auto d = c.A.rows();
    return Cell{CMat::Zero(d, d), CVec::Zero(d), c.c, 0.0};
}

Cell v_only(const Cell& c) {
    const auto d = c.A.rows();
    return Cell{CMat::Zero(d, d), CVec::Zero(d), CVec::Zero(d), c.V};
}

Cell a_only(const Cell& c) {
    const auto d = c.A.rows();
    return Cell{c.A, CVec::Zero(d), CVec::Zero(d), 0.0};
}

}  // namespace

RealJet to_real_jet(const Jet4& j) { return {j.value, j.grad, j.hess}; }

RealJet product(const RealJet& a, const RealJet& b) {
    RealJet r;
    r.value = a.value * b.value;
    r.grad = a.value * b.grad + b.value * a.grad;
    r.hess = a.value * b.hess + b.value * a.hess + a.grad * b.grad.transpose() +
             b.grad * a.grad.transpose();
    return r;
}

RealJet power_jet(cplx zeta, double r) {
    const double m = std::abs(zeta);
    if (m == 0.0 && r < 2.0) throw SingularSet("power_jet: F_r is not C² at 0 for r < 2");
    RealJet j;
    const Eigen::Vector2d x(zeta.real(), zeta.imag());
    j.value = std::pow(m, r);
    const double c = m > 0 ? r * std::pow(m, r - 2.0) : (r == 2.0 ? 2.0 : 0.0);
    j.grad = c * x;
    j.hess = c * RMat::Identity(2, 2);
    if (m > 0) j.hess += c * (r - 2.0) * x * x.transpose() / (m * m);
    return j;
}

nlohmann::json to_json(const HessianDecomposition& h) {
    return {{"h_matrix", h.h_matrix},
            {"h_firstorder", h.h_firstorder},
            {"h_c", h.h_c},
            {"g_potential", h.g_potential},
            {"total", h.total}};
}

HessianDecomposition generalized_hessian(const RealJet& phi, const std::vector<Cell>& cells,
                                         const CVec& omega, const std::vector<CVec>& xi) {
    const Blocks bl = make_blocks(cells, omega, xi);
    if (phi.grad.size() != static_cast<Eigen::Index>(2 * cells.size()))
        throw std::invalid_argument("generalized_hessian: jet dimension does not match N");
    HessianDecomposition h;
    h.h_matrix = pair_form(phi.hess, bl.W, bl.MW);
    h.h_c = pair_form(phi.hess, bl.W, bl.C);
    double hb = 0.0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
        const cplx s = (xi[j].array() * cells[j].b.array()).sum();
        hb += phi.grad(2 * j) * s.real() + phi.grad(2 * j + 1) * s.imag();
        const cplx vo = cells[j].V * omega(j);
        h.g_potential += phi.grad(2 * j) * vo.real() + phi.grad(2 * j + 1) * vo.imag();
    }
    h.h_firstorder = h.h_c + hb;
    h.total = h.h_matrix + h.h_firstorder + h.g_potential;
    return h;
}

HessianDecomposition LeibnizSplit::recombined() const {
    HessianDecomposition h;
    h.h_matrix = psi_h_phi.h_matrix + phi_h_psi.h_matrix + L_A;
    h.h_c = psi_h_phi.h_c + phi_h_psi.h_c + T_c;
    h.h_firstorder = psi_h_phi.h_firstorder + phi_h_psi.h_firstorder + T_c;
    h.g_potential = psi_h_phi.g_potential + phi_h_psi.g_potential;
    h.total = h.h_matrix + h.h_firstorder + h.g_potential;
    return h;
}

LeibnizSplit leibniz_split(const RealJet& psi, const RealJet& phi, const std::vector<Cell>& cells,
                           const CVec& omega, const std::vector<CVec>& xi) {
    auto scaled = [](HessianDecomposition h, double s) {
        h.h_matrix *= s;
        h.h_firstorder *= s;
        h.h_c *= s;
        h.g_potential *= s;
        h.total *= s;
        return h;
    };
    LeibnizSplit out;
    out.psi_h_phi = scaled(generalized_hessian(phi, cells, omega, xi), psi.value);
    out.phi_h_psi = scaled(generalized_hessian(psi, cells, omega, xi), phi.value);
    const RMat L = psi.grad * phi.grad.transpose();
    const RMat Ls = (L + L.transpose()) / 2.0;
    const Blocks bl = make_blocks(cells, omega, xi);
    out.L_A = 2.0 * pair_form(Ls, bl.W, bl.MW);
    out.T_c = 2.0 * pair_form(Ls, bl.W, bl.C);
    return out;
}

ETTerm et_term(const RealJet& psi_n, const RealJet& qphi, const Cell& a, const Cell& b,
               const CVec& omega, const std::vector<CVec>& xi) {
    const std::vector<Cell> cells{a, b};
    ETTerm et;
    const auto hs = generalized_hessian(product(psi_n, qphi), cells, omega, xi);
    const auto hq = generalized_hessian(qphi, cells, omega, xi);
    et.direct = hs.total - psi_n.value * (hq.h_matrix + hq.g_potential);
    const auto ls = leibniz_split(psi_n, qphi, cells, omega, xi);
    et.qphi_h_psi = ls.phi_h_psi.total;
    et.psi_hbc_qphi = psi_n.value * hq.h_firstorder;
    et.L_A = ls.L_A;
    et.T_c = ls.T_c;
    et.split = et.qphi_h_psi + et.psi_hbc_qphi + et.L_A + et.T_c;
    return et;
}

ETTerm et_term(double n, const Cutoff& cut, const BellmanParams& bp, const Mollifier& m,
               const Cell& a, const Cell& b, const Vec4& w, const std::vector<CVec>& xi) {
    if (std::abs(bp.p - cut.params().p) > 1e-12)
        throw std::invalid_argument("et_term: cutoff and Bellman exponents differ");
    return et_term(to_real_jet(cut.psi_n(w, n)), to_real_jet(q_mollified(w, bp, m)), a, b,
                   omega2(w), xi);
}

double f_candidate(cplx zeta, cplx eta, const CVec& X, const CVec& Y, double V, double W,
                   double p) {
    const double q = p / (p - 1.0), s = std::abs(zeta), t = std::abs(eta);
    const double first = (std::pow(s, p - 2.0) + 1.0) * (X.squaredNorm() + V * s * s);
    if (t == 0.0) return first + Y.squaredNorm();
    return first + (std::pow(t, q - 2.0) + 1.0) * (Y.squaredNorm() + W * t * t) + t * t;
}

RemainderForms remainder_forms(const BellmanParams& bp, const Mollifier& m, const Cell& a,
                               const Cell& b, const Vec4& w, const std::vector<CVec>& xi) {
    if (a.V < 0.0 || b.V < 0.0) throw std::invalid_argument("remainder_forms: V, W >= 0 required");
    const std::vector<Cell> cc{c_only(a), c_only(b)}, vv{v_only(a), v_only(b)};
    const RealJet qj = to_real_jet(q_mollified(w, bp, m));
    RemainderForms r;
    r.n_c = generalized_hessian(qj, cc, omega2(w), xi).h_c;
    r.n_v = generalized_hessian(qj, vv, omega2(w), xi).g_potential;
    r.n_c -= m.convolve(
        [&](const Vec4& z) {
            return generalized_hessian(q_real_jet_unchecked(z, bp), cc, omega2(z), xi).h_c;
        },
        w);
    r.n_v -= m.convolve(
        [&](const Vec4& z) {
            const auto [zz, ee] = from_real4(z);
            RealJet j;
            j.value = 0.0;
            j.grad = q_grad_real(zz, ee, bp);
            j.hess = RMat::Zero(4, 4);
            return generalized_hessian(j, vv, omega2(z), xi).g_potential;
        },
        w);
    return r;
}

double convolved_matrix_form(const BellmanParams& bp, const Mollifier& m, const Cell& a,
                             const Cell& b, const Vec4& w, const std::vector<CVec>& xi) {
    const std::vector<Cell> aa{a_only(a), a_only(b)};
    return m.convolve(
        [&](const Vec4& z) {
            return generalized_hessian(q_real_jet_unchecked(z, bp), aa, omega2(z), xi).h_matrix;
        },
        w);
}

double aux_bp(cplx zeta, cplx eta, const CVec& X, const CVec& Y, double p) {
    const double q = p / (p - 1.0), s = std::abs(zeta), t = std::abs(eta);
    if (t == 0.0) throw std::domain_error("aux_bp: eta = 0");
    const RVec rx = phase_part(zeta, X, true), ry = phase_part(eta, Y, true);
    const double k = 1.0 - q / 2.0;
    return std::pow(t, 2.0 - q) * X.squaredNorm() +
           k * k * s * s * std::pow(t, -q) * ry.squaredNorm() +
           2.0 * k * s * std::pow(t, 1.0 - q) * rx.dot(ry);
}

double aux_gp(cplx zeta, const CVec& X, double p) {
    const double s = std::abs(zeta);
    const double w = p > 2.0 && s == 0.0 ? 0.0 : std::pow(s, p - 2.0);
    return (p / 2.0) * w *
           ((p / 2.0) * phase_part(zeta, X, true).squaredNorm() +
            (2.0 / p) * phase_part(zeta, X, false).squaredNorm());
}

AuxiliaryHp auxiliary_hp(cplx zeta, cplx eta, const CVec& X, const CVec& Y, double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("auxiliary_hp: p >= 2 required");
    const double q = p / (p - 1.0);
    if (std::pow(std::abs(zeta), p) < std::pow(std::abs(eta), q))
        return {aux_bp(zeta, eta, X, Y, p), HpBranch::b_p};
    return {aux_gp(zeta, X, p), HpBranch::g_p};
}

cplx g_p_function(cplx u, cplx v, double p) {
    const double q = p / (p - 1.0);
    const double a = std::abs(u) > 0 ? std::pow(std::abs(u), p / 2.0 - 1.0) : (p == 2.0 ? 1.0 : 0.0);
    const double b = std::abs(v) > 0 ? std::pow(std::abs(v), 1.0 - q / 2.0) : 0.0;
    return u * std::max(a, b);
}

double tau_form(cplx zeta, cplx eta, const CVec& X, const CVec& Y, double V, double W, double p) {
    const double q = p / (p - 1.0), s = std::abs(zeta), t = std::abs(eta);
    const double tau = std::max(std::pow(s, p - 2.0), std::pow(t, 2.0 - q));
    return tau * (X.squaredNorm() + V * s * s) + (Y.squaredNorm() + W * t * t) / tau;
}

double bellman_form(const BellmanParams& bp, const Cell& a, const Cell& b, cplx zeta, cplx eta,
                    const CVec& X, const CVec& Y) {
    const Jet4 j = q_jet(zeta, eta, bp);
    CVec om(2);
    om << zeta, eta;
    return generalized_hessian(to_real_jet(j), {a, b}, om, {X, Y}).total;
}

namespace {

std::string to_string(ConvexityMode m) { return m == ConvexityMode::plain ? "plain" : "perturbed"; }

Cell positive_part(Cell c) {
    c.V = c.V_plus();
    return c;
}

Cell perturbed_cell(const Cell& c, double p, const SubcriticalityCert& cert) {
    return perturb(CoefficientTuple({c}, 1), p, cert).stored().front();
}

struct Sample {
    cplx z, e;
    CVec X, Y;
};

class Sampler {
public:
    Sampler(int d, double p, const ConvexityOptions& opt)
        : d_(d), p_(p), q_(p / (p - 1.0)), opt_(opt), rng_(opt.seed) {}

    Sample draw(bool zeta_dominant) {
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::normal_distribution<double> G(0.0, std::sqrt(0.5));
        const double lr = std::log(opt_.r_max / opt_.r_min);
        for (;;) {
            const double s = opt_.r_min * std::exp(lr * U(rng_));
            const double t = opt_.r_min * std::exp(lr * U(rng_));
            const double a = std::pow(s, p_), b = std::pow(t, q_);
            if ((a > b) != zeta_dominant) continue;
            if (std::abs(a - b) <= opt_.eps_upsilon * std::max(a, b)) continue;
            // q_jet refuses the absolute 1e-9 band, which the relative test misses near 0.
            if (std::abs(a - b) <= 1e-9 || t <= 1e-9) continue;
            Sample smp;
            smp.z = std::polar(s, 2 * M_PI * U(rng_));
            smp.e = std::polar(t, 2 * M_PI * U(rng_));
            smp.X.resize(d_);
            smp.Y.resize(d_);
            for (int i = 0; i < d_; ++i) {
                smp.X(i) = {G(rng_), G(rng_)};
                smp.Y(i) = {G(rng_), G(rng_)};
            }
            return smp;
        }
    }

private:
    int d_;
    double p_, q_;
    ConvexityOptions opt_;
    std::mt19937_64 rng_;
};

ConvexityReport run_convexity(const Cell& a, const Cell& b, double p, double delta,
                              const ConvexityOptions& opt, double mu_p_a, double mu_q_b) {
    const double q = p / (p - 1.0);
    const auto bp = BellmanParams::make(p, delta);
    const int d = static_cast<int>(a.A.rows());
    const Cell ap = positive_part(a), bpp = positive_part(b);
    const Cell cA = perturbed_cell(a, p, opt.cert_a), cB = perturbed_cell(b, p, opt.cert_b);
    const Cell I{CMat::Identity(d, d), CVec::Zero(d), CVec::Zero(d), 0.0};
    const double k = p * q * std::min(mu_p_a / p, mu_q_b / q);

    ConvexityReport rep;
    rep.mode = opt.mode;
    rep.p = p;
    rep.delta = delta;
    rep.mu_p = mu_p_a;
    rep.mu_q = mu_q_b;
    Sampler sampler(d, p, opt);
    for (bool zd : {true, false}) {
        RegionSlack rs;
        rs.region = zd ? "zeta_dominant" : "eta_dominant";
        rs.min_slack = kInf;
        rs.min_region_i_excess = kInf;
        rs.histogram.assign(kSlackBins, 0);
        const int n = opt.n_samples / 2;
        for (int i = 0; i < n; ++i) {
            const Sample s = sampler.draw(zd);
            const double sz = std::abs(s.z), se = std::abs(s.e);
            double num, den;
            if (opt.mode == ConvexityMode::plain) {
                num = bellman_form(bp, a, b, s.z, s.e, s.X, s.Y);
                den = tau_form(s.z, s.e, s.X, s.Y, a.V, b.V, p);
                if (zd) {
                    const double bound =
                        k * ((p - 1.0) * std::pow(sz, p - 2.0) * (s.X.squaredNorm() + a.V * sz * sz) +
                             (q - 1.0) * std::pow(se, q - 2.0) * (s.Y.squaredNorm() + b.V * se * se));
                    if (bound > 0)
                        rs.min_region_i_excess = std::min(rs.min_region_i_excess, (num - bound) / bound);
                }
            } else {
                const double lhs = bellman_form(bp, ap, bpp, s.z, s.e, s.X, s.Y);
                CVec om1(1), om2(1);
                om1 << s.z;
                om2 << s.e;
                const double hfp = generalized_hessian(power_jet(s.z, p), {I}, om1, {s.X}).total;
                const double hfq = generalized_hessian(power_jet(s.e, q), {I}, om2, {s.Y}).total;
                const double hp = auxiliary_hp(s.z, s.e, s.X, s.Y, p).value;
                CVec om(2);
                om << s.z, s.e;
                const RealJet qj = to_real_jet(q_jet(s.z, s.e, bp));
                const Cell gv_a{CMat::Zero(d, d), CVec::Zero(d), CVec::Zero(d),
                                opt.cert_a.sigma * ap.V};
                const Cell gv_b{CMat::Zero(d, d), CVec::Zero(d), CVec::Zero(d),
                                opt.cert_b.sigma * bpp.V};
                const double gsig = generalized_hessian(qj, {gv_a, gv_b}, om, {s.X, s.Y}).g_potential;
                const double extras = opt.cert_a.alpha * (p * q / 4.0 * hfp + 2.0 * delta * hp) +
                                      opt.cert_b.alpha * (q + (2.0 - q) * delta) * (p / 4.0) * hfq +
                                      gsig;
                num = lhs - extras;
                den = tau_form(s.z, s.e, s.X, s.Y, ap.V, bpp.V, p);
                // H^{(A+,B+)} = H^{(C,D)} + (pq/4) H^{(α₁I, α₂I)} + G^{(σ₁V+, σ₂W+)}
                const double hcd = generalized_hessian(qj, {cA, cB}, om, {s.X, s.Y}).total;
                const Cell ia{opt.cert_a.alpha * CMat::Identity(d, d), CVec::Zero(d), CVec::Zero(d), 0.0};
                const Cell ib{opt.cert_b.alpha * CMat::Identity(d, d), CVec::Zero(d), CVec::Zero(d), 0.0};
                const double hi = generalized_hessian(qj, {ia, ib}, om, {s.X, s.Y}).total;
                const double err = std::abs(lhs - (hcd + p * q / 4.0 * hi + gsig));
                rep.max_decomposition_error = std::max(
                    rep.max_decomposition_error, err / std::max(1.0, std::abs(lhs)));
            }
            const double ratio = num / den;
            int bin = 0;
            if (ratio > 0.0) {
                const double u = (std::log10(ratio) - kSlackLogMin) / (kSlackLogMax - kSlackLogMin);
                bin = std::clamp(static_cast<int>(u * kSlackBins), 0, kSlackBins - 1);
            }
            ++rs.histogram[bin];
            if (ratio < rs.min_slack) {
                rs.min_slack = ratio;
                rs.argmin_point = to_real4(s.z, s.e);
            }
            ++rs.n_samples;
        }
        rep.regions.push_back(rs);
    }
    rep.passed = true;
    for (const auto& r : rep.regions) {
        rep.passed = rep.passed && r.min_slack > 0.0;
        if (opt.mode == ConvexityMode::plain && r.region == "zeta_dominant")
            rep.passed = rep.passed && r.min_region_i_excess >= -1e-9;
    }
    if (opt.mode == ConvexityMode::perturbed)
        rep.passed = rep.passed && rep.max_decomposition_error <= 1e-10;
    return rep;
}

}  // namespace

nlohmann::json to_json(const ConvexityReport& r) {
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& s : r.regions) {
        const auto& w = s.argmin_point;
        nlohmann::json j{{"mode", to_string(r.mode)},
                         {"region", s.region},
                         {"n_samples", s.n_samples},
                         {"min_slack", s.min_slack},
                         {"argmin_point", {w(0), w(1), w(2), w(3)}},
                         {"histogram", s.histogram}};
        if (r.mode == ConvexityMode::plain && s.region == "zeta_dominant")
            j["min_region_i_excess"] = s.min_region_i_excess;
        regions.push_back(j);
    }
    return {{"mode", to_string(r.mode)},
            {"p", r.p},
            {"delta", r.delta},
            {"deltas_tried", r.deltas_tried},
            {"mu_p", r.mu_p},
            {"mu_q", r.mu_q},
            {"max_decomposition_error", r.max_decomposition_error},
            {"regions", regions},
            {"passed", r.passed}};
}

ConvexityReport verify_convexity(const Cell& a, const Cell& b, double p,
                                 const ConvexityOptions& opt) {
    if (!(p >= 2.0)) throw std::invalid_argument("verify_convexity: p >= 2 required");
    if (a.A.rows() != b.A.rows()) throw std::invalid_argument("verify_convexity: dimensions differ");
    const double q = p / (p - 1.0);
    Cell ca = a, cb = b;
    if (opt.mode == ConvexityMode::perturbed) {
        opt.cert_a.validate();
        opt.cert_b.validate();
        ca = perturbed_cell(a, p, opt.cert_a);
        cb = perturbed_cell(b, p, opt.cert_b);
    } else if (a.V < 0.0 || b.V < 0.0) {
        throw std::invalid_argument("verify_convexity: plain mode needs V, W >= 0");
    }
    const double mp = mu_p(ca, p), m2 = mu_p(ca, 2.0), mq = mu_p(cb, q);
    if (!(mp > 0.0 && m2 > 0.0 && mq > 0.0))
        throw std::invalid_argument("verify_convexity: class precondition fails (mu_p=" +
                                    std::to_string(mp) + ", mu_2=" + std::to_string(m2) +
                                    ", mu_q=" + std::to_string(mq) + ")");
    if (opt.delta) return run_convexity(a, b, p, *opt.delta, opt, mp, mq);
    std::vector<double> tried;
    ConvexityReport rep;
    for (int k = 1; k <= opt.max_k; ++k) {
        const double delta = std::ldexp(1.0, -k);
        tried.push_back(delta);
        rep = run_convexity(a, b, p, delta, opt, mp, mq);
        if (rep.passed) break;
    }
    rep.deltas_tried = tried;
    return rep;
}

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

CVec gaussian_cvec(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    CVec v(d);
    for (int i = 0; i < d; ++i) v(i) = {g(rng), g(rng)};
    return v;
}

}  // namespace

nlohmann::json to_json(const DominationReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"n", row.n},
                        {"nu", row.nu},
                        {"n_samples", row.n_samples},
                        {"max_ratio", row.max_ratio},
                        {"argmax", {row.argmax(0), row.argmax(1), row.argmax(2), row.argmax(3)}}});
    return {{"quantity", r.quantity},
            {"rows", rows},
            {"growth_exponents", r.growth_exponents},
            {"max_growth", r.max_growth},
            {"passed", r.passed}};
}

DominationReport check_et_domination(const CutoffParams& cp, double delta, const Cell& a,
                                     const Cell& b, const std::vector<double>& nu_list,
                                     const std::vector<double>& n_list, int n_samples,
                                     unsigned seed, int quad_order) {
    if (a.V < 0.0 || b.V < 0.0) throw std::invalid_argument("check_et_domination: V, W >= 0");
    const Cutoff cut(cp);
    const auto bp = BellmanParams::make(cp.p, delta);
    const int d = static_cast<int>(a.A.rows());
    constexpr RegionLabel labels[] = {RegionLabel::I, RegionLabel::R_zeta, RegionLabel::R_eta,
                                      RegionLabel::T, RegionLabel::O};
    DominationReport rep;
    rep.quantity = "et_term";
    for (double nu : nu_list) {
        const Mollifier m(nu, quad_order);
        std::vector<double> maxima;
        for (double n : n_list) {
            std::mt19937_64 rng(seed);
            DominationRow row;
            row.n = n;
            row.nu = nu;
            for (int k = 0; k < n_samples; ++k) {
                const Vec4 w = sample_in_region(labels[k % 5], cp, n, rng);
                const std::vector<CVec> xi{gaussian_cvec(d, rng), gaussian_cvec(d, rng)};
                const ETTerm et = et_term(n, cut, bp, m, a, b, w, xi);
                const auto [z, e] = from_real4(w);
                const double f = f_candidate(z, e, xi[0], xi[1], a.V, b.V, cp.p);
                const double r = std::abs(et.direct) / f;
                if (r > row.max_ratio) {
                    row.max_ratio = r;
                    row.argmax = w;
                }
                ++row.n_samples;
            }
            maxima.push_back(row.max_ratio);
            rep.rows.push_back(row);
        }
        rep.growth_exponents.push_back(loglog_slope(n_list, maxima));
    }
    rep.passed = true;
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
        rep.passed = rep.passed && std::isfinite(rep.rows[i].max_ratio);
    for (double g : rep.growth_exponents) rep.passed = rep.passed && g <= rep.max_growth;
    return rep;
}

DominationReport check_hbc_uniform(double p, double delta, const Cell& a, const Cell& b,
                                   const std::vector<double>& nu_list, int n_samples,
                                   unsigned seed, int quad_order, double r_min, double r_max) {
    if (a.V < 0.0 || b.V < 0.0) throw std::invalid_argument("check_hbc_uniform: V, W >= 0");
    const auto bp = BellmanParams::make(p, delta);
    const double q = p / (p - 1.0);
    const int d = static_cast<int>(a.A.rows());
    const std::vector<Cell> cells{a, b};
    DominationReport rep;
    rep.quantity = "h_bc";
    std::vector<double> maxima;
    for (double nu : nu_list) {
        const Mollifier m(nu, quad_order);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        const double lr = std::log(r_max / r_min);
        DominationRow row;
        row.nu = nu;
        for (int k = 0; k < n_samples; ++k) {
            const cplx z = std::polar(r_min * std::exp(lr * U(rng)), 2 * M_PI * U(rng));
            const cplx e = std::polar(r_min * std::exp(lr * U(rng)), 2 * M_PI * U(rng));
            const std::vector<CVec> xi{gaussian_cvec(d, rng), gaussian_cvec(d, rng)};
            const Vec4 w = to_real4(z, e);
            CVec om(2);
            om << z, e;
            const double h =
                generalized_hessian(to_real_jet(q_mollified(w, bp, m)), cells, om, xi).h_firstorder;
            const double s = std::abs(z), t = std::abs(e);
            const double f = (std::pow(s, p - 2.0) + 1.0) * (xi[0].squaredNorm() + a.V * s * s) +
                             (std::pow(t, q - 2.0) + 1.0) * (xi[1].squaredNorm() + b.V * t * t);
            const double r = std::abs(h) / f;
            if (r > row.max_ratio) {
                row.max_ratio = r;
                row.argmax = w;
            }
            ++row.n_samples;
        }
        maxima.push_back(row.max_ratio);
        rep.rows.push_back(row);
    }
    // Uniformity in ν: the sup must not blow up as ν decreases.
    rep.growth_exponents.push_back(-loglog_slope(nu_list, maxima));
    rep.passed = true;
    for (const auto& row : rep.rows) rep.passed = rep.passed && std::isfinite(row.max_ratio);
    rep.passed = rep.passed && rep.growth_exponents.front() <= rep.max_growth;
    return rep;
}

}  // namespace pelllab
