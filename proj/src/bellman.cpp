#include "pelllab/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <boost/math/special_functions/legendre.hpp>

namespace pelllab {

BellmanParams BellmanParams::make(double p, double delta) {
    BellmanParams bp;
    bp.p = p;
    bp.q = p > 1.0 ? p / (p - 1.0) : 0.0;
    bp.delta = delta;
    bp.validate();
    return bp;
}

void BellmanParams::validate() const {
    if (!(p > 1.0)) throw std::invalid_argument("Bellman: p must be > 1");
    if (std::abs(1.0 / p + 1.0 / q - 1.0) > 1e-14)
        throw std::invalid_argument("Bellman: q must be the conjugate of p");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("Bellman: delta must lie in (0,1)");
}

namespace {

// Q in u = |ζ|², v = |η|² for p ≥ 2, with derivatives.
struct G {
    double g = 0, gu = 0, gv = 0, guu = 0, guv = 0, gvv = 0;
};

// x^e with 0^e = 0 for the terms we only ever multiply by vanishing factors.
double pw(double x, double e) { return x > 0.0 ? std::pow(x, e) : (e == 0.0 ? 1.0 : 0.0); }

G g_core(double u, double v, double p, double q, double d, bool second) {
    G r;
    const double hp = p / 2.0, hq = q / 2.0;
    const bool lower = pw(u, hp) <= pw(v, hq) && v > 0.0;
    if (lower) {
        // |ζ|^p + |η|^q + δ|ζ|²|η|^{2−q}
        r.g = pw(u, hp) + pw(v, hq) + d * u * pw(v, 1.0 - hq);
        r.gu = hp * pw(u, hp - 1.0) + d * pw(v, 1.0 - hq);
        r.gv = hq * pw(v, hq - 1.0) + d * (1.0 - hq) * u * pw(v, -hq);
        if (second) {
            r.guu = hp == 1.0 ? 0.0 : hp * (hp - 1.0) * pw(u, hp - 2.0);
            r.guv = d * (1.0 - hq) * pw(v, -hq);
            r.gvv = hq * (hq - 1.0) * pw(v, hq - 2.0) - d * (1.0 - hq) * hq * u * pw(v, -hq - 1.0);
        }
    } else {
        const double a = 1.0 + 2.0 * d / p, b = 1.0 + d * (2.0 / q - 1.0);
        r.g = a * pw(u, hp) + b * pw(v, hq);
        r.gu = a * hp * pw(u, hp - 1.0);
        r.gv = b * hq * pw(v, hq - 1.0);
        if (second) {
            r.guu = hp == 1.0 ? 0.0 : a * hp * (hp - 1.0) * pw(u, hp - 2.0);
            r.gvv = b * hq * (hq - 1.0) * pw(v, hq - 2.0);
        }
    }
    return r;
}

struct Core {
    cplx z, e;
    double p, q;
    bool swapped;
};

Core core(cplx zeta, cplx eta, const BellmanParams& bp) {
    if (bp.swapped()) return {eta, zeta, bp.q, bp.p, true};
    return {zeta, eta, bp.p, bp.q, false};
}

// Real gradient in core coordinates; the η part is written as q|η|^{q−2}η-type products so
// that η = 0 gives 0 instead of 0·∞.
Vec4 grad_core(const Core& c, double d) {
    const double u = std::norm(c.z), v = std::norm(c.e);
    const G g = g_core(u, v, c.p, c.q, d, false);
    Vec4 out;
    out(0) = 2.0 * g.gu * c.z.real();
    out(1) = 2.0 * g.gu * c.z.imag();
    if (v > 0.0) {
        out(2) = 2.0 * g.gv * c.e.real();
        out(3) = 2.0 * g.gv * c.e.imag();
    } else {
        out(2) = out(3) = 0.0;
    }
    return out;
}

Mat4 hess_core(const Core& c, double d) {
    const double u = std::norm(c.z), v = std::norm(c.e);
    const G g = g_core(u, v, c.p, c.q, d, true);
    const Eigen::Vector2d zr(c.z.real(), c.z.imag()), er(c.e.real(), c.e.imag());
    Mat4 H;
    H.topLeftCorner<2, 2>() =
        (u > 0.0 ? Eigen::Matrix2d(4.0 * g.guu * zr * zr.transpose()) : Eigen::Matrix2d::Zero()) +
        2.0 * g.gu * Eigen::Matrix2d::Identity();
    H.bottomRightCorner<2, 2>() =
        (v > 0.0 ? Eigen::Matrix2d(4.0 * g.gvv * er * er.transpose()) : Eigen::Matrix2d::Zero()) +
        2.0 * g.gv * Eigen::Matrix2d::Identity();
    H.topRightCorner<2, 2>() = 4.0 * g.guv * zr * er.transpose();
    H.bottomLeftCorner<2, 2>() = H.topRightCorner<2, 2>().transpose();
    return H;
}

Vec4 unswap(const Vec4& g, bool swapped) {
    if (!swapped) return g;
    return {g(2), g(3), g(0), g(1)};
}

Mat4 unswap(const Mat4& H, bool swapped) {
    if (!swapped) return H;
    Eigen::PermutationMatrix<4> P;
    P.indices() << 2, 3, 0, 1;
    return P * H * P.transpose();
}

}  // namespace

double q_value(cplx zeta, cplx eta, const BellmanParams& bp) {
    const Core c = core(zeta, eta, bp);
    return g_core(std::norm(c.z), std::norm(c.e), c.p, c.q, bp.delta, false).g;
}

Vec4 q_grad_real(cplx zeta, cplx eta, const BellmanParams& bp) {
    const Core c = core(zeta, eta, bp);
    return unswap(grad_core(c, bp.delta), c.swapped);
}

std::pair<cplx, cplx> q_grad(cplx zeta, cplx eta, const BellmanParams& bp) {
    const Vec4 g = q_grad_real(zeta, eta, bp);
    return {cplx(g(0), -g(1)) / 2.0, cplx(g(2), -g(3)) / 2.0};
}

double singular_distance(cplx zeta, cplx eta, const BellmanParams& bp) {
    const Core c = core(zeta, eta, bp);
    const double a = std::pow(std::abs(c.z), c.p), b = std::pow(std::abs(c.e), c.q);
    return std::min(std::abs(a - b), std::abs(c.e));
}

Mat4 q_hess_unchecked(cplx zeta, cplx eta, const BellmanParams& bp) {
    const Core c = core(zeta, eta, bp);
    return unswap(hess_core(c, bp.delta), c.swapped);
}

Mat4 q_hess(cplx zeta, cplx eta, const BellmanParams& bp, double eps) {
    if (singular_distance(zeta, eta, bp) <= eps)
        throw SingularSet("q_hess: point lies within the singular band of Q");
    return q_hess_unchecked(zeta, eta, bp);
}

Jet4 q_jet(cplx zeta, cplx eta, const BellmanParams& bp, double eps) {
    return {q_value(zeta, eta, bp), q_grad_real(zeta, eta, bp), q_hess(zeta, eta, bp, eps)};
}

void MollifierParams::validate() const {
    if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("mollifier: nu must lie in (0,1)");
    if (quad_order < 4) throw std::invalid_argument("mollifier: quad_order must be >= 4");
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
    const auto pos = boost::math::legendre_p_zeros<double>(order);
    std::vector<double> x, w;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it)
        if (*it != 0.0) x.push_back(-*it);
    for (double z : pos) x.push_back(z);
    for (double xi : x) {
        const double d = boost::math::legendre_p_prime(order, xi);
        w.push_back(2.0 / ((1.0 - xi * xi) * d * d));
    }
    return {x, w};
}

namespace {
constexpr int kBumpPower = 6;
constexpr double kHalfWidth = 0.5;
}  // namespace

Mollifier::Mollifier(MollifierParams mp) : mp_(mp) {
    mp_.validate();
    const auto [x, w] = gauss_legendre(mp_.quad_order);
    const int n = static_cast<int>(x.size());
    const double h = kHalfWidth, m = kBumpPower, nu = mp_.nu;
    // 1D weights for ∫ g(y) k_ν(y) dy, ∫ g k_ν', ∫ g k_ν'' with y = ν h x.
    std::vector<double> W(n), D1(n), D2(n), Y(n);
    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += w[i] * h * std::pow(1.0 - x[i] * x[i], m);
    norm1_ = norm;
    const double c = 1.0 / norm;  // k(s) = c(1 − (s/h)²)^m
    for (int i = 0; i < n; ++i) {
        const double r = 1.0 - x[i] * x[i], s = h * x[i];
        const double k = c * std::pow(r, m);
        const double k1 = c * m * std::pow(r, m - 1) * (-2.0 * s / (h * h));
        const double k2 = c * m *
                          ((m - 1) * std::pow(r, m - 2) * std::pow(2.0 * s / (h * h), 2) -
                           std::pow(r, m - 1) * 2.0 / (h * h));
        Y[i] = nu * s;
        W[i] = w[i] * h * k;
        D1[i] = w[i] * h * k1 / nu;
        D2[i] = w[i] * h * k2 / (nu * nu);
    }
    const std::size_t total = static_cast<std::size_t>(n) * n * n * n;
    y_.reserve(total);
    w0_.reserve(total);
    w1_.reserve(total);
    w2_.reserve(total);
    int idx[4];
    for (idx[0] = 0; idx[0] < n; ++idx[0])
        for (idx[1] = 0; idx[1] < n; ++idx[1])
            for (idx[2] = 0; idx[2] < n; ++idx[2])
                for (idx[3] = 0; idx[3] < n; ++idx[3]) {
                    Vec4 y, g;
                    Mat4 H;
                    double prod = 1.0;
                    for (int a = 0; a < 4; ++a) {
                        y(a) = Y[idx[a]];
                        prod *= W[idx[a]];
                    }
                    for (int a = 0; a < 4; ++a) {
                        double ga = D1[idx[a]];
                        for (int b = 0; b < 4; ++b)
                            if (b != a) ga *= W[idx[b]];
                        g(a) = ga;
                        for (int b = 0; b < 4; ++b) {
                            double hab = 1.0;
                            for (int e = 0; e < 4; ++e) {
                                if (a == b && e == a)
                                    hab *= D2[idx[e]];
                                else if (a != b && (e == a || e == b))
                                    hab *= D1[idx[e]];
                                else
                                    hab *= W[idx[e]];
                            }
                            H(a, b) = hab;
                        }
                    }
                    y_.push_back(y);
                    w0_.push_back(prod);
                    w1_.push_back(g);
                    w2_.push_back(H);
                }
}

double Mollifier::kernel(const Vec4& y) const {
    const double h = kHalfWidth * mp_.nu;
    double v = 1.0;
    for (int a = 0; a < 4; ++a) {
        const double s = y(a) / h;
        if (std::abs(s) >= 1.0) return 0.0;
        v *= std::pow(1.0 - s * s, kBumpPower) / (norm1_ * mp_.nu);
    }
    return v;
}

Jet4 q_mollified(const Vec4& w, const BellmanParams& bp, const Mollifier& m) {
    return m.apply(
        [&](const Vec4& z) { return q_value({z(0), z(1)}, {z(2), z(3)}, bp); }, w);
}

nlohmann::json to_json(const BoundReport& r) {
    return {{"bound_id", r.bound_id},
            {"empirical_constant", r.empirical_constant},
            {"empirical_constant_half", r.constant_half},
            {"n_samples", r.n_samples},
            {"max_witness_point", {r.max_witness_point(0), r.max_witness_point(1),
                                   r.max_witness_point(2), r.max_witness_point(3)}},
            {"passed", r.passed}};
}

std::vector<BoundReport> verify_second_order_bounds(const BellmanParams& bp, const Mollifier& m,
                                                    int n_samples, unsigned seed) {
    bp.validate();
    if (n_samples < 1) throw std::invalid_argument("verify_second_order_bounds: n_samples >= 1");
    const double p = std::max(bp.p, bp.q), q = std::min(bp.p, bp.q), nu = m.nu();
    // Bounds are stated for p ≥ 2 in the (ζ, η) roles; swap coordinates for p < 2.
    struct Shape {
        const char* id;
        std::function<double(const Jet4&, double, double, double)> qty;  // (jet, |ζ|, |η|, |ω|)
        std::function<double(double, double, double)> shape;
    };
    auto block = [](const Mat4& H, int i, int j) { return H.block<2, 2>(i, j).norm(); };
    const std::vector<Shape> shapes = {
        {"Q*phi:value", [](const Jet4& J, double, double, double) { return std::abs(J.value); },
         [&](double, double, double r) { return std::pow(r, p) + std::pow(r, q) + 1.0; }},
        {"Q*phi:gradient", [](const Jet4& J, double, double, double) { return J.grad.norm(); },
         [&](double, double, double r) { return std::pow(r, p - 1) + std::pow(r, q - 1); }},
        {"Q*phi:hessian", [](const Jet4& J, double, double, double) { return J.hess.norm(); },
         [&](double s, double t, double) {
             return std::pow(nu, q - 2) * (std::pow(s, p - 2) + std::pow(t, 2 - q) + 1.0);
         }},
        {"d_zeta", [](const Jet4& J, double, double, double) { return J.grad.head<2>().norm() / 2; },
         [&](double s, double t, double) {
             return (std::pow(s, p - 2) + std::pow(t, 2 - q) + 1.0) * s;
         }},
        {"d_eta", [](const Jet4& J, double, double, double) { return J.grad.tail<2>().norm() / 2; },
         [&](double, double t, double) { return std::pow(t, q - 1); }},
        {"D2_zeta_zeta", [&](const Jet4& J, double, double, double) { return block(J.hess, 0, 0); },
         [&](double s, double t, double) {
             return std::pow(s, p - 2) + std::pow(t, 2 - q) + 1.0;
         }},
        {"D2_eta_eta", [&](const Jet4& J, double, double, double) { return block(J.hess, 2, 2); },
         [&](double, double, double) { return std::pow(nu, q - 2); }},
        {"D2_zeta_eta", [&](const Jet4& J, double, double, double) { return block(J.hess, 0, 2); },
         [](double, double, double) { return 1.0; }},
        {"D2_eta_eta*|eta|",
         [&](const Jet4& J, double, double t, double) { return block(J.hess, 2, 2) * t; },
         [&](double, double t, double) { return std::pow(t, q - 1); }},
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto logu = [&](double lo, double hi) { return lo * std::pow(hi / lo, U(rng)); };
    std::vector<BoundReport> reps(shapes.size());
    for (std::size_t b = 0; b < shapes.size(); ++b) {
        reps[b].bound_id = shapes[b].id;
        reps[b].n_samples = 2 * n_samples;
    }
    const BellmanParams core_bp = bp.swapped() ? BellmanParams::make(bp.q, bp.delta) : bp;
    for (int k = 0; k < 2 * n_samples; ++k) {
        // Moduli log-uniform over [1e-4, 1e2]; every 8th sample puts ζ or η at 0.
        double s = logu(1e-4, 1e2), t = logu(1e-4, 1e2);
        if (k % 8 == 3) s = 0.0;
        if (k % 8 == 7) t = 0.0;
        const cplx z = std::polar(s, 2 * M_PI * U(rng)), e = std::polar(t, 2 * M_PI * U(rng));
        const Vec4 w = to_real4(z, e);
        const Jet4 J = q_mollified(w, core_bp, m);
        const double r = std::hypot(s, t);
        for (std::size_t b = 0; b < shapes.size(); ++b) {
            const double sh = shapes[b].shape(s, t, r);
            const double qt = shapes[b].qty(J, s, t, r);
            // A zero shape is met only where the quantity vanishes by symmetry; allow roundoff.
            const double ratio = sh > 0 ? qt / sh
                                 : (qt > 1e-10 * (1.0 + std::abs(J.value))
                                        ? std::numeric_limits<double>::infinity()
                                        : 0.0);
            if (ratio > reps[b].empirical_constant) {
                reps[b].empirical_constant = ratio;
                reps[b].max_witness_point = bp.swapped() ? Vec4(w(2), w(3), w(0), w(1)) : w;
            }
        }
        if (k == n_samples - 1)
            for (auto& r0 : reps) r0.constant_half = r0.empirical_constant;
    }
    for (auto& r0 : reps)
        r0.passed = std::isfinite(r0.empirical_constant) &&
                    r0.empirical_constant <= 1.25 * r0.constant_half + 1e-12;
    return reps;
}

}  // namespace pelllab
