#include "pelllab/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

namespace pelllab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double smooth_e(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double bisect_root(const std::function<double(double)>& f, double lo, double hi) {
    auto tol = [](double a, double b) { return std::abs(b - a) < 1e-14; };
    const auto r = boost::math::tools::bisect(f, lo, hi, tol);
    return (r.first + r.second) / 2.0;
}

struct Thresholds {
    double a, A, b, B;  // 3^{1/p}, 4^{1/p}, 3^{1/q}, 4^{1/q}
};

Thresholds thresholds(double p) {
    const double q = p / (p - 1.0);
    return {std::pow(3.0, 1.0 / p), std::pow(4.0, 1.0 / p), std::pow(3.0, 1.0 / q),
            std::pow(4.0, 1.0 / q)};
}

Vec4 with_phases(double s, double t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 2.0 * M_PI);
    return to_real4(std::polar(s, U(rng)), std::polar(t, U(rng)));
}

}  // namespace

std::string to_string(RegionLabel r) {
    switch (r) {
        case RegionLabel::I: return "I";
        case RegionLabel::R_zeta: return "R_zeta";
        case RegionLabel::R_eta: return "R_eta";
        case RegionLabel::T: return "T";
        case RegionLabel::O: return "O";
    }
    return "?";
}

double profile(double x) {
    if (x <= 3.0) return 1.0;
    if (x >= 4.0) return 0.0;
    const double u = smooth_e(4.0 - x), v = smooth_e(x - 3.0);
    return u / (u + v);
}

double kappa_threshold(double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("kappa_threshold: p >= 2 required");
    const double q = p / (p - 1.0);
    const auto th = thresholds(p);
    const double k1 = bisect_root(
        [&](double k) { return std::pow(th.a - 2.0 * k, p - 1.0) - k; }, 0.0, th.a / 2.0);
    const double k2 = bisect_root(
        [&](double k) { return std::pow(th.b - 2.0 * k, q - 1.0) - k; }, 0.0, th.b / 2.0);
    return std::min({k1, k2, 1.0});
}

CutoffParams CutoffParams::make(double p, std::optional<double> kappa, int quad_order) {
    CutoffParams cp;
    cp.p = p;
    cp.q = p / (p - 1.0);
    cp.quad_order = quad_order;
    cp.kappa = kappa ? *kappa : std::min(0.05, kappa_threshold(p) / 2.0);
    cp.validate();
    return cp;
}

void CutoffParams::validate() const {
    if (!(p >= 2.0) || !std::isfinite(p)) throw std::invalid_argument("cutoff: p >= 2 required");
    if (std::abs(q - p / (p - 1.0)) > 1e-12) throw std::invalid_argument("cutoff: q must be p/(p-1)");
    if (!(kappa > 0.0) || !(kappa < kappa_threshold(p)))
        throw std::invalid_argument("cutoff: kappa must lie in (0, delta(p,q))");
    if (quad_order < 2) throw std::invalid_argument("cutoff: quad_order >= 2");
}

double psi_base(cplx zeta, cplx eta, double p) {
    const double q = p / (p - 1.0);
    const double a = std::pow(std::abs(zeta), p), b = std::pow(std::abs(eta), q);
    return profile(std::max(a, b));
}

double distance_to_curve(double s, double t, double p) {
    const double e = p - 1.0;
    auto dist2 = [&](double x) {
        const double dy = std::pow(x, e) - t;
        return (x - s) * (x - s) + dy * dy;
    };
    // Outside [lo, hi] both coordinate gaps grow, so the foot point lies inside.
    const double xt = std::pow(t, 1.0 / e);
    const double lo = std::min(s, xt), hi = std::max(s, xt);
    if (hi - lo < 1e-300) return 0.0;
    constexpr int kScan = 32;
    double best = lo, fbest = dist2(lo);
    for (int i = 1; i <= kScan; ++i) {
        const double x = lo + (hi - lo) * i / kScan;
        const double f = dist2(x);
        if (f < fbest) fbest = f, best = x;
    }
    // Newton on the stationarity condition, kept inside a bracket of one scan step.
    const double step = (hi - lo) / kScan;
    double a = std::max(lo, best - step), b = std::min(hi, best + step), x = best;
    for (int it = 0; it < 60; ++it) {
        const double xe = std::pow(x, e), dy = xe - t;
        const double d1 = x > 0 ? e * std::pow(x, e - 1.0) : (e == 1.0 ? 1.0 : 0.0);
        const double d2 = x > 0 && e != 1.0 ? e * (e - 1.0) * std::pow(x, e - 2.0) : 0.0;
        const double g = 2.0 * (x - s) + 2.0 * dy * d1;
        const double h = 2.0 + 2.0 * d1 * d1 + 2.0 * dy * d2;
        double xn = h > 0 ? x - g / h : (a + b) / 2.0;
        if (!(xn > a && xn < b)) xn = (a + b) / 2.0;
        if (g > 0) b = x; else a = x;
        if (std::abs(xn - x) < 1e-12 * (1.0 + x)) {
            x = xn;
            break;
        }
        x = xn;
    }
    return std::sqrt(std::min({dist2(x), fbest, dist2(lo), dist2(hi)}));
}

RegionLabel classify_moduli(double s, double t, const CutoffParams& cp) {
    const auto th = thresholds(cp.p);
    const double k = cp.kappa;
    if (s < th.a - k && t < th.b - k) return RegionLabel::I;
    if (s > th.A + k || t > th.B + k) return RegionLabel::O;
    if (distance_to_curve(s, t, cp.p) <= k) return RegionLabel::T;
    return std::pow(s, cp.p) > std::pow(t, cp.q) ? RegionLabel::R_zeta : RegionLabel::R_eta;
}

std::pair<cplx, cplx> dilate(cplx zeta, cplx eta, double n, double p) {
    if (!(n >= 1.0)) throw std::invalid_argument("dilate: n >= 1 required");
    const double q = p / (p - 1.0);
    return {zeta / std::pow(n, 1.0 / p), eta / std::pow(n, 1.0 / q)};
}

Cutoff::Cutoff(CutoffParams cp) : cp_(cp), m_(MollifierParams{cp.kappa, cp.quad_order}) {
    cp_.validate();
}

Jet4 Cutoff::psi_kappa(const Vec4& w, bool shortcut) const {
    if (shortcut) {
        const auto [z, e] = from_real4(w);
        const auto r = classify_region(z, e, cp_);
        Jet4 c;
        if (r == RegionLabel::I) c.value = 1.0;
        if (r == RegionLabel::I || r == RegionLabel::O) return c;
    }
    const double p = cp_.p;
    return m_.apply([p](const Vec4& y) { return psi_base({y(0), y(1)}, {y(2), y(3)}, p); }, w);
}

Jet4 Cutoff::psi_n(const Vec4& w, double n, bool shortcut) const {
    const auto [z, e] = from_real4(w);
    const auto [dz, de] = dilate(z, e, n, cp_.p);
    Jet4 j = psi_kappa(to_real4(dz, de), shortcut);
    const double sz = std::pow(n, -1.0 / cp_.p), se = std::pow(n, -1.0 / cp_.q);
    const Vec4 sc(sz, sz, se, se);
    j.grad = j.grad.cwiseProduct(sc);
    j.hess = sc.asDiagonal() * j.hess * sc.asDiagonal();
    return j;
}

Vec4 sample_in_region(RegionLabel r, const CutoffParams& cp, double n, std::mt19937_64& rng) {
    const auto th = thresholds(cp.p);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double k = cp.kappa, smax = th.A + k, tmax = th.B + k;
    for (int tries = 0; tries < 1000000; ++tries) {
        double s, t;
        if (r == RegionLabel::T) {
            // jitter a curve point inside the κ-disc
            const double x = smax * U(rng), rad = k * std::sqrt(U(rng)), ang = 2 * M_PI * U(rng);
            s = x + rad * std::cos(ang);
            t = std::pow(x, cp.p - 1.0) + rad * std::sin(ang);
            if (s < 0 || t < 0) continue;
        } else if (r == RegionLabel::O) {
            s = 2.0 * smax * U(rng);
            t = 2.0 * tmax * U(rng);
        } else {
            s = smax * U(rng);
            t = tmax * U(rng);
        }
        if (classify_moduli(s, t, cp) != r) continue;
        return with_phases(s * std::pow(n, 1.0 / cp.p), t * std::pow(n, 1.0 / cp.q), rng);
    }
    throw std::runtime_error("sample_in_region: no point found in " + to_string(r));
}

nlohmann::json to_json(const AdmissibleReport& r) {
    return {{"n_samples", r.n_samples},
            {"max_value_excess", r.max_value_excess},
            {"max_even_defect", r.max_even_defect},
            {"nesting_violations", r.nesting_violations},
            {"max_inner_defect", r.max_inner_defect},
            {"max_outer_value", r.max_outer_value},
            {"grad_times_modulus", r.grad_times_modulus},
            {"grad_growth_exponent", r.grad_growth_exponent},
            {"omega_geq_one", r.omega_geq_one},
            {"min_annulus_modulus", r.min_annulus_modulus},
            {"passed", r.passed}};
}

AdmissibleReport check_admissible(const Cutoff& c, const std::vector<double>& n_list,
                                  int n_samples, unsigned seed) {
    const auto& cp = c.params();
    std::mt19937_64 rng(seed);
    AdmissibleReport rep;
    const RegionLabel labels[] = {RegionLabel::I, RegionLabel::R_zeta, RegionLabel::R_eta,
                                  RegionLabel::T, RegionLabel::O};
    for (double n : n_list) {
        double gm = 0.0;
        for (auto lab : labels) {
            for (int k = 0; k < n_samples; ++k) {
                const Vec4 w = sample_in_region(lab, cp, n, rng);
                const Jet4 j = c.psi_n(w, n, false);
                ++rep.n_samples;
                rep.max_value_excess = std::max({rep.max_value_excess, j.value - 1.0, -j.value});
                for (int a = 0; a < 4; ++a) {
                    Vec4 f = w;
                    f(a) = -f(a);
                    rep.max_even_defect =
                        std::max(rep.max_even_defect, std::abs(c.psi_n(f, n, false).value - j.value));
                }
                const auto [z, e] = from_real4(w);
                const auto [z1, e1] = dilate(z, e, n + 1.0, cp.p);
                const auto next = classify_region(z1, e1, cp);
                if (lab == RegionLabel::I && next != RegionLabel::I) ++rep.nesting_violations;
                if (lab != RegionLabel::O && next == RegionLabel::O) ++rep.nesting_violations;
                if (lab == RegionLabel::I)
                    rep.max_inner_defect = std::max(rep.max_inner_defect, std::abs(j.value - 1.0));
                else if (lab == RegionLabel::O)
                    rep.max_outer_value = std::max(rep.max_outer_value, std::abs(j.value));
                else
                    gm = std::max(gm, j.grad.norm() * std::max(1.0, w.norm()));
            }
        }
        rep.grad_times_modulus.push_back(gm);
    }
    if (n_list.size() >= 2) {
        // least-squares slope of log(gm) against log(n)
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(n_list.size());
        for (std::size_t i = 0; i < n_list.size(); ++i) {
            const double x = std::log(n_list[i]), y = std::log(rep.grad_times_modulus[i]);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
        }
        const double den = m * sxx - sx * sx;
        rep.grad_growth_exponent = den > 0 ? (m * sxy - sx * sy) / den : 0.0;
    }
    // The annulus at n = 1 reaches down to (3^{1/p} − κ, 0); larger n only scale it outward.
    rep.min_annulus_modulus = std::min(thresholds(cp.p).a, thresholds(cp.p).b) - cp.kappa;
    rep.omega_geq_one = rep.min_annulus_modulus >= 1.0;
    constexpr double tol = 1e-9;
    rep.passed = rep.max_value_excess <= tol && rep.max_even_defect <= tol &&
                 rep.nesting_violations == 0 && rep.max_inner_defect <= tol &&
                 rep.max_outer_value <= tol;
    return rep;
}

nlohmann::json to_json(const ComparabilityReport& r) {
    return {{"n", r.n},           {"n_samples", r.n_samples},   {"ratio_min", r.ratio_min},
            {"ratio_max", r.ratio_max}, {"envelope_C", r.envelope_C}, {"min_modulus", r.min_modulus},
            {"passed", r.passed}};
}

ComparabilityReport check_comparability(const CutoffParams& cp, double n, int n_samples,
                                        unsigned seed) {
    cp.validate();
    std::mt19937_64 rng(seed);
    ComparabilityReport rep;
    rep.n = n;
    rep.ratio_min = kInf;
    rep.min_modulus = kInf;
    for (int k = 0; k < n_samples; ++k) {
        Vec4 w;
        try {
            w = sample_in_region(RegionLabel::T, cp, n, rng);
        } catch (const std::runtime_error&) {
            break;
        }
        const auto [z, e] = from_real4(w);
        const auto [dz, de] = dilate(z, e, n, cp.p);
        const double s = std::abs(dz), t = std::abs(de);
        const double r = std::pow(s, cp.p) / std::pow(t, cp.q);
        rep.ratio_min = std::min(rep.ratio_min, r);
        rep.ratio_max = std::max(rep.ratio_max, r);
        rep.min_modulus = std::min({rep.min_modulus, s, t});
        ++rep.n_samples;
    }
    if (rep.n_samples == 0) throw std::runtime_error("check_comparability: no samples in T");
    const double worst = std::max(rep.ratio_max, 1.0 / rep.ratio_min);
    rep.envelope_C = (std::pow(worst, 1.0 / cp.p) - 1.0) / cp.kappa;
    rep.passed = rep.min_modulus > 0.0 && std::isfinite(worst);
    return rep;
}

nlohmann::json to_json(const CutoffAudit& a) {
    return {{"max_vanishing_defect", a.max_vanishing_defect},
            {"max_constant_defect", a.max_constant_defect},
            {"n_list", a.n_list},
            {"constants", a.constants},
            {"constant_ids", {"d_zeta", "d_eta", "D2_zeta_zeta", "D2_eta_eta", "D2_zeta_eta"}},
            {"passed", a.passed}};
}

CutoffAudit audit_cutoff(const Cutoff& c, const std::vector<double>& n_list, int n_per_region,
                         double tol, unsigned seed) {
    const auto& cp = c.params();
    std::mt19937_64 rng(seed);
    CutoffAudit au;
    au.n_list = n_list;
    auto blk = [](const Mat4& H, int i, int j) { return H.block<2, 2>(i, j).norm(); };
    for (auto lab : {RegionLabel::I, RegionLabel::O, RegionLabel::R_zeta, RegionLabel::R_eta}) {
        for (int k = 0; k < n_per_region; ++k) {
            const Vec4 w = sample_in_region(lab, cp, 1.0, rng);
            const Jet4 j = c.psi_kappa(w, false);
            double v = 0.0;
            switch (lab) {
                case RegionLabel::I:
                    au.max_constant_defect = std::max(au.max_constant_defect, std::abs(j.value - 1));
                    v = std::max(j.grad.norm(), j.hess.norm());
                    break;
                case RegionLabel::O:
                    au.max_constant_defect = std::max(au.max_constant_defect, std::abs(j.value));
                    v = std::max(j.grad.norm(), j.hess.norm());
                    break;
                case RegionLabel::R_zeta:
                    v = std::max({j.grad.tail<2>().norm(), blk(j.hess, 2, 2), blk(j.hess, 0, 2)});
                    break;
                default:
                    v = std::max({j.grad.head<2>().norm(), blk(j.hess, 0, 0), blk(j.hess, 0, 2)});
            }
            au.max_vanishing_defect = std::max(au.max_vanishing_defect, v);
        }
    }
    const double ip = 1.0 / cp.p, iq = 1.0 / cp.q;
    for (double n : n_list) {
        std::vector<double> C(5, 0.0);
        for (auto lab : {RegionLabel::R_zeta, RegionLabel::R_eta, RegionLabel::T}) {
            for (int k = 0; k < n_per_region; ++k) {
                const Vec4 w = sample_in_region(lab, cp, n, rng);
                const Jet4 j = c.psi_n(w, n);
                C[0] = std::max(C[0], std::pow(n, ip) * j.grad.head<2>().norm());
                C[1] = std::max(C[1], std::pow(n, iq) * j.grad.tail<2>().norm());
                C[2] = std::max(C[2], std::pow(n, 2 * ip) * blk(j.hess, 0, 0));
                C[3] = std::max(C[3], std::pow(n, 2 * iq) * blk(j.hess, 2, 2));
                C[4] = std::max(C[4], std::pow(n, ip + iq) * blk(j.hess, 0, 2));
            }
        }
        au.constants.push_back(C);
    }
    bool stable = true;
    for (int b = 0; b < 5 && !au.constants.empty(); ++b) {
        double lo = kInf, hi = 0.0;
        for (const auto& C : au.constants) lo = std::min(lo, C[b]), hi = std::max(hi, C[b]);
        stable = stable && std::isfinite(hi) && lo > 0.0 && hi <= 1.5 * lo;
    }
    au.passed = au.max_vanishing_defect <= tol && au.max_constant_defect <= tol && stable;
    return au;
}

void write_region_csv(std::ostream& os, const CutoffParams& cp, int n_s, int n_t) {
    const auto th = thresholds(cp.p);
    const double smax = 1.5 * (th.A + cp.kappa), tmax = 1.5 * (th.B + cp.kappa);
    os << "s,t,label\n";
    for (int i = 0; i < n_s; ++i)
        for (int j = 0; j < n_t; ++j) {
            const double s = smax * i / (n_s - 1), t = tmax * j / (n_t - 1);
            os << s << ',' << t << ',' << to_string(classify_moduli(s, t, cp)) << '\n';
        }
}

}  // namespace pelllab
