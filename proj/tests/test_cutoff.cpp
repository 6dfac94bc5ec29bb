#include <doctest.h>

#include <sstream>

#include "pelllab/cutoff.hpp"

using namespace pelllab;

namespace {

// Brute-force distance to {(x, x^{p-1})} by dense scanning.
double scan_distance(double s, double t, double p) {
    double best = std::hypot(s, t);
    for (int i = 0; i <= 400000; ++i) {
        const double x = 4.0 * i / 400000;
        best = std::min(best, std::hypot(x - s, std::pow(x, p - 1) - t));
    }
    return best;
}

}  // namespace

TEST_CASE("profile") {
    CHECK(profile(0.0) == 1.0);
    CHECK(profile(3.0) == 1.0);
    CHECK(profile(4.0) == 0.0);
    CHECK(profile(8.0) == 0.0);
    CHECK(profile(3.5) == doctest::Approx(0.5));
    double prev = 1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = profile(3.0 + i / 1000.0);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("psi_base examples") {
    CHECK(psi_base(0, 0, 3.0) == 1.0);
    const double s35 = std::pow(3.5, 1.0 / 3);
    const double v = psi_base(s35, 0.1, 3.0);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(psi_base(std::pow(5.0, 1.0 / 3), 0.1, 3.0) == 0.0);
    CHECK(psi_base(2.0, 0.1, 3.0) == 0.0);
    // the η branch
    CHECK(psi_base(0.1, std::pow(3.5, 2.0 / 3), 3.0) == doctest::Approx(v));
}

TEST_CASE("distance to the curve matches a dense scan") {
    CHECK(distance_to_curve(1.0, 0.0, 2.0) == doctest::Approx(1 / std::sqrt(2.0)));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0, 3);
    for (double p : {2.0, 3.0, 5.0}) {
        for (int k = 0; k < 30; ++k) {
            const double s = U(rng) / 1.5, t = U(rng);
            CHECK(distance_to_curve(s, t, p) == doctest::Approx(scan_distance(s, t, p)).epsilon(1e-6));
        }
    }
}

TEST_CASE("kappa threshold and defaults") {
    for (double p : {2.0, 3.0, 4.0, 10.0}) {
        const double d = kappa_threshold(p);
        CHECK(d > 0.0);
        CHECK(std::pow(std::pow(3.0, 1 / p) - 2 * d, p - 1) - d == doctest::Approx(0.0).epsilon(1e-10));
        const auto cp = CutoffParams::make(p);
        CHECK(cp.kappa == doctest::Approx(std::min(0.05, d / 2)));
    }
    CHECK_THROWS_AS(CutoffParams::make(3.0, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(CutoffParams::make(1.5), std::invalid_argument);
}

TEST_CASE("classify_region examples and partition") {
    const auto cp = CutoffParams::make(3.0, 0.15);
    CHECK(classify_region(0, 0, cp) == RegionLabel::I);
    CHECK(classify_region(std::pow(10.0, 1 / 3.0) * 10, 0, cp) == RegionLabel::O);
    CHECK(classify_region(std::pow(3.5, 1 / 3.0), std::pow(3.5, 2 / 3.0), cp) == RegionLabel::T);
    // every sampled label reproduces under the classifier used by the sampler
    std::mt19937_64 rng(3);
    for (auto lab : {RegionLabel::I, RegionLabel::R_zeta, RegionLabel::R_eta, RegionLabel::T,
                     RegionLabel::O})
        for (int k = 0; k < 50; ++k) {
            const Vec4 w = sample_in_region(lab, cp, 1.0, rng);
            const auto [z, e] = from_real4(w);
            CHECK(classify_region(z, e, cp) == lab);
        }
}

TEST_CASE("dilation") {
    const cplx z(1, 2), e(-3, 0.5);
    CHECK(dilate(z, e, 1, 3.0).first == z);
    const auto [a, b] = dilate(z, e, 16, 2.0);
    CHECK(std::abs(a - z / 4.0) < 1e-15);
    CHECK(std::abs(b - e / 4.0) < 1e-15);
    const auto [c, d] = dilate(z, e, 7, 3.0);
    CHECK(std::pow(std::abs(c), 3.0) == doctest::Approx(std::pow(std::abs(z), 3.0) / 7));
    CHECK(std::pow(std::abs(d), 1.5) == doctest::Approx(std::pow(std::abs(e), 1.5) / 7));
    CHECK_THROWS_AS(dilate(z, e, 0.5, 3.0), std::invalid_argument);
}

TEST_CASE("psi_kappa constants, vanishing pattern, shortcut agreement") {
    const Cutoff c(CutoffParams::make(3.0, 0.15, 8));
    std::mt19937_64 rng(4);
    for (int k = 0; k < 5; ++k) {
        const Vec4 wi = sample_in_region(RegionLabel::I, c.params(), 1.0, rng);
        CHECK(std::abs(c.psi_kappa(wi, false).value - 1.0) < 1e-12);
        const Vec4 wo = sample_in_region(RegionLabel::O, c.params(), 1.0, rng);
        CHECK(std::abs(c.psi_kappa(wo, false).value) < 1e-12);
        const Vec4 wr = sample_in_region(RegionLabel::R_eta, c.params(), 1.0, rng);
        CHECK(c.psi_kappa(wr, false).grad.head<2>().norm() < 1e-9);
        const Vec4 wz = sample_in_region(RegionLabel::R_zeta, c.params(), 1.0, rng);
        CHECK(c.psi_kappa(wz, false).grad.tail<2>().norm() < 1e-9);
        const Vec4 wt = sample_in_region(RegionLabel::T, c.params(), 1.0, rng);
        const Jet4 jt = c.psi_kappa(wt, false), js = c.psi_kappa(wt, true);
        CHECK(jt.value == js.value);
        CHECK(jt.value >= -1e-12);
        CHECK(jt.value <= 1 + 1e-12);
    }
}

TEST_CASE("psi_n applies the chain rule of the dilation") {
    const Cutoff c(CutoffParams::make(3.0, 0.15, 8));
    std::mt19937_64 rng(8);
    for (double n : {1.0, 10.0, 1000.0}) {
        const Vec4 w = sample_in_region(RegionLabel::T, c.params(), n, rng);
        const Jet4 j = c.psi_n(w, n);
        const auto [z, e] = from_real4(w);
        const auto [dz, de] = dilate(z, e, n, 3.0);
        const Jet4 k = c.psi_kappa(to_real4(dz, de));
        CHECK(j.value == k.value);
        const double sz = std::pow(n, -1.0 / 3), se = std::pow(n, -2.0 / 3);
        CHECK(std::abs(j.grad(0) - sz * k.grad(0)) < 1e-14);
        CHECK(std::abs(j.grad(3) - se * k.grad(3)) < 1e-14);
        CHECK(std::abs(j.hess(1, 2) - sz * se * k.hess(1, 2)) < 1e-13);
    }
}

TEST_CASE("quadrature gradient of psi_kappa converges to the difference quotient") {
    const Vec4 w(1.05, 0.3, 1.2, -0.9);  // in T for p = 3, kappa = 0.15
    double prev = 1e300;
    for (int order : {6, 10, 16}) {
        const Cutoff c(CutoffParams::make(3.0, 0.15, order));
        const Jet4 j = c.psi_kappa(w, false);
        double err = 0.0;
        for (int a = 0; a < 4; ++a) {
            Vec4 wp = w, wm = w;
            wp(a) += 1e-5;
            wm(a) -= 1e-5;
            const double fd = (c.psi_kappa(wp, false).value - c.psi_kappa(wm, false).value) / 2e-5;
            err = std::max(err, std::abs(fd - j.grad(a)));
        }
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 2e-2);
}

TEST_CASE("psi_n tends to 1 pointwise") {
    const Cutoff c(CutoffParams::make(3.0, 0.15, 8));
    const Vec4 w(1.3, -0.4, 2.0, 1.1);
    double prev = -1;
    for (double n : {1.0, 4.0, 16.0, 64.0}) {
        const Jet4 j = c.psi_n(w, n);
        CHECK(j.value >= prev - 1e-12);
        prev = j.value;
    }
    CHECK(prev == doctest::Approx(1.0));
    CHECK(c.psi_n(w, 64.0).grad.norm() < 1e-12);
}

TEST_CASE("admissibility and the |omega| >= 1 assumption") {
    const Cutoff c(CutoffParams::make(3.0, 0.15, 6));
    const auto rep = check_admissible(c, {1.0, 10.0, 100.0}, 6);
    CHECK(rep.passed);
    CHECK(rep.omega_geq_one);
    // large p: the annulus reaches inside the unit ball at n = 1
    const Cutoff c30(CutoffParams::make(30.0, 0.05, 4));
    const auto rep30 = check_admissible(c30, {1.0}, 2);
    CHECK_FALSE(rep30.omega_geq_one);
    CHECK(to_json(rep).contains("grad_growth_exponent"));
}

TEST_CASE("comparability band shrinks with kappa and is invariant in n") {
    double prev_width = 1e300;
    for (double k : {0.2, 0.1, 0.05}) {
        const auto cp = CutoffParams::make(3.0, k);
        const auto r1 = check_comparability(cp, 1.0, 400);
        const auto r100 = check_comparability(cp, 100.0, 400);
        CHECK(r1.passed);
        CHECK(r1.ratio_min <= 1.0);
        CHECK(r1.ratio_max >= 1.0);
        CHECK(r100.ratio_max == doctest::Approx(r1.ratio_max).epsilon(1e-9));
        const double width = r1.ratio_max / r1.ratio_min;
        CHECK(width < prev_width);
        prev_width = width;
    }
}

TEST_CASE("region csv") {
    std::ostringstream os;
    write_region_csv(os, CutoffParams::make(3.0, 0.15), 10, 10);
    const auto s = os.str();
    CHECK(s.rfind("s,t,label\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 101);
    CHECK(s.find(",T\n") != std::string::npos);
}
