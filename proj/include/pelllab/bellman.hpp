#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pelllab/field.hpp"

namespace pelllab {

// Real coordinates of ω = (ζ, η) ∈ C² are (ζ₁, ζ₂, η₁, η₂).
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

struct Jet4 {
    double value = 0.0;
    Vec4 grad = Vec4::Zero();
    Mat4 hess = Mat4::Zero();
};

inline Vec4 to_real4(cplx z, cplx e) { return {z.real(), z.imag(), e.real(), e.imag()}; }
inline std::pair<cplx, cplx> from_real4(const Vec4& w) { return {{w(0), w(1)}, {w(2), w(3)}}; }

class SingularSet : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BellmanParams {
    double p = 2.0;
    double q = 2.0;
    double delta = 0.1;

    // Throws std::invalid_argument unless p > 1 and delta ∈ (0,1).
    static BellmanParams make(double p, double delta);
    void validate() const;
    // p < 2 is evaluated through Q_p(ζ,η) = Q_q(η,ζ).
    bool swapped() const { return p < 2.0; }
};

double q_value(cplx zeta, cplx eta, const BellmanParams& bp);
// Wirtinger derivatives (∂_ζQ, ∂_ηQ) with ∂_ζ = (∂_{ζ₁} − i∂_{ζ₂})/2.
std::pair<cplx, cplx> q_grad(cplx zeta, cplx eta, const BellmanParams& bp);
Vec4 q_grad_real(cplx zeta, cplx eta, const BellmanParams& bp);

// Distance to Υ = {η = 0} ∪ {|ζ|^p = |η|^q} in the metric min(||ζ|^p − |η|^q|, |η|).
double singular_distance(cplx zeta, cplx eta, const BellmanParams& bp);
// Throws SingularSet within eps of Υ.
Mat4 q_hess(cplx zeta, cplx eta, const BellmanParams& bp, double eps = 1e-9);
// Branch formula without the Υ check; used inside quadrature where Υ has measure zero.
Mat4 q_hess_unchecked(cplx zeta, cplx eta, const BellmanParams& bp);
Jet4 q_jet(cplx zeta, cplx eta, const BellmanParams& bp, double eps = 1e-9);

struct MollifierParams {
    double nu = 0.1;
    int quad_order = 12;
    void validate() const;
};

// Convolution with φ_ν on R⁴ by tensor Gauss–Legendre quadrature.
// φ is a product of even polynomial bumps c(1 − (2s)²)^6 on |s| < 1/2, so its support
// (a cube of half-width ν/2) lies in the closed ball of radius ν and every moment the
// rule needs is integrated exactly.
class Mollifier {
public:
    explicit Mollifier(MollifierParams mp);
    Mollifier(double nu, int order) : Mollifier(MollifierParams{nu, order}) {}

    const MollifierParams& params() const { return mp_; }
    double nu() const { return mp_.nu; }
    std::size_t n_nodes() const { return y_.size(); }

    // Value, gradient and Hessian of f∗φ_ν at w; derivatives fall on the kernel.
    template <class F>
    Jet4 apply(F&& f, const Vec4& w) const {
        Jet4 out;
        for (std::size_t k = 0; k < y_.size(); ++k) {
            const double v = f(Vec4(w - y_[k]));
            out.value += v * w0_[k];
            out.grad += v * w1_[k];
            out.hess += v * w2_[k];
        }
        return out;
    }

    template <class F>
    double convolve(F&& f, const Vec4& w) const {
        double s = 0.0;
        for (std::size_t k = 0; k < y_.size(); ++k) s += f(Vec4(w - y_[k])) * w0_[k];
        return s;
    }

    // Kernel value φ_ν(y) (density, zero off the support).
    double kernel(const Vec4& y) const;

private:
    MollifierParams mp_;
    double norm1_ = 1.0;  // ∫(1 − (s/h)²)^m ds over |s| < h, in units of ν
    std::vector<Vec4> y_;
    std::vector<double> w0_;
    std::vector<Vec4> w1_;
    std::vector<Mat4> w2_;
};

// Gauss–Legendre nodes and weights on [−1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order);

// Jet of Q∗φ_ν.
Jet4 q_mollified(const Vec4& w, const BellmanParams& bp, const Mollifier& m);

// Runs f at orders `order` and `escalated`; throws QuadratureError if the values differ by more
// than tol (relative to max(1,|value|)). Returns the escalated result.
template <class F>
Jet4 mollify_checked(F&& f, const Vec4& w, double nu, double tol, int order = 12,
                     int escalated = 20) {
    const Jet4 a = Mollifier(nu, order).apply(f, w);
    const Jet4 b = Mollifier(nu, escalated).apply(f, w);
    if (std::abs(a.value - b.value) > tol * std::max(1.0, std::abs(b.value)))
        throw QuadratureError("mollify: quadrature did not converge at order " +
                              std::to_string(escalated));
    return b;
}

struct BoundReport {
    std::string bound_id;
    double empirical_constant = 0.0;
    double constant_half = 0.0;  // same statistic on the first half of the samples
    int n_samples = 0;
    Vec4 max_witness_point = Vec4::Zero();
    bool passed = false;
};

nlohmann::json to_json(const BoundReport& r);

// Empirical constants sup(quantity / bound shape) for the size estimates of Q∗φ_ν.
// A bound passes when its constant is finite and grows by at most 25% when the sample
// count is doubled.
std::vector<BoundReport> verify_second_order_bounds(const BellmanParams& bp, const Mollifier& m,
                                                    int n_samples, unsigned seed = 3);

}  // namespace pelllab
