#pragma once

#include <optional>
#include <random>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pelllab/bellman.hpp"

namespace pelllab {

enum class RegionLabel { I, R_zeta, R_eta, T, O };

std::string to_string(RegionLabel r);

// Smooth nonincreasing profile: 1 on [0,3], 0 on [4,∞).
// On (3,4) it is e(4−x)/(e(4−x)+e(x−3)) with e(t) = exp(−1/t).
double profile(double x);

struct CutoffParams {
    double p = 3.0;
    double q = 1.5;
    double kappa = 0.05;
    int quad_order = 8;

    // κ defaults to min(0.05, δ(p,q)/2).
    static CutoffParams make(double p, std::optional<double> kappa = std::nullopt,
                             int quad_order = 8);
    void validate() const;
};

// Largest κ for which the lower bounds t ≥ (3^{1/p} − 2κ)^{p−1} − κ and
// s ≥ (3^{1/q} − 2κ)^{q−1} − κ on the moduli over T_κ stay positive.
double kappa_threshold(double p);

double psi_base(cplx zeta, cplx eta, double p);

// Distance in R²₊ from (s,t) to the curve {s^p = t^q} = {(x, x^{p−1})}.
double distance_to_curve(double s, double t, double p);

RegionLabel classify_moduli(double s, double t, const CutoffParams& cp);
inline RegionLabel classify_region(cplx zeta, cplx eta, const CutoffParams& cp) {
    return classify_moduli(std::abs(zeta), std::abs(eta), cp);
}

// D_n(ζ,η) = (ζ/n^{1/p}, η/n^{1/q}); throws std::invalid_argument for n < 1.
std::pair<cplx, cplx> dilate(cplx zeta, cplx eta, double n, double p);

class Cutoff {
public:
    explicit Cutoff(CutoffParams cp);

    const CutoffParams& params() const { return cp_; }
    const Mollifier& mollifier() const { return m_; }

    // Ψ_κ = Ψ∗φ_κ by quadrature. With shortcut set, points of I_κ and O_κ return the exact
    // constant jet instead of running the quadrature.
    Jet4 psi_kappa(const Vec4& w, bool shortcut = true) const;
    // Ψ_n = Ψ_κ ∘ D_n with the chain rule applied to the jet.
    Jet4 psi_n(const Vec4& w, double n, bool shortcut = true) const;

private:
    CutoffParams cp_;
    Mollifier m_;
};

struct AdmissibleReport {
    int n_samples = 0;
    double max_value_excess = 0.0;   // max(Ψ_n − 1, −Ψ_n, 0)
    double max_even_defect = 0.0;
    int nesting_violations = 0;
    double max_inner_defect = 0.0;   // |Ψ_n − 1| on K_{1,n}
    double max_outer_value = 0.0;    // |Ψ_n| off K_{2,n}
    // sup |DΨ_n|·max(1,|ω|) on the annulus, per entry of n_list, and the fitted growth exponent
    // in n. Uniform boundedness would give exponent 0.
    std::vector<double> grad_times_modulus;
    double grad_growth_exponent = 0.0;
    bool omega_geq_one = true;       // |ω| ≥ 1 on K_{2,1}∖K_{1,1}
    double min_annulus_modulus = 0.0;
    bool passed = false;  // items a)–h); the gradient decay item is reported, not asserted
};

nlohmann::json to_json(const AdmissibleReport& r);

AdmissibleReport check_admissible(const Cutoff& c, const std::vector<double>& n_list,
                                  int n_samples, unsigned seed = 5);

struct ComparabilityReport {
    double n = 1.0;
    int n_samples = 0;
    double ratio_min = 0.0;  // of |ζ/n^{1/p}|^p / |η/n^{1/q}|^q over D_n^{-1}(T)
    double ratio_max = 0.0;
    double envelope_C = 0.0; // smallest C with ratio ∈ [(1+Cκ)^{−p}, (1+Cκ)^p]
    double min_modulus = 0.0;
    bool passed = false;
};

nlohmann::json to_json(const ComparabilityReport& r);

// Samples T by jittering points of the curve within κ; throws std::runtime_error if none land in T.
ComparabilityReport check_comparability(const CutoffParams& cp, double n, int n_samples,
                                        unsigned seed = 6);

// Sample point whose dilation D_n lands in the given region (s,t moduli, random phases).
Vec4 sample_in_region(RegionLabel r, const CutoffParams& cp, double n, std::mt19937_64& rng);

struct CutoffAudit {
    double max_vanishing_defect = 0.0;  // worst |derivative| where the pattern demands 0
    double max_constant_defect = 0.0;   // |Ψ_κ − 1| on I, |Ψ_κ| on O
    // Empirical constants sup n^{1/p}|∂_ζΨ_n|, n^{1/q}|∂_ηΨ_n|, n^{2/p}|D²_ζζ|, n^{2/q}|D²_ηη|,
    // n^{1/p+1/q}|D²_ζη| per n.
    std::vector<double> n_list;
    std::vector<std::vector<double>> constants;
    bool passed = false;
};

nlohmann::json to_json(const CutoffAudit& a);

CutoffAudit audit_cutoff(const Cutoff& c, const std::vector<double>& n_list, int n_per_region,
                         double tol = 1e-6, unsigned seed = 7);

// CSV "s,t,label" over [0,smax]×[0,tmax].
void write_region_csv(std::ostream& os, const CutoffParams& cp, int n_s = 200, int n_t = 200);

}  // namespace pelllab
