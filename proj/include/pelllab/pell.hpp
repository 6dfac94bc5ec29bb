#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pelllab/field.hpp"

namespace pelllab {

enum class ClassName { A_p, W_p, S_p, B_p, WP_p, SP_p, BP_p };

std::string to_string(ClassName c);
ClassName class_from_string(const std::string& s);

inline double conjugate_exponent(double p) { return p / (p - 1.0); }

// J_p(ξ) = ξ + (p−2) Re ξ. Throws for p ≤ 1.
CVec jp_apply(const CVec& xi, double p);

// Real form M(A) = [[Re A, −Im A], [Im A, Re A]].
RMat real_form(const CMat& A);
RVec realify(const CVec& v);
CVec complexify(const RVec& x);

// min_{|ξ|=1} Re⟨Aξ, ξ + |1−2/p| ξ̄⟩ by the real-form eigenvalue reduction.
double delta_p(const CMat& A, double p);
// Minimum over cells.
double delta_p(const CoefficientTuple& t, double p);

// Multistart projected gradient on the unit sphere of C^d plus quasi-random sampling.
// Returns an upper bound on delta_p(A, p) that converges to it; used as a cross-check.
double delta_p_search(const CMat& A, double p, int n_samples = 100000, int n_starts = 16,
                      unsigned seed = 7);

double gamma_p(const Cell& cell, const CVec& xi, double p);

// Largest μ with Γ_p(ξ) ≥ μ(|ξ|² + V) for all ξ, at one cell.
// Throws std::domain_error for V < 0. Returns −∞ when V = 0 and the linear part is nonzero.
double mu_p(const Cell& cell, double p);
double mu_p(const CoefficientTuple& t, double p);

// Infimum over t ∈ ℝ of Γ_p(tξ)/(t²|ξ|²+V) along the line through a unit ξ (V > 0),
// or the V = 0 limit.
double mu_p_ray(const Cell& cell, const CVec& unit_xi, double p);

// Smallest M with |b̄ − c| ≤ M√V at every cell; +∞ if impossible.
double sector_M(const CoefficientTuple& t);

struct ClassReport {
    ClassName class_name = ClassName::A_p;
    double p = 2.0;
    bool member = false;
    std::optional<double> delta_p;
    std::optional<double> mu_p;
    std::optional<double> mu_q;
    std::optional<double> gamma_min;  // W_p: min of Γ_p/(|ξ|²+V) allowed to reach 0
    std::optional<double> M;
    std::optional<SubcriticalityCert> cert;
    std::vector<SubcriticalityCert> passing;  // every passing (α,σ) pair on the search grid
    std::string note;
};

nlohmann::json to_json(const ClassReport& r);

constexpr double kMembershipMargin = 1e-7;

// class_name ∈ {A_p, W_p, S_p, B_p}.
ClassReport check_class(const CoefficientTuple& t, double p, ClassName class_name,
                        double margin = kMembershipMargin);

struct SubcriticalReport {
    bool not_refuted = true;
    double worst_ratio = 0.0;  // max over probes of (∫V₋|v|² − σ∫V₊|v|²)/∫|∇v|²
    std::string worst_probe;
    CVec violating_probe;
};

// Falsifier for ∫V₋|v|² ≤ α∫|∇v|² + σ∫V₊|v|² on the grid.
SubcriticalReport check_subcritical(const std::vector<double>& V, const SubcriticalityCert& cert,
                                    const GridDomain& domain, int n_probes, unsigned seed = 11);

// C_{p,α,σ}(𝒜) = (A − α(pq/4)I, b, c, (1−σ)V₊).
CoefficientTuple perturb(const CoefficientTuple& t, double p, const SubcriticalityCert& cert);

struct SearchGrid {
    std::vector<double> alphas;
    std::vector<double> sigmas;
    static SearchGrid standard(int n_log = 25);
};

// class_name ∈ {WP_p, SP_p, BP_p}; V must live on `domain`.
ClassReport check_perturbed_class(const CoefficientTuple& t, double p, const GridDomain& domain,
                                  const SearchGrid& grid, ClassName class_name = ClassName::BP_p,
                                  int n_probes = 32, double margin = kMembershipMargin);

// Base class tested after perturbation: WP_p → W_p, SP_p → S_p, BP_p → B_p.
ClassName base_class(ClassName perturbed);

CoefficientTuple rotate(const CoefficientTuple& t, double phi);
CoefficientTuple adjoint(const CoefficientTuple& t);

}  // namespace pelllab
