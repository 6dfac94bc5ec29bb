#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <json.hpp>

#include "pelllab/field.hpp"
#include "pelllab/mesh.hpp"
#include "pelllab/pell.hpp"

namespace pelllab {

using SpMat = Eigen::SparseMatrix<cplx>;
using RSpMat = Eigen::SparseMatrix<double>;

// Form matrix K with 𝔞(u,v) = v* K u for nodal vectors. P1 elements, lumped mass and vertex
// averaging for the zeroth-order parts, Dirichlet nodes eliminated.
struct DiscreteForm {
    std::shared_ptr<const Mesh> mesh;
    SpMat stiffness;         // sum of the four terms below
    SpMat term_A, term_b, term_c, term_V;
    RSpMat dirichlet_energy; // ∫|∇u|² = u* D u
    RVec mass;
    std::vector<double> V;   // per grid cell
    Boundary bc = Boundary::Dirichlet;
    double h = 0.0;          // largest spacing

    int n_dofs() const { return static_cast<int>(mass.size()); }
};

// Throws std::invalid_argument if λ(A) ≤ 0 at a cell or the tuple does not fit the domain.
DiscreteForm assemble(const CoefficientTuple& t, const GridDomain& domain);

enum class Scheme { BackwardEuler, CrankNicolson };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct SemigroupState {
    double t = 0.0;
    CVec u;
    Scheme scheme = Scheme::BackwardEuler;
    double dt = 0.0;
};

struct EvolveOptions {
    Scheme scheme = Scheme::BackwardEuler;
    double dt_max = 1e-2;
    double theta = 0.0;      // z = t·e^{iθ}
    // Crank–Nicolson is refused when dt·ρ(M⁻¹K) exceeds this; its stiff modes would ring.
    double cn_guard = 200.0;
};

// Exact stepping matrix for one (scheme, dt, θ) with a reused sparse LU factorization.
class Propagator {
public:
    Propagator(const DiscreteForm& form, Scheme scheme, double dt, double theta = 0.0);
    CVec step(const CVec& u) const;
    double dt() const { return dt_; }

private:
    SpMat rhs_;
    Eigen::SparseLU<SpMat> lu_;
    double dt_;
};

// ρ(M⁻¹K) bounded by the largest weighted row sum.
double stiffness_radius(const DiscreteForm& form);

// States at every time in t_grid (nondecreasing, ≥ 0); intervals are split into equal steps ≤ dt_max.
// Throws std::domain_error for the Crank–Nicolson guard and std::runtime_error if factorization fails.
std::vector<SemigroupState> evolve(const DiscreteForm& form, const CVec& f,
                                   const std::vector<double>& t_grid, const EvolveOptions& opt = {});

// (Σ m_k |u_k|^p)^{1/p} with the lumped mass; p = ∞ gives max |u_k|.
double lp_norm(const CVec& u, double p, const DiscreteForm& form);
double lp_norm(const CVec& u, double p, const GridDomain& domain);

// ∫|∇u|² with constant element gradients.
double gradient_norm2(const CVec& u, const DiscreteForm& form);

struct ProbeSpec {
    std::string type = "eigenmode";  // "eigenmode" | "bump" | "random"
    int mode = 1;                    // eigenmode index per axis
    double center = 0.5, width = 0.25;  // bump, relative to the extents
    unsigned seed = 1;               // random
    double phase = 0.0;              // multiplies the probe by e^{i·phase·x/L}

    static ProbeSpec from_json(const nlohmann::json& j);
};

nlohmann::json to_json(const ProbeSpec& p);

CVec make_probe(const ProbeSpec& spec, const DiscreteForm& form);
std::vector<ProbeSpec> standard_probes(int n_random = 4, unsigned seed = 1);

// Re Σ conj(|u|^{p−2}u)_k (e^{iθ}Ku)_k / Σ m_k|u_k|^p. Negative values mean ‖u‖_p grows at t = 0.
double dissipativity_margin(const CVec& u, double p, const DiscreteForm& form, double theta = 0.0);

struct GrowthSearch {
    double min_margin = 0.0;
    double best_beta = 0.0, best_scale = 0.0;
    double growth_ratio = 1.0;  // ‖T_τ f‖_p/‖f‖_p for the worst probe after a short evolution
    bool growth_detected = false;
};

nlohmann::json to_json(const GrowthSearch& g);

// Scans bump·exp(R e^{iβ}ψ(x)) probes with periodic ψ for a negative margin, then confirms growth
// by evolving.
GrowthSearch search_lp_growth(const DiscreteForm& form, double p, double theta = 0.0,
                              int n_beta = 48);

struct ContractivityReport {
    double p = 2.0;
    double theta = 0.0;
    bool class_passed = false;
    std::string class_note;
    int n_probes = 0;
    double max_ratio = 0.0;  // max over probes and times of ‖T_z f‖_p/‖f‖_p
    double eps_h = 1e-3;
    bool contractive = false;
    GrowthSearch growth;     // filled when the class test fails
    std::string status;      // "pass", "fail", "not_refuted"
};

nlohmann::json to_json(const ContractivityReport& r);

ContractivityReport check_contractivity(const CoefficientTuple& t, double p,
                                        const GridDomain& domain, double theta,
                                        const std::vector<CVec>& probes,
                                        const std::vector<double>& t_grid, double eps_h = 1e-3,
                                        double dt_max = 1e-2, bool run_class_check = true);

struct FlowReport {
    std::vector<double> times;
    std::map<std::string, std::vector<double>> lp_norms;  // "u:p" and "v:q"
    std::vector<double> flow_E;
    double max_increase = 0.0;  // max_k E(t_{k+1}) − E(t_k)
    double tol_flow = 0.0;
    double hessian_rel_error = 0.0;  // first-step discrete E′ against −∫𝐇_Q
    double bilinear_value = 0.0;     // not computed here
    bool class_passed = false;
    bool monotone = false;
    bool passed = false;
};

nlohmann::json to_json(const FlowReport& r);

struct FlowOptions {
    double delta = 0.25;
    double dt_max = 1e-3;
    double c_flow = 1.0;  // tol_flow = c_flow·(h² + dt)·max(|E(0)|, 1e-12)
    bool check_class = true;
};

FlowReport flow_monotonicity(const CoefficientTuple& a, const CoefficientTuple& b, double p,
                             const CVec& f, const CVec& g, const GridDomain& domain,
                             const std::vector<double>& t_grid, const FlowOptions& opt = {});

struct BilinearResult {
    double value = 0.0;
    double tail_estimate = 0.0;
    double T_max = 0.0;
    int n_nodes = 0;
};

nlohmann::json to_json(const BilinearResult& r);

// ∫₀^{T_max}∫ √(|∇T_t f|² + |V||T_t f|²)·√(|∇T_t g|² + |W||T_t g|²), trapezoid in s = √t.
// Throws std::runtime_error when the estimated tail exceeds tail_tol·value.
BilinearResult bilinear_functional(const CoefficientTuple& a, const CoefficientTuple& b,
                                   const CVec& f, const CVec& g, const GridDomain& domain,
                                   double T_max, int n_nodes = 200, double dt_max = 1e-2,
                                   double tail_tol = 1e-2);

struct GradientEstimateReport {
    double p = 2.0;
    double weighted_energy = 0.0;  // ∫𝟙_{u≠0}|u|^{p−2}(|∇u|² + V₊|u|²)
    double lhs = 0.0;              // ∫V₋|u|^p
    double rhs = 0.0;              // α∫(q/4)H^I_{F_p}[u;∇u] + σ∫V₊|u|^p
    bool inequality_holds = false;
};

nlohmann::json to_json(const GradientEstimateReport& r);

GradientEstimateReport lp_gradient_estimate(const DiscreteForm& form, double p, const CVec& u,
                                            const SubcriticalityCert& cert);

// V_n = V₊ − min(V₋, n) cellwise.
CoefficientTuple truncate_potential(const CoefficientTuple& t, double n);

struct TruncationReport {
    std::vector<double> n_list;
    std::vector<double> grad_errors;
    std::vector<double> potential_errors;
    std::vector<double> lower_bound_constants;  // C̃ per n; empty unless requested
    double max_V_minus = 0.0;
    bool monotone = false;
    bool zero_after_saturation = false;
    bool passed = false;
};

nlohmann::json to_json(const TruncationReport& r);

TruncationReport check_truncation_convergence(const CoefficientTuple& t, const GridDomain& domain,
                                              const CVec& f, double z,
                                              const std::vector<double>& n_list,
                                              double dt_max = 1e-2, bool lower_bounds = false);

// Cell averages of c·|x − x0|^{−s} by midpoint subdivision (x0 placed on a grid vertex).
std::vector<double> singular_profile(const GridDomain& domain, double c, double s,
                                     std::array<double, 2> x0, int sub = 32);

}  // namespace pelllab
