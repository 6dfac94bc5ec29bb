#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace pelllab {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

struct Ellipticity {
    double lambda = 0.0;  // min eigenvalue of (A + A*)/2
    double Lambda = 0.0;  // largest singular value
    bool elliptic() const { return lambda > 0.0; }
};

// Throws std::invalid_argument for non-square or non-finite input.
Ellipticity ellipticity_constants(const CMat& A);

// A matrix together with its cached ellipticity constants.
class ComplexMatrix {
public:
    explicit ComplexMatrix(CMat A);
    const CMat& matrix() const { return A_; }
    double lambda() const { return e_.lambda; }
    double Lambda() const { return e_.Lambda; }
    Eigen::Index dim() const { return A_.rows(); }

private:
    CMat A_;
    Ellipticity e_;
};

enum class Boundary { Dirichlet, Neumann };

std::string to_string(Boundary bc);
Boundary boundary_from_string(const std::string& s);

struct GridDomain {
    int dim = 1;
    std::vector<std::pair<double, double>> extents;
    std::vector<int> n_cells;
    Boundary bc = Boundary::Dirichlet;

    // Throws std::invalid_argument unless dim ∈ {1,2}, n_cells ≥ 2, extents positive.
    void validate() const;
    std::size_t cell_count() const;
    double h(int axis) const;
    double length(int axis) const { return extents[axis].second - extents[axis].first; }
    // Cell centre coordinates; cells are numbered x-fastest.
    std::vector<double> cell_center(std::size_t cell) const;

    static GridDomain interval(double a, double b, int n, Boundary bc);
};

// Coefficients at a single cell.
struct Cell {
    CMat A;
    CVec b;
    CVec c;
    double V = 0.0;

    double V_plus() const { return V > 0.0 ? V : 0.0; }
    double V_minus() const { return V < 0.0 ? -V : 0.0; }
};

// The tuple (A, b, c, V) as cellwise-constant fields. A single stored cell is broadcast.
class CoefficientTuple {
public:
    CoefficientTuple() = default;
    CoefficientTuple(std::vector<Cell> cells, std::size_t n_cells);

    static CoefficientTuple constant(const CMat& A, const CVec& b, const CVec& c, double V,
                                     std::size_t n_cells = 1);
    // (A, 0, 0, V)
    static CoefficientTuple constant(const CMat& A, double V = 0.0, std::size_t n_cells = 1);

    int d() const { return d_; }
    std::size_t n_cells() const { return n_; }
    bool is_constant() const { return cells_.size() == 1; }
    const std::vector<Cell>& stored() const { return cells_; }

    // Throws std::out_of_range for x ≥ n_cells().
    const Cell& at(std::size_t x) const;
    double V_plus(std::size_t x) const { return at(x).V_plus(); }
    double V_minus(std::size_t x) const { return at(x).V_minus(); }

    std::vector<double> potential() const;
    bool has_negative_potential() const;
    // Smallest λ(A) over cells.
    double lambda() const;
    double Lambda() const;

    // Same coefficients with every stored cell transformed.
    template <class F>
    CoefficientTuple map(F&& f) const {
        std::vector<Cell> out;
        out.reserve(cells_.size());
        for (const auto& c : cells_) out.push_back(f(c));
        return CoefficientTuple(std::move(out), n_);
    }

    // Expand a broadcast tuple to one stored cell per grid cell.
    CoefficientTuple expanded() const;

private:
    int d_ = 0;
    std::size_t n_ = 0;
    std::vector<Cell> cells_;
};

struct SubcriticalityCert {
    double alpha = 0.0;
    double sigma = 0.0;
    // Throws std::invalid_argument if alpha < 0 or sigma ∉ [0,1).
    void validate() const;
};

struct Problem {
    GridDomain domain;
    CoefficientTuple tuple;
};

// {"dim","extents","n_cells","bc","A","b","c","V"}; complex numbers as [re, im].
Problem problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const Problem& pr);

cplx complex_from_json(const nlohmann::json& j);
nlohmann::json complex_to_json(cplx z);

}  // namespace pelllab
