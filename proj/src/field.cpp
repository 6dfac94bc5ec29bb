#include "pelllab/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace pelllab {

Ellipticity ellipticity_constants(const CMat& A) {
    if (A.rows() != A.cols() || A.rows() == 0)
        throw std::invalid_argument("ellipticity_constants: matrix must be square and nonempty");
    if (!A.allFinite()) throw std::invalid_argument("ellipticity_constants: non-finite entry");
    const CMat H = (A + A.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMat> es(H, Eigen::EigenvaluesOnly);
    Eigen::JacobiSVD<CMat> svd(A);
    return {es.eigenvalues()(0), svd.singularValues()(0)};
}

ComplexMatrix::ComplexMatrix(CMat A) : A_(std::move(A)), e_(ellipticity_constants(A_)) {}

std::string to_string(Boundary bc) { return bc == Boundary::Dirichlet ? "dirichlet" : "neumann"; }

Boundary boundary_from_string(const std::string& s) {
    std::string t = s;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (t == "dirichlet") return Boundary::Dirichlet;
    if (t == "neumann") return Boundary::Neumann;
    throw std::invalid_argument("unknown boundary condition '" + s + "'");
}

void GridDomain::validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("GridDomain: dim must be 1 or 2");
    if (static_cast<int>(extents.size()) != dim || static_cast<int>(n_cells.size()) != dim)
        throw std::invalid_argument("GridDomain: extents/n_cells must have dim entries");
    for (int a = 0; a < dim; ++a) {
        if (n_cells[a] < 2) throw std::invalid_argument("GridDomain: n_cells must be >= 2");
        if (!(extents[a].second > extents[a].first))
            throw std::invalid_argument("GridDomain: extents must be positive intervals");
    }
}

std::size_t GridDomain::cell_count() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(n_cells[a]);
    return n;
}

double GridDomain::h(int axis) const { return length(axis) / n_cells[axis]; }

std::vector<double> GridDomain::cell_center(std::size_t cell) const {
    std::vector<double> x(dim);
    std::size_t rest = cell;
    for (int a = 0; a < dim; ++a) {
        const std::size_t i = rest % n_cells[a];
        rest /= n_cells[a];
        x[a] = extents[a].first + (static_cast<double>(i) + 0.5) * h(a);
    }
    return x;
}

GridDomain GridDomain::interval(double a, double b, int n, Boundary bc) {
    GridDomain g;
    g.dim = 1;
    g.extents = {{a, b}};
    g.n_cells = {n};
    g.bc = bc;
    g.validate();
    return g;
}

CoefficientTuple::CoefficientTuple(std::vector<Cell> cells, std::size_t n_cells)
    : n_(n_cells), cells_(std::move(cells)) {
    if (cells_.empty()) throw std::invalid_argument("CoefficientTuple: no cells");
    if (cells_.size() != 1 && cells_.size() != n_)
        throw std::invalid_argument("CoefficientTuple: need one cell or one per grid cell");
    d_ = static_cast<int>(cells_.front().A.rows());
    for (const auto& c : cells_) {
        if (c.A.rows() != d_ || c.A.cols() != d_ || c.b.size() != d_ || c.c.size() != d_)
            throw std::invalid_argument("CoefficientTuple: inconsistent dimensions");
        if (!c.A.allFinite() || !c.b.allFinite() || !c.c.allFinite() || !std::isfinite(c.V))
            throw std::invalid_argument("CoefficientTuple: non-finite coefficient");
    }
}

CoefficientTuple CoefficientTuple::constant(const CMat& A, const CVec& b, const CVec& c, double V,
                                            std::size_t n_cells) {
    return CoefficientTuple({Cell{A, b, c, V}}, n_cells);
}

CoefficientTuple CoefficientTuple::constant(const CMat& A, double V, std::size_t n_cells) {
    const auto d = A.rows();
    return constant(A, CVec::Zero(d), CVec::Zero(d), V, n_cells);
}

const Cell& CoefficientTuple::at(std::size_t x) const {
    if (x >= n_) throw std::out_of_range("CoefficientTuple: cell index out of range");
    return cells_.size() == 1 ? cells_.front() : cells_[x];
}

std::vector<double> CoefficientTuple::potential() const {
    std::vector<double> v(n_);
    for (std::size_t i = 0; i < n_; ++i) v[i] = at(i).V;
    return v;
}

bool CoefficientTuple::has_negative_potential() const {
    return std::any_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.V < 0.0; });
}

double CoefficientTuple::lambda() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : cells_) m = std::min(m, ellipticity_constants(c.A).lambda);
    return m;
}

double CoefficientTuple::Lambda() const {
    double m = 0.0;
    for (const auto& c : cells_) m = std::max(m, ellipticity_constants(c.A).Lambda);
    return m;
}

CoefficientTuple CoefficientTuple::expanded() const {
    if (!is_constant()) return *this;
    return CoefficientTuple(std::vector<Cell>(n_, cells_.front()), n_);
}

void SubcriticalityCert::validate() const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("SubcriticalityCert: alpha must be >= 0");
    if (!(sigma >= 0.0 && sigma < 1.0))
        throw std::invalid_argument("SubcriticalityCert: sigma must lie in [0,1)");
}

// ---- JSON ----

cplx complex_from_json(const nlohmann::json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw std::invalid_argument("expected a real number or an [re, im] pair");
}

nlohmann::json complex_to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

namespace {

bool try_vector(const nlohmann::json& j, int d, CVec& out) {
    if (j.is_number()) {
        out = CVec::Constant(d, j.get<double>());
        return true;
    }
    if (!j.is_array() || static_cast<int>(j.size()) != d) return false;
    CVec v(d);
    for (int i = 0; i < d; ++i) {
        try {
            v(i) = complex_from_json(j[i]);
        } catch (const std::invalid_argument&) {
            return false;
        }
    }
    out = v;
    return true;
}

bool try_matrix(const nlohmann::json& j, int d, CMat& out) {
    if (j.is_number()) {
        out = CMat::Identity(d, d) * j.get<double>();
        return true;
    }
    if (!j.is_array() || static_cast<int>(j.size()) != d) return false;
    CMat m(d, d);
    for (int r = 0; r < d; ++r) {
        CVec row;
        if (!j[r].is_array() || !try_vector(j[r], d, row)) return false;
        m.row(r) = row.transpose();
    }
    out = m;
    return true;
}

template <class T, class Try>
std::vector<T> field_from_json(const nlohmann::json& j, int d, std::size_t n, const char* name,
                               Try&& attempt) {
    T one;
    if (attempt(j, d, one)) return {one};
    if (j.is_array() && j.size() == n) {
        std::vector<T> out(n);
        for (std::size_t i = 0; i < n; ++i)
            if (!attempt(j[i], d, out[i]))
                throw std::invalid_argument(std::string("field '") + name + "': bad entry at cell " +
                                            std::to_string(i));
        return out;
    }
    throw std::invalid_argument(std::string("field '") + name +
                                "': expected a constant or one value per cell");
}

nlohmann::json vector_json(const CVec& v) {
    auto a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_to_json(v(i)));
    return a;
}

nlohmann::json matrix_json(const CMat& m) {
    auto a = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
    return a;
}

}  // namespace

Problem problem_from_json(const nlohmann::json& j) {
    Problem pr;
    auto& g = pr.domain;
    g.dim = j.at("dim").get<int>();
    const auto& ext = j.at("extents");
    if (g.dim == 1 && ext.is_array() && ext.size() == 2 && ext[0].is_number()) {
        g.extents = {{ext[0].get<double>(), ext[1].get<double>()}};
    } else {
        for (const auto& e : ext) g.extents.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    }
    const auto& nc = j.at("n_cells");
    if (nc.is_number()) {
        g.n_cells.assign(g.dim, nc.get<int>());
    } else {
        for (const auto& n : nc) g.n_cells.push_back(n.get<int>());
    }
    g.bc = boundary_from_string(j.value("bc", std::string("dirichlet")));
    g.validate();

    const int d = g.dim;
    const std::size_t n = g.cell_count();
    const auto As = field_from_json<CMat>(j.value("A", nlohmann::json(1.0)), d, n, "A", try_matrix);
    const auto bs = field_from_json<CVec>(j.value("b", nlohmann::json(0.0)), d, n, "b", try_vector);
    const auto cs = field_from_json<CVec>(j.value("c", nlohmann::json(0.0)), d, n, "c", try_vector);
    const auto Vs = field_from_json<double>(
        j.value("V", nlohmann::json(0.0)), d, n, "V", [](const nlohmann::json& x, int, double& out) {
            if (!x.is_number()) return false;
            out = x.get<double>();
            return true;
        });

    const bool all_const = As.size() == 1 && bs.size() == 1 && cs.size() == 1 && Vs.size() == 1;
    const std::size_t m = all_const ? 1 : n;
    std::vector<Cell> cells(m);
    for (std::size_t i = 0; i < m; ++i) {
        cells[i].A = As[As.size() == 1 ? 0 : i];
        cells[i].b = bs[bs.size() == 1 ? 0 : i];
        cells[i].c = cs[cs.size() == 1 ? 0 : i];
        cells[i].V = Vs[Vs.size() == 1 ? 0 : i];
    }
    pr.tuple = CoefficientTuple(std::move(cells), n);
    return pr;
}

nlohmann::json problem_to_json(const Problem& pr) {
    nlohmann::json j;
    const auto& g = pr.domain;
    j["dim"] = g.dim;
    auto ext = nlohmann::json::array();
    for (const auto& e : g.extents) ext.push_back({e.first, e.second});
    j["extents"] = ext;
    j["n_cells"] = g.n_cells;
    j["bc"] = to_string(g.bc);
    const auto& t = pr.tuple;
    if (t.is_constant()) {
        const auto& c = t.stored().front();
        j["A"] = matrix_json(c.A);
        j["b"] = vector_json(c.b);
        j["c"] = vector_json(c.c);
        j["V"] = c.V;
    } else {
        auto A = nlohmann::json::array(), b = A, c = A, V = A;
        for (const auto& cell : t.stored()) {
            A.push_back(matrix_json(cell.A));
            b.push_back(vector_json(cell.b));
            c.push_back(vector_json(cell.c));
            V.push_back(cell.V);
        }
        j["A"] = A;
        j["b"] = b;
        j["c"] = c;
        j["V"] = V;
    }
    return j;
}

}  // namespace pelllab
