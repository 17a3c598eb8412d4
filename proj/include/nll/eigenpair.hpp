#pragma once
// Principal eigenpair of the Dirichlet Laplacian and principal eigenvalue of
// the advected operator L_alpha = -Lap + alpha.grad, by inverse power
// iteration on a direct factorization.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "nll/csv.hpp"
#include "nll/errors.hpp"
#include "nll/flow.hpp"
#include "nll/operators.hpp"

namespace nll {

struct EigenPair {
    double lambda1 = 0.0;
    Field phi1;       // positive interior, zero boundary, sup norm 1
    int iterations = 0;
};

namespace detail {

constexpr int kEigenIterationCap = 10000;

inline double rayleigh(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& v) {
    return v.dot(A * v) / v.dot(v);
}

inline double residual_inf(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& v, double rho) {
    return (A * v - rho * v).lpNorm<Eigen::Infinity>();
}

/// Advection part of L_alpha over interior nodes, central differences.
inline Eigen::SparseMatrix<double> advection_matrix(const Grid& g, const FlowSpec& flow) {
    flow.validate(g);
    const int m = g.nodes_per_axis();
    std::vector<Eigen::Triplet<double>> trip;
    auto add = [&](int row, int node, double v) {
        const int col = g.interior_index[node];
        if (col >= 0 && v != 0.0) trip.emplace_back(row, col, v);
    };
    for (std::size_t r = 0; r < g.interior_count(); ++r) {
        const int k = g.interior_nodes[r];
        const double cx = flow.component_at(0, k);
        add(static_cast<int>(r), k + 1, cx / (2.0 * g.h[0]));
        add(static_cast<int>(r), k - 1, -cx / (2.0 * g.h[0]));
        if (g.dim() == 2) {
            const double cy = flow.component_at(1, k);
            add(static_cast<int>(r), k + m, cy / (2.0 * g.h[1]));
            add(static_cast<int>(r), k - m, -cy / (2.0 * g.h[1]));
        }
    }
    Eigen::SparseMatrix<double> A(static_cast<int>(g.interior_count()),
                                  static_cast<int>(g.interior_count()));
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

inline std::string grid_key(const Grid& g) {
    std::string s = g.dim() == 1 ? "I:" : "R:";
    s += format_double(g.domain.x0) + "," + format_double(g.domain.x1);
    if (g.dim() == 2) s += "," + format_double(g.domain.y0) + "," + format_double(g.domain.y1);
    s += ";n=" + std::to_string(g.n);
    return s;
}

inline std::string flow_key(const FlowSpec& f) {
    if (f.variant == FlowSpec::Variant::Constant) {
        std::string s = "c:";
        for (double c : f.components) s += format_double(c) + ",";
        return s;
    }
    std::string blob;
    for (const auto& comp : f.field)
        for (double v : comp) blob += format_double(v) + ",";
    return "f:" + fnv1a64_hex(blob);
}

} // namespace detail

/// Smallest eigenvalue of the discrete Dirichlet Laplacian with its positive
/// eigenfunction. Deterministic: fixed start vector of ones, tolerance 1e-10
/// on successive Rayleigh quotients, residual pushed below 1e-9.
inline EigenPair principal_eigenpair(const Grid& g) {
    const Eigen::SparseMatrix<double> A = laplacian_matrix(g);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
    if (llt.info() != Eigen::Success)
        throw NonconvergenceError("principal_eigenpair: factorization failed");

    const Eigen::Index ni = A.rows();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(ni);
    double rho_prev = 0.0;
    double rho = 0.0;
    int it = 0;
    for (it = 1; it <= detail::kEigenIterationCap; ++it) {
        Eigen::VectorXd w = llt.solve(v);
        w /= w.lpNorm<Eigen::Infinity>();
        v = w;
        rho = detail::rayleigh(A, v);
        const double res = detail::residual_inf(A, v, rho);
        if (res <= 1e-9 && std::abs(rho - rho_prev) <= 1e-10 * std::max(1.0, std::abs(rho))) break;
        rho_prev = rho;
    }
    if (it > detail::kEigenIterationCap)
        throw NonconvergenceError("principal_eigenpair: iteration cap exceeded");

    EigenPair ep;
    ep.lambda1 = rho;
    ep.iterations = it;
    ep.phi1 = Field(g);
    // L^{-1} is entrywise positive for this M-matrix, so v stays positive.
    const double s = v.lpNorm<Eigen::Infinity>();
    for (std::size_t r = 0; r < g.interior_count(); ++r)
        ep.phi1[g.interior_nodes[r]] = v[static_cast<Eigen::Index>(r)] / s;
    return ep;
}

/// Principal (smallest-real) eigenvalue of L_alpha = -Lap + alpha.grad via
/// inverse power iteration on the nonsymmetric factorization. An oscillating
/// Rayleigh quotient (complex-dominant behavior) raises an error.
inline double principal_eigenvalue_advection(const Grid& g, const FlowSpec& flow) {
    Eigen::SparseMatrix<double> A = laplacian_matrix(g);
    A = A + detail::advection_matrix(g, flow);
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    if (lu.info() != Eigen::Success)
        throw NonconvergenceError("principal_eigenvalue_advection: factorization failed");

    Eigen::VectorXd v = Eigen::VectorXd::Ones(A.rows());
    double rho_prev = 0.0;
    double rho = 0.0;
    int oscillations = 0;
    double delta_prev = 0.0;
    for (int it = 1; it <= detail::kEigenIterationCap; ++it) {
        Eigen::VectorXd w = lu.solve(v);
        // Keep the positive orientation of the principal eigenvector.
        Eigen::Index imax = 0;
        w.cwiseAbs().maxCoeff(&imax);
        v = w / w[imax];
        rho = detail::rayleigh(A, v);
        const double delta = rho - rho_prev;
        const double res = detail::residual_inf(A, v, rho);
        if (res <= 1e-9 && std::abs(delta) <= 1e-10 * std::max(1.0, std::abs(rho))) return rho;
        if (it > 100 && delta * delta_prev < 0.0 && std::abs(delta) > 1e-8 * std::max(1.0, std::abs(rho))) {
            if (++oscillations > 50)
                throw NonconvergenceError(
                    "principal_eigenvalue_advection: oscillating Rayleigh quotient "
                    "(complex-dominant eigenvalue?)");
        }
        delta_prev = delta;
        rho_prev = rho;
    }
    throw NonconvergenceError("principal_eigenvalue_advection: iteration cap exceeded");
}

/// Cached variants keyed by (grid, flow); safe to call concurrently.
inline const EigenPair& principal_eigenpair_cached(const Grid& g) {
    static std::mutex mu;
    static std::map<std::string, EigenPair> cache;
    static std::map<std::string, Grid> grids; // phi1 must reference a stable grid
    const std::string key = detail::grid_key(g);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Grid& stored = grids.emplace(key, g).first->second;
    EigenPair ep = principal_eigenpair(stored);
    return cache.emplace(key, std::move(ep)).first->second;
}

inline double principal_eigenvalue_advection_cached(const Grid& g, const FlowSpec& flow) {
    static std::mutex mu;
    static std::map<std::string, double> cache;
    const std::string key = detail::grid_key(g) + "|" + detail::flow_key(flow);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double v = principal_eigenvalue_advection(g, flow);
    return cache.emplace(key, v).first->second;
}

} // namespace nll
