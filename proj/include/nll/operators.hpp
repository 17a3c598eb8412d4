#pragma once
// Discrete operators of the problem: the nonlocal crowding term phi_u,
// the Dirichlet Laplacian stencil, the nonlinear advection term, and the
// full residual F(u) = -Lap u + alpha.grad(|u|^{p-1}u) - (lambda - phi_u) u.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <vector>

#include "nll/kernel.hpp"
#include "nll/problem.hpp"

namespace nll {

/// Nonlocal term phi_u(x) = integral of K(x,y)|u(y)|^gamma dy, as W |u|^gamma.
inline Field phi(const Field& u, double gamma, const KernelMatrix& W) {
    const std::size_t m = u.size();
    Eigen::VectorXd ug(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) ug[static_cast<Eigen::Index>(k)] = std::pow(std::abs(u[k]), gamma);
    Eigen::VectorXd out = W.W * ug;
    Field f(*u.grid);
    for (std::size_t k = 0; k < m; ++k) f[k] = out[static_cast<Eigen::Index>(k)];
    return f;
}

/// -Lap with Dirichlet rows eliminated: 3-point (1D) / 5-point (2D) stencil
/// over interior nodes, scaled by 1/h^2 per axis. Symmetric positive definite.
inline Eigen::SparseMatrix<double> laplacian_matrix(const Grid& g) {
    const int m = g.nodes_per_axis();
    const std::size_t ni = g.interior_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(ni * (g.dim() == 1 ? 3 : 5));
    const double ax = 1.0 / (g.h[0] * g.h[0]);
    const double ay = g.dim() == 2 ? 1.0 / (g.h[1] * g.h[1]) : 0.0;
    const double diag = g.dim() == 1 ? 2.0 * ax : 2.0 * ax + 2.0 * ay;

    auto add = [&](int row, int node, double v) {
        const int col = g.interior_index[node];
        if (col >= 0) trip.emplace_back(row, col, v);
    };
    for (std::size_t r = 0; r < ni; ++r) {
        const int k = g.interior_nodes[r];
        trip.emplace_back(static_cast<int>(r), static_cast<int>(r), diag);
        if (g.dim() == 1) {
            add(static_cast<int>(r), k - 1, -ax);
            add(static_cast<int>(r), k + 1, -ax);
        } else {
            add(static_cast<int>(r), k - 1, -ax);
            add(static_cast<int>(r), k + 1, -ax);
            add(static_cast<int>(r), k - m, -ay);
            add(static_cast<int>(r), k + m, -ay);
        }
    }
    Eigen::SparseMatrix<double> A(static_cast<int>(ni), static_cast<int>(ni));
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

/// Stencil application of -Lap at interior nodes using the actual nodal
/// values (including nonzero boundary data); zero at boundary nodes.
/// Needed to certify the constant supersolution, whose boundary trace is M.
inline Field apply_neg_laplacian(const Field& u) {
    const Grid& g = *u.grid;
    const int m = g.nodes_per_axis();
    const double ax = 1.0 / (g.h[0] * g.h[0]);
    Field out(g);
    for (int r = 0; r < static_cast<int>(g.interior_count()); ++r) {
        const int k = g.interior_nodes[r];
        if (g.dim() == 1) {
            out[k] = ax * (2.0 * u[k] - u[k - 1] - u[k + 1]);
        } else {
            const double ay = 1.0 / (g.h[1] * g.h[1]);
            out[k] = ax * (2.0 * u[k] - u[k - 1] - u[k + 1]) + ay * (2.0 * u[k] - u[k - m] - u[k + m]);
        }
    }
    return out;
}

/// Cell Peclet switch: first-order upwinding engages when
/// |alpha| p sup(u)^{p-1} h / 2 > 1, else central differencing.
inline bool use_upwind(const Field& u, double p, const FlowSpec& flow) {
    const Grid& g = *u.grid;
    const double hmax = g.dim() == 1 ? g.h[0] : std::max(g.h[0], g.h[1]);
    const double peclet =
        flow.sup_magnitude(g) * p * std::pow(sup_norm(u), p - 1.0) * hmax / 2.0;
    return peclet > 1.0;
}

/// alpha . grad(|u|^{p-1} u), nodewise. Central differences (one-sided at the
/// boundary); per-node first-order upwinding when the Peclet switch fires.
inline Field advection_term(const Field& u, double p, const FlowSpec& flow) {
    const Grid& g = *u.grid;
    flow.validate(g);
    const int m = g.nodes_per_axis();
    const bool upwind = use_upwind(u, p, flow);

    std::vector<double> w(g.node_count());
    for (std::size_t k = 0; k < g.node_count(); ++k) {
        const double a = std::abs(u[k]);
        w[k] = (u[k] < 0.0 ? -1.0 : 1.0) * std::pow(a, p); // sign(u)|u|^p
    }

    auto deriv = [&](std::size_t k, int i, std::ptrdiff_t stride, double h, double coef) {
        if (upwind && i > 0 && i < m - 1) {
            if (coef > 0.0) return (w[k] - w[k - stride]) / h;
            if (coef < 0.0) return (w[k + stride] - w[k]) / h;
            return 0.0;
        }
        return detail::axis_derivative(w, k, i, m, stride, h);
    };

    Field out(g);
    if (g.dim() == 1) {
        for (int i = 0; i < m; ++i) {
            const double c = flow.component_at(0, i);
            out[i] = c * deriv(i, i, 1, g.h[0], c);
        }
    } else {
        for (int iy = 0; iy < m; ++iy) {
            for (int ix = 0; ix < m; ++ix) {
                const std::size_t k = g.at(ix, iy);
                const double cx = flow.component_at(0, k);
                const double cy = flow.component_at(1, k);
                out[k] = cx * deriv(k, ix, 1, g.h[0], cx) + cy * deriv(k, iy, m, g.h[1], cy);
            }
        }
    }
    return out;
}

/// Residual without boundary projection: evaluates the three terms at
/// interior nodes with the field's true boundary trace. Used to certify
/// sub/supersolution inequalities. Zero at boundary nodes.
inline Field residual_raw(const Field& u, const ProblemParams& params, const KernelMatrix& W) {
    const Grid& g = *u.grid;
    Field lap = apply_neg_laplacian(u);
    Field adv = advection_term(u, params.p, params.flow);
    Field ph = phi(u, params.gamma, W);
    Field out(g);
    for (int k : g.interior_nodes)
        out[k] = lap[k] + adv[k] - (params.lambda - ph[k]) * u[k];
    return out;
}

/// Full residual of the problem: u is projected to zero boundary data first;
/// F = 0 at boundary nodes.
inline Field residual(const Field& u, const ProblemParams& params, const KernelMatrix& W) {
    Field v = u;
    zero_boundary(v);
    return residual_raw(v, params, W);
}

} // namespace nll
