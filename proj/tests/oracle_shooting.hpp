#pragma once
// Independent oracle for the 1D integro-ODE with K = 1, gamma = 1 and
// constant flow:
//     -u'' + alpha (u^p)' = (lambda - s) u,   s = integral of u over (0, L),
//     u(0) = u(L) = 0.
//
// Bidirectional (two-sided) shooting, deliberately disjoint from the
// library's solver path: RK4 on the state (u, u', w) with w' = u from both
// ends toward the midpoint, unknowns (u'(0), u'(L), s), matching u, u' and
// the accumulated mass at the midpoint via a damped 3x3 Newton iteration
// with finite-difference Jacobian, with continuation in alpha from the
// closed-form alpha = 0 solution.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

struct ShootingProblem {
    double lambda = 0.0;
    double alpha = 0.0;
    double p = 2.0;
    double length = 1.0;
    int rk_steps = 4096; // total over (0, L); must be even
};

namespace detail {

struct State {
    double u, v, w;
};

inline State rhs(const ShootingProblem& pb, double s, const State& y) {
    const double au = std::abs(y.u);
    const double dpow = pb.p == 1.0 ? 1.0 : (au == 0.0 ? 0.0 : pb.p * std::pow(au, pb.p - 1.0));
    return State{y.v, pb.alpha * dpow * y.v - (pb.lambda - s) * y.u, y.u};
}

// RK4 with signed step; bails out once |u| leaves any plausible range so the
// caller sees a huge residual and backtracks.
inline std::vector<State> integrate(const ShootingProblem& pb, double s, State y, double h,
                                    int steps) {
    std::vector<State> traj(steps + 1);
    traj[0] = y;
    for (int i = 0; i < steps; ++i) {
        const State k1 = rhs(pb, s, y);
        const State y2{y.u + 0.5 * h * k1.u, y.v + 0.5 * h * k1.v, y.w + 0.5 * h * k1.w};
        const State k2 = rhs(pb, s, y2);
        const State y3{y.u + 0.5 * h * k2.u, y.v + 0.5 * h * k2.v, y.w + 0.5 * h * k2.w};
        const State k3 = rhs(pb, s, y3);
        const State y4{y.u + h * k3.u, y.v + h * k3.v, y.w + h * k3.w};
        const State k4 = rhs(pb, s, y4);
        y.u += h / 6.0 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u);
        y.v += h / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
        y.w += h / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w);
        if (!std::isfinite(y.u) || std::abs(y.u) > 1e6) {
            for (int j = i + 1; j <= steps; ++j) traj[j] = State{1e6, 1e6, 0.0};
            return traj;
        }
        traj[i + 1] = y;
    }
    return traj;
}

struct Halves {
    std::vector<State> left, right; // left: x = 0..L/2; right: x = L..L/2
};

inline Halves shoot(const ShootingProblem& pb, double m0, double m1, double s) {
    const int half = pb.rk_steps / 2;
    const double h = pb.length / pb.rk_steps;
    Halves out;
    out.left = integrate(pb, s, State{0.0, m0, 0.0}, h, half);
    out.right = integrate(pb, s, State{0.0, m1, 0.0}, -h, half);
    return out;
}

// Matching conditions at the midpoint: continuity of u and u', and total
// mass consistency (the right half accumulates -integral over (L/2, L)).
inline std::array<double, 3> match_residual(const ShootingProblem& pb, double m0, double m1,
                                            double s) {
    const Halves hv = shoot(pb, m0, m1, s);
    const State& l = hv.left.back();
    const State& r = hv.right.back();
    return {l.u - r.u, l.v - r.v, (l.w - r.w) - s};
}

inline double norm3(const std::array<double, 3>& r) {
    if (!std::isfinite(r[0]) || !std::isfinite(r[1]) || !std::isfinite(r[2])) return 1e300;
    return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
}

inline bool newton_3x3(const ShootingProblem& pb, double& m0, double& m1, double& s, int& iters) {
    const double tol = 1e-8 * std::max(1.0, pb.lambda);
    std::array<double, 3> r = match_residual(pb, m0, m1, s);
    for (int it = 0; it < 80; ++it) {
        if (norm3(r) <= tol) {
            iters += it;
            return true;
        }
        double x[3] = {m0, m1, s};
        double Jm[3][3];
        for (int c = 0; c < 3; ++c) {
            const double d = 1e-7 * std::max(1.0, std::abs(x[c]));
            double xp[3] = {x[0], x[1], x[2]};
            xp[c] += d;
            const std::array<double, 3> rp = match_residual(pb, xp[0], xp[1], xp[2]);
            for (int rr = 0; rr < 3; ++rr) Jm[rr][c] = (rp[rr] - r[rr]) / d;
        }
        // Solve Jm * step = -r by Gaussian elimination with partial pivoting.
        double A[3][4];
        for (int rr = 0; rr < 3; ++rr) {
            for (int c = 0; c < 3; ++c) A[rr][c] = Jm[rr][c];
            A[rr][3] = -r[rr];
        }
        for (int c = 0; c < 3; ++c) {
            int piv = c;
            for (int rr = c + 1; rr < 3; ++rr)
                if (std::abs(A[rr][c]) > std::abs(A[piv][c])) piv = rr;
            if (A[piv][c] == 0.0 || !std::isfinite(A[piv][c])) return false;
            for (int cc = 0; cc < 4; ++cc) std::swap(A[c][cc], A[piv][cc]);
            for (int rr = c + 1; rr < 3; ++rr) {
                const double f = A[rr][c] / A[c][c];
                for (int cc = c; cc < 4; ++cc) A[rr][cc] -= f * A[c][cc];
            }
        }
        double step[3];
        for (int rr = 2; rr >= 0; --rr) {
            double acc = A[rr][3];
            for (int cc = rr + 1; cc < 3; ++cc) acc -= A[rr][cc] * step[cc];
            step[rr] = acc / A[rr][rr];
        }

        bool accepted = false;
        for (double theta = 1.0; theta >= 1.0 / 1024.0; theta *= 0.5) {
            const std::array<double, 3> rc = match_residual(pb, m0 + theta * step[0],
                                                            m1 + theta * step[1], s + theta * step[2]);
            if (norm3(rc) < norm3(r)) {
                m0 += theta * step[0];
                m1 += theta * step[1];
                s += theta * step[2];
                r = rc;
                accepted = true;
                break;
            }
        }
        if (!accepted) return false;
    }
    return norm3(match_residual(pb, m0, m1, s)) <= tol;
}

} // namespace detail

struct ShootingSolution {
    std::vector<double> u; // samples at rk_steps+1 uniform points including ends
    double mass = 0.0;     // the converged nonlocal scalar s
    double sup = 0.0;
    int newton_iterations = 0;
    double length = 1.0;

    double at(double x) const {
        const int n = static_cast<int>(u.size()) - 1;
        double t = x / length * n;
        if (t <= 0.0) return u.front();
        if (t >= n) return u.back();
        const int i = static_cast<int>(t);
        const double f = t - i;
        return (1.0 - f) * u[i] + f * u[i + 1];
    }
};

/// Positive solution of the integro-ODE via bidirectional shooting.
inline ShootingSolution solve_positive_shooting(const ShootingProblem& pb) {
    const double pi = 3.14159265358979323846;
    const double mu0 = pi * pi / (pb.length * pb.length);
    if (!(pb.lambda > mu0))
        throw std::runtime_error("shooting oracle: lambda must exceed pi^2/L^2");
    if (pb.rk_steps % 2 != 0) throw std::runtime_error("shooting oracle: rk_steps must be even");

    // alpha = 0 closed form: u = c sin(pi x/L), s = lambda - pi^2/L^2,
    // integral of sin(pi x/L) over (0,L) is 2L/pi, hence c = s pi/(2L).
    double s = pb.lambda - mu0;
    const double c = s * pi / (2.0 * pb.length);
    double m0 = c * pi / pb.length;
    double m1 = -m0;
    int iters = 0;

    const int alpha_steps = pb.alpha == 0.0 ? 1 : 8;
    for (int k = 1; k <= alpha_steps; ++k) {
        ShootingProblem stage = pb;
        stage.alpha = pb.alpha * k / alpha_steps;
        if (!detail::newton_3x3(stage, m0, m1, s, iters))
            throw std::runtime_error("shooting oracle: Newton stalled at alpha = " +
                                     std::to_string(stage.alpha));
    }

    const detail::Halves hv = detail::shoot(pb, m0, m1, s);
    ShootingSolution sol;
    sol.length = pb.length;
    const int half = pb.rk_steps / 2;
    sol.u.resize(pb.rk_steps + 1);
    for (int i = 0; i <= half; ++i) sol.u[i] = hv.left[i].u;
    for (int i = 0; i <= half; ++i) sol.u[pb.rk_steps - i] = hv.right[i].u;
    sol.u[half] = hv.left[half].u;
    sol.mass = s;
    for (double v : sol.u) sol.sup = std::max(sol.sup, std::abs(v));
    sol.newton_iterations = iters;
    return sol;
}

} // namespace oracle
