#pragma once
// Positive-solution solver: explicit sub/supersolution construction with
// discrete certification, pseudo-transient marching with implicit diffusion,
// damped Newton polish with the analytic (dense) Jacobian, and the bundled
// verification checks.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nll/eigenpair.hpp"
#include "nll/errors.hpp"
#include "nll/operators.hpp"
#include "nll/problem.hpp"

namespace nll {

/// Everything assembled once per parameter set.
struct Assembled {
    const Grid* grid = nullptr;
    Eigen::SparseMatrix<double> L; // Dirichlet -Lap over interior nodes
    KernelMatrix W;
    EigenPair eig; // principal pair of -Lap (no flow)
};

inline Assembled assemble(const ProblemParams& params) {
    params.validate();
    Assembled a;
    a.grid = &shared_grid(params.domain, params.n);
    a.L = laplacian_matrix(*a.grid);
    a.W = assemble_kernel(params.kernel, *a.grid);
    a.eig = principal_eigenpair_cached(*a.grid);
    return a;
}

struct Bracket {
    Field sub, sup;
    double epsilon = 0.0, a = 0.0, M = 0.0;
    bool sub_certified = false, sup_certified = false;
    bool complete() const { return sub_certified && sup_certified; }
};

struct SubsolutionResult {
    Field field;
    double epsilon = 0.0, a = 0.0;
    bool certified = false;
};

/// eps * phi1^a with a the midpoint of the admissible interval (1, lambda/lambda1)
/// and eps halved from 1 until the discrete residual is nonpositive at every
/// interior node. Underflow below 1e-12 reports certification failure.
inline SubsolutionResult build_subsolution(const ProblemParams& params, const Assembled& asmb) {
    const double l1 = asmb.eig.lambda1;
    if (!(params.lambda > l1))
        throw NoSubsolutionError("build_subsolution: requires lambda > lambda1 = " + format_double(l1));
    SubsolutionResult r;
    r.a = 0.5 * (1.0 + params.lambda / l1);

    const Grid& g = *asmb.grid;
    Field base(g);
    for (std::size_t k = 0; k < g.node_count(); ++k)
        base[k] = std::pow(asmb.eig.phi1[k], r.a);

    for (double eps = 1.0; eps >= 1e-12; eps *= 0.5) {
        Field cand(g);
        for (std::size_t k = 0; k < g.node_count(); ++k) cand[k] = eps * base[k];
        const Field res = residual_raw(cand, params, asmb.W);
        double worst = 0.0;
        for (int k : g.interior_nodes) worst = std::max(worst, res[k]);
        if (worst <= 1e-10) {
            r.field = std::move(cand);
            r.epsilon = eps;
            r.certified = true;
            return r;
        }
        r.field = std::move(cand);
        r.epsilon = eps;
    }
    r.certified = false;
    return r;
}

struct SupersolutionResult {
    Field field;
    double M = 0.0;
    bool certified = false;
};

/// The constant M = (lambda/k0)^{1/gamma}; requires k0 > 0 and lambda > 0.
inline SupersolutionResult build_supersolution(const ProblemParams& params, const Assembled& asmb) {
    if (!(asmb.W.k0 > 0.0))
        throw NoSupersolutionError("build_supersolution: kernel row mass has no positive lower bound (k0 = 0)");
    if (!(params.lambda > 0.0))
        throw NoSupersolutionError("build_supersolution: requires lambda > 0");
    SupersolutionResult r;
    r.M = std::pow(params.lambda / asmb.W.k0, 1.0 / params.gamma);
    r.field = Field(*asmb.grid, r.M);
    const Field res = residual_raw(r.field, params, asmb.W);
    double worst = 0.0;
    for (int k : asmb.grid->interior_nodes) worst = std::min(worst, res[k]);
    r.certified = (worst >= -1e-10);
    return r;
}

struct SolveOptions {
    std::optional<Field> start;    // overrides the subsolution start (warm starts)
    double residual_tol = 1e-8;
    int march_cap = 20000;
    int newton_cap = 50;
};

struct SolveReport {
    Field solution;
    bool converged = false;
    double residual_inf = std::numeric_limits<double>::infinity();
    int march_iterations = 0;
    int newton_iterations = 0;
    std::optional<Bracket> bracket;
    bool bracket_satisfied = false; // sub - 1e-8 <= u <= sup + 1e-8 nodewise
    double min_interior = 0.0;
    bool positive = false;
    bool apriori_bound_ok = true; // sup_norm <= M + 1e-6 when M exists
    double lambda1 = 0.0;
    std::optional<double> M;
    std::string message;
};

namespace detail {

inline Eigen::VectorXd interior_of(const Field& u) {
    const Grid& g = *u.grid;
    Eigen::VectorXd v(g.interior_count());
    for (std::size_t r = 0; r < g.interior_count(); ++r) v[r] = u[g.interior_nodes[r]];
    return v;
}

inline Field field_of_interior(const Grid& g, const Eigen::VectorXd& v) {
    Field u(g);
    for (std::size_t r = 0; r < g.interior_count(); ++r) u[g.interior_nodes[r]] = v[r];
    return u;
}

/// Dense Jacobian of the residual at u over interior unknowns:
/// Laplacian + advection chain rule + diagonal reaction - dense nonlocal part.
inline Eigen::MatrixXd jacobian(const Field& u, const ProblemParams& params, const Assembled& asmb) {
    const Grid& g = *asmb.grid;
    const int ni = static_cast<int>(g.interior_count());
    const int m = g.nodes_per_axis();
    Eigen::MatrixXd J = Eigen::MatrixXd(asmb.L);

    const bool upwind = use_upwind(u, params.p, params.flow);
    auto dw = [&](int node) { // d/du of sign(u)|u|^p
        const double t = std::abs(u[node]);
        if (params.p == 1.0) return 1.0;
        return t == 0.0 ? 0.0 : params.p * std::pow(t, params.p - 1.0);
    };
    auto add = [&](int row, int node, double v) {
        const int col = g.interior_index[node];
        if (col >= 0) J(row, col) += v;
    };
    auto advect_axis = [&](int row, int k, std::ptrdiff_t stride, double h, double coef) {
        if (coef == 0.0) return;
        if (upwind) {
            if (coef > 0.0) {
                add(row, k, coef / h * dw(k));
                add(row, static_cast<int>(k - stride), -coef / h * dw(static_cast<int>(k - stride)));
            } else {
                add(row, static_cast<int>(k + stride), coef / h * dw(static_cast<int>(k + stride)));
                add(row, k, -coef / h * dw(k));
            }
        } else {
            add(row, static_cast<int>(k + stride), coef / (2.0 * h) * dw(static_cast<int>(k + stride)));
            add(row, static_cast<int>(k - stride), -coef / (2.0 * h) * dw(static_cast<int>(k - stride)));
        }
    };

    const Field ph = phi(u, params.gamma, asmb.W);
    const double gamma = params.gamma;
    for (int r = 0; r < ni; ++r) {
        const int k = g.interior_nodes[r];
        advect_axis(r, k, 1, g.h[0], params.flow.component_at(0, k));
        if (g.dim() == 2) advect_axis(r, k, m, g.h[1], params.flow.component_at(1, k));

        J(r, r) += -(params.lambda - ph[k]);
        // d phi_k / d u_j = gamma W(k,j) |u_j|^{gamma-1} sign(u_j)
        const double uk = u[k];
        if (uk != 0.0) {
            for (int c = 0; c < ni; ++c) {
                const int j = g.interior_nodes[c];
                const double t = std::abs(u[j]);
                if (t == 0.0) continue;
                const double sgn = u[j] > 0.0 ? 1.0 : -1.0;
                J(r, c) += uk * gamma * std::pow(t, gamma - 1.0) * sgn * asmb.W.W(k, j);
            }
        }
    }
    return J;
}

inline double residual_inf_norm(const Field& u, const ProblemParams& params, const Assembled& asmb) {
    return sup_norm(residual(u, params, asmb.W));
}

struct MarchResult {
    Field u;
    double residual = std::numeric_limits<double>::infinity();
    int steps = 0;
    bool plateaued = false;
};

/// Pseudo-transient march u <- u + tau(-F(u)) with the Laplacian treated
/// implicitly: (I + tau L) u_next = u + tau [ (lambda - phi(u)) u - adv(u) ],
/// clamped at u >= 0. tau starts at 0.5 h^2 / (1 + sup u) and is doubled when
/// the residual does not grow, halved when it does; a step that blows the
/// residual up by more than 10x is rejected outright.
inline MarchResult march(Field u, const ProblemParams& params, const Assembled& asmb, int cap,
                         double switch_tol, double residual_tol) {
    const Grid& g = *asmb.grid;
    zero_boundary(u);
    for (double& v : u.values) v = std::max(v, 0.0);

    const double h2 = g.dim() == 1 ? g.h[0] * g.h[0] : std::min(g.h[0] * g.h[0], g.h[1] * g.h[1]);
    double tau = 0.5 * h2 / (1.0 + sup_norm(u));
    const double tau_min = 1e-14;
    double cooled = 1e2; // extra ceiling, lowered when progress stalls

    const double adv_mag = params.flow.sup_magnitude(g);
    const double measure = g.domain.measure();

    // Stability ceiling for the explicitly treated terms: the reaction scale
    // |lambda| + |phi|_inf, and the square of the advection speed (implicit
    // diffusion damps central-difference advection up to tau ~ 2/a^2).
    auto tau_ceiling = [&](double supu) {
        const double reaction =
            std::abs(params.lambda) + asmb.W.kinf * measure * std::pow(1.0 + supu, params.gamma);
        const double a_adv = adv_mag * params.p * std::pow(1.0 + supu, params.p - 1.0);
        return std::min({cooled, 1.0 / (1.0 + reaction), 2.0 / (1.0 + a_adv * a_adv)});
    };

    Eigen::SparseMatrix<double> identity(asmb.L.rows(), asmb.L.cols());
    identity.setIdentity();
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
    llt.analyzePattern(asmb.L);
    double tau_factored = -1.0;

    // Residual of a boundary-zero field from precomputed pieces; phi and the
    // advection term of the accepted iterate carry over to the next step.
    auto residual_from = [&](const Field& w, const Field& phw, const Field& advw) {
        const Field lap = apply_neg_laplacian(w);
        double rr = 0.0;
        for (int node : g.interior_nodes)
            rr = std::max(rr, std::abs(lap[node] + advw[node] -
                                       (params.lambda - phw[node]) * w[node]));
        return rr;
    };

    Field ph = phi(u, params.gamma, asmb.W);
    Field adv = advection_term(u, params.p, params.flow);

    MarchResult out;
    double r = residual_from(u, ph, adv);
    double best = r;
    int since_best = 0;
    double sup_anchor = sup_norm(u);
    int k = 0;
    for (k = 0; k < cap; ++k) {
        if (r <= residual_tol) break;
        const double supu = sup_norm(u);
        // A stalled residual only counts as stagnation when the state itself
        // has stopped moving; slow transients (escape from the trivial branch
        // near the bifurcation point) keep marching.
        const bool state_moving = std::abs(supu - sup_anchor) > 1e-3 * (1.0 + sup_anchor);
        if (since_best > 0 && since_best % 100 == 0) {
            if (state_moving) {
                since_best = 0;
                sup_anchor = supu;
            } else {
                cooled = std::max(cooled * 0.25, tau_min);
            }
        }
        if (k >= 30 && r <= switch_tol * (1.0 + supu)) break;
        if (since_best >= 500) {
            out.plateaued = true;
            break;
        }
        tau = std::min(tau, tau_ceiling(supu));

        if (tau != tau_factored) {
            Eigen::SparseMatrix<double> A = identity + tau * asmb.L;
            llt.factorize(A);
            tau_factored = tau;
        }
        Eigen::VectorXd rhs(g.interior_count());
        for (std::size_t rI = 0; rI < g.interior_count(); ++rI) {
            const int node = g.interior_nodes[rI];
            rhs[rI] = u[node] + tau * ((params.lambda - ph[node]) * u[node] - adv[node]);
        }
        Eigen::VectorXd v = llt.solve(rhs);
        Field u_new = field_of_interior(g, v);
        for (double& x : u_new.values) x = std::max(x, 0.0);

        Field ph_new = phi(u_new, params.gamma, asmb.W);
        Field adv_new = advection_term(u_new, params.p, params.flow);
        const double r_new = residual_from(u_new, ph_new, adv_new);
        if (r_new > 10.0 * r && r_new > 1e-12) {
            tau = std::max(tau * 0.5, tau_min); // reject, retry smaller
            ++since_best;
            continue;
        }
        u = std::move(u_new);
        ph = std::move(ph_new);
        adv = std::move(adv_new);
        tau = r_new <= 1.2 * r ? tau * 2.0 : std::max(tau * 0.5, tau_min);
        r = r_new;
        if (r < 0.999 * best) {
            best = r;
            since_best = 0;
        } else {
            ++since_best;
        }
    }
    out.u = std::move(u);
    out.residual = r;
    out.steps = k;
    return out;
}

struct NewtonResult {
    Field u;
    double residual = std::numeric_limits<double>::infinity();
    int steps = 0;
    bool converged = false;
};

inline NewtonResult newton(Field u, const ProblemParams& params, const Assembled& asmb, int cap,
                           double tol) {
    const Grid& g = *asmb.grid;
    NewtonResult out;
    double r = residual_inf_norm(u, params, asmb);
    for (int it = 0; it < cap && r > tol; ++it) {
        Eigen::MatrixXd J = jacobian(u, params, asmb);
        Eigen::VectorXd F(g.interior_count());
        const Field res = residual(u, params, asmb.W);
        for (std::size_t rI = 0; rI < g.interior_count(); ++rI) F[rI] = res[g.interior_nodes[rI]];
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
        Eigen::VectorXd step = lu.solve(-F);
        if (!step.allFinite()) break;

        bool accepted = false;
        for (double theta = 1.0; theta >= 1.0 / 64.0; theta *= 0.5) {
            Field cand = u;
            for (std::size_t rI = 0; rI < g.interior_count(); ++rI)
                cand[g.interior_nodes[rI]] += theta * step[rI];
            const double rc = residual_inf_norm(cand, params, asmb);
            if (rc <= (1.0 - 1e-4 * theta) * r) {
                u = std::move(cand);
                r = rc;
                accepted = true;
                break;
            }
        }
        ++out.steps;
        if (!accepted) break;
    }
    out.u = std::move(u);
    out.residual = r;
    out.converged = (r <= tol);
    return out;
}

} // namespace detail

inline SolveReport solve_positive(const ProblemParams& params, const Assembled& asmb,
                                  const SolveOptions& opts = {}) {
    const Grid& g = *asmb.grid;
    SolveReport rep;
    rep.lambda1 = asmb.eig.lambda1;

    // Bracket (when constructible): certified eps phi1^a below, constant M above.
    std::optional<SubsolutionResult> sub;
    std::optional<SupersolutionResult> sup;
    try {
        sub = build_subsolution(params, asmb);
    } catch (const NoSubsolutionError&) {
    }
    try {
        sup = build_supersolution(params, asmb);
        rep.M = sup->M;
    } catch (const NoSupersolutionError&) {
    }
    if (sub && sup && sub->certified && sup->certified) {
        Bracket b;
        b.sub = sub->field;
        b.sup = sup->field;
        b.epsilon = sub->epsilon;
        b.a = sub->a;
        b.M = sup->M;
        b.sub_certified = b.sup_certified = true;
        rep.bracket = std::move(b);
    }

    Field start(g);
    if (opts.start) {
        start = *opts.start;
        check_same_grid(start, Field(g), "solve_positive start");
    } else if (sub && sub->certified) {
        start = sub->field;
    } else {
        for (std::size_t k = 0; k < g.node_count(); ++k) start[k] = 0.1 * asmb.eig.phi1[k];
    }

    // Warm starts sit near a solution already, so Newton takes over earlier.
    double switch_tol = opts.start ? 3e-2 : 1e-3;
    int march_budget = opts.march_cap;
    detail::MarchResult mres = detail::march(std::move(start), params, asmb, march_budget,
                                             switch_tol, opts.residual_tol);
    rep.march_iterations = mres.steps;

    Field best = mres.u;
    double best_r = mres.residual;

    for (int attempt = 0; attempt < 3; ++attempt) {
        detail::NewtonResult nres =
            detail::newton(best, params, asmb, opts.newton_cap, opts.residual_tol);
        rep.newton_iterations += nres.steps;

        // Guard against Newton jumping off the bracketed branch (e.g. collapse
        // to the trivial solution while a certified subsolution exists).
        bool below_bracket = false;
        if (nres.converged && rep.bracket) {
            for (int k : g.interior_nodes)
                if (nres.u[k] < rep.bracket->sub[k] - 1e-8) {
                    below_bracket = true;
                    break;
                }
        }
        if (nres.converged && !below_bracket) {
            best = std::move(nres.u);
            best_r = nres.residual;
            break;
        }
        if (!nres.converged && nres.residual < best_r) {
            best = std::move(nres.u);
            best_r = nres.residual;
        }
        if (attempt == 2) {
            rep.message = below_bracket ? "newton repeatedly left the bracket; reporting march result"
                                        : "newton stalled; reporting best march result";
            break;
        }
        // Resume marching with a tighter handoff and try again.
        switch_tol *= 1e-2;
        detail::MarchResult again =
            detail::march(std::move(best), params, asmb, march_budget, switch_tol, opts.residual_tol);
        rep.march_iterations += again.steps;
        best = std::move(again.u);
        best_r = again.residual;
    }

    if (sup_norm(best) < 1e-12) best = Field(g); // snap the trivial branch to exactly zero
    rep.residual_inf = detail::residual_inf_norm(best, params, asmb);
    rep.solution = std::move(best);
    rep.converged = rep.residual_inf <= opts.residual_tol;

    double mn = std::numeric_limits<double>::infinity();
    for (int k : g.interior_nodes) mn = std::min(mn, rep.solution[k]);
    rep.min_interior = mn;
    rep.positive = mn > 0.0;
    if (rep.M) rep.apriori_bound_ok = sup_norm(rep.solution) <= *rep.M + 1e-6;
    if (rep.bracket) {
        rep.bracket_satisfied = true;
        for (int k : g.interior_nodes) {
            if (rep.solution[k] < rep.bracket->sub[k] - 1e-8 ||
                rep.solution[k] > rep.bracket->sup[k] + 1e-8) {
                rep.bracket_satisfied = false;
                break;
            }
        }
    }
    if (rep.message.empty())
        rep.message = rep.converged ? (rep.positive ? "positive solution" : "trivial solution")
                                    : "did not converge";
    return rep;
}

inline SolveReport solve_positive(const ProblemParams& params, const SolveOptions& opts = {}) {
    Assembled asmb = assemble(params);
    return solve_positive(params, asmb, opts);
}

/// Bundled residual / positivity / boundary / a priori checks for a field.
struct VerifyReport {
    double residual_inf = 0.0;
    double min_interior = 0.0;
    double boundary_max = 0.0;
    double sup = 0.0;
    std::optional<double> M;
    bool apriori_ok = true;
    bool is_solution = false;
    bool positive = false;
};

inline VerifyReport verify_solution(const Field& u, const ProblemParams& params, double tol = 1e-8) {
    Assembled asmb = assemble(params);
    VerifyReport v;
    v.residual_inf = sup_norm(residual_raw(u, params, asmb.W));
    double mn = std::numeric_limits<double>::infinity();
    for (int k : asmb.grid->interior_nodes) mn = std::min(mn, u[k]);
    v.min_interior = mn;
    for (std::size_t k = 0; k < u.size(); ++k)
        if (asmb.grid->is_boundary(k)) v.boundary_max = std::max(v.boundary_max, std::abs(u[k]));
    v.sup = sup_norm(u);
    if (asmb.W.k0 > 0.0 && params.lambda > 0.0) {
        v.M = std::pow(params.lambda / asmb.W.k0, 1.0 / params.gamma);
        v.apriori_ok = v.sup <= *v.M + 1e-6;
    }
    v.is_solution = v.residual_inf <= tol && v.boundary_max == 0.0;
    v.positive = mn > 0.0;
    return v;
}

namespace detail {

inline double unit_from_bits(std::uint64_t& state) { // splitmix64, deterministic everywhere
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

} // namespace detail

struct NonexistenceVerdict {
    bool no_positive_found = false;
    std::vector<double> final_sup_norms;
    std::vector<bool> runs_converged;
    // p = 1, constant flow: the analytic necessary bound |alpha_i| <= lambda sup|R - x_i|
    // with R = axis width + 1.
    bool bound_applicable = false;
    std::vector<double> alpha_bounds;
    bool alpha_bound_violated = false;
};

/// Runs the solver from `starts` distinct positive initial fields (scaled
/// phi1, constant M/2, seeded random smooth positive fields); verdict
/// "no positive solution found" iff every run collapses below 1e-6.
inline NonexistenceVerdict detect_nonexistence(const ProblemParams& params, int starts,
                                               std::uint64_t seed = 1) {
    if (starts < 3) throw std::invalid_argument("detect_nonexistence: starts >= 3 required");
    Assembled asmb = assemble(params);
    const Grid& g = *asmb.grid;

    double mref = 1.0;
    if (asmb.W.k0 > 0.0 && params.lambda > 0.0)
        mref = std::pow(params.lambda / asmb.W.k0, 1.0 / params.gamma);

    std::vector<Field> initial;
    {
        Field f(g);
        for (std::size_t k = 0; k < g.node_count(); ++k) f[k] = 0.5 * mref * asmb.eig.phi1[k];
        initial.push_back(std::move(f));
    }
    {
        Field f(g, 0.5 * mref);
        zero_boundary(f);
        initial.push_back(std::move(f));
    }
    for (int j = 2; j < starts; ++j) {
        std::uint64_t state = seed * 0x100000001b3ull + static_cast<std::uint64_t>(j);
        const double a = detail::unit_from_bits(state);
        const double b = 1.0 + 2.0 * detail::unit_from_bits(state);
        const double c = 1.0 + 2.0 * detail::unit_from_bits(state);
        Field f(g);
        for (std::size_t k = 0; k < g.node_count(); ++k) {
            const double xh = (g.x(k) - g.domain.x0) / g.domain.length(0);
            const double yh = g.dim() == 2 ? (g.y(k) - g.domain.y0) / g.domain.length(1) : 0.0;
            const double mod = 1.0 + 0.4 * std::sin(2.0 * kPi * (a + b * xh + c * yh));
            f[k] = 0.5 * mref * asmb.eig.phi1[k] * mod;
        }
        initial.push_back(std::move(f));
    }

    NonexistenceVerdict verdict;
    bool all_collapse = true;
    for (auto& u0 : initial) {
        SolveOptions opts;
        opts.start = std::move(u0);
        SolveReport rep = solve_positive(params, asmb, opts);
        const double s = sup_norm(rep.solution);
        verdict.final_sup_norms.push_back(s);
        verdict.runs_converged.push_back(rep.converged);
        if (!(s < 1e-6)) all_collapse = false;
    }
    verdict.no_positive_found = all_collapse;

    if (params.p == 1.0 && params.flow.variant == FlowSpec::Variant::Constant) {
        verdict.bound_applicable = true;
        for (int axis = 0; axis < g.dim(); ++axis) {
            const double bound = params.lambda * (g.domain.length(axis) + 1.0);
            verdict.alpha_bounds.push_back(bound);
            if (std::abs(params.flow.components[axis]) > bound) verdict.alpha_bound_violated = true;
        }
    }
    return verdict;
}

} // namespace nll
