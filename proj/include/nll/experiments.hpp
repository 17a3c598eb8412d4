#pragma once
// Experiment drivers: existence-threshold bisection, asymptotic
// sweeps in |alpha| and p, the divergence-free case, and natural-parameter
// continuation of the positive branch from (lambda1, 0).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nll/eigenpair.hpp"
#include "nll/errors.hpp"
#include "nll/solver.hpp"

namespace nll {

struct SweepSpec {
    ProblemParams base;
    enum class Vary { Lambda, AlphaMagnitude, P } vary = Vary::AlphaMagnitude;
    std::vector<double> values;
    std::uint64_t seed = 1;
    bool warm_start = true;
};

namespace detail {

inline void require_strictly_decreasing(const std::vector<double>& v, const char* what) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1]))
            throw PreconditionError(std::string(what) + ": values must be strictly decreasing");
}

inline void require_strictly_increasing(const std::vector<double>& v, const char* what) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1]))
            throw PreconditionError(std::string(what) + ": values must be strictly increasing");
}

/// Unit sweep direction from the base constant flow (e1 when the base flow is zero).
inline std::vector<double> sweep_direction(const ProblemParams& base) {
    const int d = base.domain.dim();
    std::vector<double> dir(d, 0.0);
    if (base.flow.variant == FlowSpec::Variant::Constant && base.flow.magnitude() > 0.0) {
        const double m = base.flow.magnitude();
        for (int a = 0; a < d; ++a) dir[a] = base.flow.components[a] / m;
    } else {
        dir[0] = 1.0;
    }
    return dir;
}

inline ProblemParams with_alpha(const ProblemParams& base, const std::vector<double>& dir,
                                double magnitude) {
    ProblemParams p = base;
    std::vector<double> comps(dir.size());
    for (std::size_t a = 0; a < dir.size(); ++a) comps[a] = magnitude * dir[a];
    p.flow = FlowSpec::constant(std::move(comps));
    return p;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Existence threshold (positive solutions appear exactly above lambda1)

struct ThresholdResult {
    double lambda_star = 0.0;
    double lambda1 = 0.0;
    std::vector<std::pair<double, bool>> probes; // (lambda, positive solution found)
};

inline ThresholdResult threshold_bisect(const ProblemParams& base, double lo, double hi,
                                        int starts = 3, std::uint64_t seed = 1) {
    if (!(lo < hi)) throw PreconditionError("threshold_bisect: degenerate range (lo >= hi)");
    ThresholdResult out;
    out.lambda1 = principal_eigenpair_cached(shared_grid(base.domain, base.n)).lambda1;

    auto exists_at = [&](double lambda) {
        ProblemParams p = base;
        p.lambda = lambda;
        const bool found = !detect_nonexistence(p, starts, seed).no_positive_found;
        out.probes.emplace_back(lambda, found);
        return found;
    };

    const bool lo_exists = exists_at(lo);
    const bool hi_exists = exists_at(hi);
    if (lo_exists || !hi_exists)
        throw std::runtime_error(
            "threshold_bisect: inconsistent verdicts (expected no solution at lo, solution at hi)");

    const double width = 1e-2 * out.lambda1;
    double a = lo, b = hi;
    while (b - a > width) {
        const double mid = 0.5 * (a + b);
        if (exists_at(mid))
            b = mid;
        else
            a = mid;
    }
    out.lambda_star = 0.5 * (a + b);
    return out;
}

// ---------------------------------------------------------------------------
// |alpha| -> 0: C1 convergence to the alpha = 0 solution

struct AlphaZeroRow {
    double alpha = 0.0;
    double sup_distance = 0.0;
    double c1_distance = 0.0;
    bool converged = false;
};

struct AlphaZeroSweep {
    std::vector<AlphaZeroRow> rows;
    bool aborted = false;
    bool strictly_decreasing = false;
    bool final_small = false;
    bool pass = false;
    double decay_factor = 0.1;
};

inline AlphaZeroSweep sweep_alpha_to_zero(const SweepSpec& spec, double decay_factor = 0.1) {
    detail::require_strictly_decreasing(spec.values, "sweep_alpha_to_zero");
    const Grid& g = shared_grid(spec.base.domain, spec.base.n);
    const double l1 = principal_eigenpair_cached(g).lambda1;
    if (!(spec.base.lambda > l1))
        throw PreconditionError("sweep_alpha_to_zero: requires lambda > lambda1 = " + format_double(l1));

    const auto dir = detail::sweep_direction(spec.base);

    ProblemParams p0 = detail::with_alpha(spec.base, dir, 0.0);
    const SolveReport base_rep = solve_positive(p0);
    if (!base_rep.converged)
        throw NonconvergenceError("sweep_alpha_to_zero: alpha = 0 solve did not converge");

    AlphaZeroSweep out;
    out.decay_factor = decay_factor;
    std::optional<Field> prev = base_rep.solution;
    for (double mag : spec.values) {
        if (mag == 0.0) { // identity row: the reference solve itself
            out.rows.push_back({0.0, 0.0, 0.0, true});
            prev = base_rep.solution;
            continue;
        }
        ProblemParams p = detail::with_alpha(spec.base, dir, mag);
        SolveOptions opts;
        if (spec.warm_start && prev) opts.start = *prev;
        const SolveReport rep = solve_positive(p, opts);
        AlphaZeroRow row;
        row.alpha = mag;
        row.converged = rep.converged;
        row.sup_distance = sup_distance(rep.solution, base_rep.solution);
        row.c1_distance = c1_distance(rep.solution, base_rep.solution);
        out.rows.push_back(row);
        if (!rep.converged) {
            out.aborted = true;
            break;
        }
        prev = rep.solution;
    }

    if (!out.aborted && out.rows.size() >= 2) {
        out.strictly_decreasing = true;
        for (std::size_t i = 1; i < out.rows.size(); ++i)
            if (!(out.rows[i].c1_distance < out.rows[i - 1].c1_distance))
                out.strictly_decreasing = false;
        out.final_small = out.rows.back().c1_distance <= decay_factor * out.rows.front().c1_distance;
        out.pass = out.strictly_decreasing && out.final_small;
    }
    return out;
}

// ---------------------------------------------------------------------------
// |alpha| -> infinity: sup-norm decay and the test-function bound
//   alpha_i * integral(u^p) <= lambda |xi|_inf M |Omega|

struct AlphaInfinityRow {
    double alpha = 0.0;
    double sup = 0.0;
    double integral_up = 0.0;
    double bound = 0.0;
    bool bound_ok = false;
    bool converged = false;
};

struct AlphaInfinitySweep {
    std::vector<AlphaInfinityRow> rows;
    bool has_monotonicity_verdict = false;
    bool strictly_decreasing = false;
    bool bounds_ok = false;
    bool final_small = false;
    bool pass = false;
    double xi_sup = 0.0;
    double M = 0.0;
    double decay_factor = 0.2;
};

inline AlphaInfinitySweep sweep_alpha_to_infinity(const SweepSpec& spec, double decay_factor = 0.2) {
    if (!(spec.base.p > 1.0))
        throw PreconditionError("sweep_alpha_to_infinity: the decay result requires p > 1");
    detail::require_strictly_increasing(spec.values, "sweep_alpha_to_infinity");
    const Grid& g = shared_grid(spec.base.domain, spec.base.n);
    const double l1 = principal_eigenpair_cached(g).lambda1;
    if (!(spec.base.lambda > l1))
        throw PreconditionError("sweep_alpha_to_infinity: requires lambda > lambda1");

    const auto dir = detail::sweep_direction(spec.base);
    int axis = 0;
    for (std::size_t a = 1; a < dir.size(); ++a)
        if (std::abs(dir[a]) > std::abs(dir[axis])) axis = static_cast<int>(a);

    Assembled asmb0 = assemble(detail::with_alpha(spec.base, dir, spec.values.front()));
    if (!(asmb0.W.k0 > 0.0) || !(spec.base.lambda > 0.0))
        throw PreconditionError("sweep_alpha_to_infinity: the decay bound needs k0 > 0 and lambda > 0");

    AlphaInfinitySweep out;
    out.decay_factor = decay_factor;
    out.xi_sup = spec.base.domain.length(axis) + 1.0; // xi(x) = R - x_axis, R = width + 1
    out.M = std::pow(spec.base.lambda / asmb0.W.k0, 1.0 / spec.base.gamma);

    std::optional<Field> prev;
    for (double mag : spec.values) {
        ProblemParams p = detail::with_alpha(spec.base, dir, mag);
        SolveOptions opts;
        if (spec.warm_start && prev) opts.start = *prev;
        const SolveReport rep = solve_positive(p, opts);
        AlphaInfinityRow row;
        row.alpha = mag;
        row.converged = rep.converged;
        row.sup = sup_norm(rep.solution);
        Field up(*rep.solution.grid);
        for (std::size_t k = 0; k < up.size(); ++k)
            up[k] = std::pow(std::abs(rep.solution[k]), spec.base.p);
        row.integral_up = integrate(up);
        const double alpha_axis = mag * std::abs(dir[axis]);
        row.bound = spec.base.lambda * out.xi_sup * out.M * spec.base.domain.measure() /
                    std::max(alpha_axis, 1e-300);
        row.bound_ok = row.integral_up <= row.bound;
        out.rows.push_back(row);
        if (rep.converged) prev = rep.solution;
    }

    bool all_converged = true;
    out.bounds_ok = true;
    for (const auto& r : out.rows) {
        all_converged = all_converged && r.converged;
        out.bounds_ok = out.bounds_ok && r.bound_ok;
    }
    out.has_monotonicity_verdict = out.rows.size() >= 2;
    if (out.has_monotonicity_verdict) {
        out.strictly_decreasing = true;
        for (std::size_t i = 1; i < out.rows.size(); ++i)
            if (!(out.rows[i].sup < out.rows[i - 1].sup)) out.strictly_decreasing = false;
        out.final_small = out.rows.back().sup <= decay_factor * out.rows.front().sup;
        out.pass = all_converged && out.strictly_decreasing && out.bounds_ok && out.final_small;
    }
    return out;
}

// ---------------------------------------------------------------------------
// p = 1 nonexistence scan: empirical collapse magnitude vs analytic bound

struct AlphaNonexistenceScan {
    std::vector<std::pair<double, bool>> scans; // (magnitude, collapse verdict)
    std::optional<double> first_collapse;
    double analytic_bound = 0.0; // lambda * (width + 1) on the sweep axis
    bool consistent = true;      // every magnitude beyond the bound collapsed
};

inline AlphaNonexistenceScan estimate_alpha_nonexistence_p1(const ProblemParams& base,
                                                            const std::vector<double>& magnitudes,
                                                            int starts = 3, std::uint64_t seed = 1) {
    if (base.p != 1.0)
        throw PreconditionError("estimate_alpha_nonexistence_p1: the nonexistence bound covers p = 1 only");
    detail::require_strictly_increasing(magnitudes, "estimate_alpha_nonexistence_p1");
    const auto dir = detail::sweep_direction(base);
    int axis = 0;
    for (std::size_t a = 1; a < dir.size(); ++a)
        if (std::abs(dir[a]) > std::abs(dir[axis])) axis = static_cast<int>(a);

    AlphaNonexistenceScan out;
    out.analytic_bound = base.lambda * (base.domain.length(axis) + 1.0);
    for (double mag : magnitudes) {
        ProblemParams p = detail::with_alpha(base, dir, mag);
        const bool collapse = detect_nonexistence(p, starts, seed).no_positive_found;
        out.scans.emplace_back(mag, collapse);
        if (collapse && !out.first_collapse) out.first_collapse = mag;
        if (mag * std::abs(dir[axis]) > out.analytic_bound && !collapse) out.consistent = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// p -> 1+: C1 convergence to the p = 1 limit inside
// (lambda1, lambda1[L_alpha])

struct PToOneRow {
    double p = 0.0;
    double sup_distance = 0.0;
    double c1_distance = 0.0;
    bool converged = false;
};

struct PToOneSweep {
    std::vector<PToOneRow> rows;
    double lambda1 = 0.0;
    double lambda1_flow = 0.0;
    double limit_sup = 0.0; // sup norm of the p = 1 limit solution
    bool aborted = false;
    bool strictly_decreasing = false;
    bool final_small = false;
    bool pass = false;
    double decay_factor = 0.1;
};

inline PToOneSweep sweep_p_to_one(const SweepSpec& spec, double decay_factor = 0.1) {
    detail::require_strictly_decreasing(spec.values, "sweep_p_to_one");
    for (double v : spec.values)
        if (v == 1.0)
            throw PreconditionError("sweep_p_to_one: p list must not contain 1.0 "
                                    "(the limit point is solved separately)");
        else if (!(v > 1.0))
            throw PreconditionError("sweep_p_to_one: p values must exceed 1");

    const Grid& g = shared_grid(spec.base.domain, spec.base.n);
    PToOneSweep out;
    out.decay_factor = decay_factor;
    out.lambda1 = principal_eigenpair_cached(g).lambda1;
    out.lambda1_flow = principal_eigenvalue_advection_cached(g, spec.base.flow);
    if (!(spec.base.lambda > out.lambda1 && spec.base.lambda < out.lambda1_flow))
        throw PreconditionError("sweep_p_to_one: lambda must lie strictly inside (lambda1, "
                                "lambda1[L_alpha]) = (" +
                                format_double(out.lambda1) + ", " + format_double(out.lambda1_flow) +
                                "); got " + format_double(spec.base.lambda));

    std::vector<SolveReport> reps;
    std::optional<Field> prev;
    for (double pv : spec.values) {
        ProblemParams p = spec.base;
        p.p = pv;
        SolveOptions opts;
        if (spec.warm_start && prev) opts.start = *prev;
        SolveReport rep = solve_positive(p, opts);
        if (!rep.converged) {
            out.aborted = true;
            return out;
        }
        prev = rep.solution;
        reps.push_back(std::move(rep));
    }
    ProblemParams p1 = spec.base;
    p1.p = 1.0;
    SolveOptions opts1;
    if (spec.warm_start && prev) opts1.start = *prev;
    const SolveReport limit = solve_positive(p1, opts1);
    if (!limit.converged) {
        out.aborted = true;
        return out;
    }
    out.limit_sup = sup_norm(limit.solution);

    for (std::size_t i = 0; i < reps.size(); ++i) {
        PToOneRow row;
        row.p = spec.values[i];
        row.converged = true;
        row.sup_distance = sup_distance(reps[i].solution, limit.solution);
        row.c1_distance = c1_distance(reps[i].solution, limit.solution);
        out.rows.push_back(row);
    }
    if (out.rows.size() >= 2) {
        out.strictly_decreasing = true;
        for (std::size_t i = 1; i < out.rows.size(); ++i)
            if (!(out.rows[i].c1_distance < out.rows[i - 1].c1_distance))
                out.strictly_decreasing = false;
        out.final_small = out.rows.back().c1_distance <= decay_factor * out.rows.front().c1_distance;
        out.pass = out.strictly_decreasing && out.final_small;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Divergence-free field flow

struct DivFreeResult {
    double max_divergence = 0.0;
    SolveReport report;
    bool verdict = false; // positive solution found for lambda > lambda1
};

inline DivFreeResult divergence_free_case(const ProblemParams& base) {
    if (base.flow.variant != FlowSpec::Variant::Field)
        throw PreconditionError("divergence_free_case: flow must be a field variant");
    const Grid& g = shared_grid(base.domain, base.n);
    DivFreeResult out;
    out.max_divergence = base.flow.max_divergence(g);
    if (out.max_divergence > 1e-8)
        throw PreconditionError("divergence_free_case: flow is not divergence-free (max |div| = " +
                                format_double(out.max_divergence) + ")");
    out.report = solve_positive(base);
    const double l1 = out.report.lambda1;
    out.verdict = base.lambda > l1 ? (out.report.converged && out.report.positive) : true;
    return out;
}

// ---------------------------------------------------------------------------
// Branch continuation from (lambda1, 0)

struct BranchPoint {
    double lambda = 0.0;
    double solution_norm_sup = 0.0;
    double solution_norm_c1 = 0.0;
    bool positive = false;
    bool converged = false;
    bool bracket_ok = false;
    double residual_inf = 0.0;
};

struct BranchResult {
    std::vector<BranchPoint> points;
    double lambda1 = 0.0;
    double M_cap = 0.0; // a priori constant (Lambda/k0)^{1/gamma} at Lambda = max lambda
    bool lost = false;  // continuation lost the branch (nonconvergence)
    bool origin_small = false;
    bool all_positive = false;
    bool monotone_sup = false;
    bool bounded = false;
    bool pass = false;
};

inline BranchResult trace_branch(const ProblemParams& base, const std::vector<double>& lambdas) {
    if (lambdas.empty()) throw PreconditionError("trace_branch: empty lambda list");
    detail::require_strictly_increasing(lambdas, "trace_branch");
    const Grid& g = shared_grid(base.domain, base.n);
    BranchResult out;
    out.lambda1 = principal_eigenpair_cached(g).lambda1;
    if (!(lambdas.front() > out.lambda1))
        throw PreconditionError("trace_branch: first lambda must exceed lambda1 = " +
                                format_double(out.lambda1));

    ProblemParams pm = base;
    pm.lambda = lambdas.back();
    Assembled asmb = assemble(pm);
    if (!(asmb.W.k0 > 0.0))
        throw PreconditionError("trace_branch: the a priori bound check needs k0 > 0");
    out.M_cap = std::pow(lambdas.back() / asmb.W.k0, 1.0 / base.gamma);

    std::optional<Field> prev;
    for (double lam : lambdas) {
        ProblemParams p = base;
        p.lambda = lam;
        SolveOptions opts;
        if (prev) opts.start = *prev;
        const SolveReport rep = solve_positive(p, asmb, opts);
        BranchPoint bp;
        bp.lambda = lam;
        bp.solution_norm_sup = sup_norm(rep.solution);
        bp.solution_norm_c1 = c1_norm(rep.solution);
        bp.positive = rep.positive;
        bp.converged = rep.converged;
        bp.bracket_ok = rep.bracket_satisfied;
        bp.residual_inf = rep.residual_inf;
        out.points.push_back(bp);
        if (!rep.converged) {
            out.lost = true;
            break;
        }
        prev = rep.solution;
    }

    if (!out.points.empty()) {
        out.origin_small = out.points.front().solution_norm_sup < 0.1 * out.M_cap;
        out.all_positive = true;
        out.monotone_sup = true;
        out.bounded = true;
        for (std::size_t i = 0; i < out.points.size(); ++i) {
            out.all_positive = out.all_positive && out.points[i].positive;
            out.bounded = out.bounded && out.points[i].solution_norm_sup <= out.M_cap + 1e-6;
            if (i > 0)
                out.monotone_sup = out.monotone_sup && (out.points[i].solution_norm_sup >
                                                        out.points[i - 1].solution_norm_sup);
        }
        out.pass = !out.lost && out.origin_small && out.all_positive && out.monotone_sup && out.bounded;
    }
    return out;
}

} // namespace nll
