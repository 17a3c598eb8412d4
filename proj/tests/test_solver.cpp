#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nll/solver.hpp"
#include "oracle_shooting.hpp"

using namespace nll;
using Catch::Approx;

namespace {

ProblemParams canonical(int n, double lambda_factor, double alpha, double p_exp = 2.0) {
    ProblemParams p;
    p.domain = Domain::interval(0, 1);
    p.n = n;
    p.gamma = 1.0;
    p.p = p_exp;
    p.kernel = KernelSpec::constant_kernel(1.0);
    p.flow = FlowSpec::constant({alpha});
    const Grid& g = shared_grid(p.domain, p.n);
    p.lambda = lambda_factor * principal_eigenpair_cached(g).lambda1;
    return p;
}

} // namespace

TEST_CASE("build_subsolution: certified eps phi1^a") {
    SECTION("lambda = 2 lambda1, no flow: a = 1.5 and nonpositive residual") {
        ProblemParams p = canonical(127, 2.0, 0.0);
        Assembled asmb = assemble(p);
        SubsolutionResult sub = build_subsolution(p, asmb);
        CHECK(sub.a == Approx(1.5).margin(1e-12));
        CHECK(sub.certified);
        CHECK(sub.epsilon > 0.0);
        Field res = residual_raw(sub.field, p, asmb.W);
        for (int k : asmb.grid->interior_nodes) CHECK(res[k] <= 1e-10);
        for (int k : asmb.grid->interior_nodes) CHECK(sub.field[k] > 0.0);
    }
    SECTION("lambda = lambda1: no admissible a") {
        ProblemParams p = canonical(127, 1.0, 0.0);
        Assembled asmb = assemble(p);
        CHECK_THROWS_AS(build_subsolution(p, asmb), NoSubsolutionError);
    }
    SECTION("p = 2 admits strong flows: |alpha| = 10 certifies") {
        ProblemParams p = canonical(127, 2.0, 10.0, 2.0);
        Assembled asmb = assemble(p);
        SubsolutionResult sub = build_subsolution(p, asmb);
        CHECK(sub.certified);
        Field res = residual_raw(sub.field, p, asmb.W);
        for (int k : asmb.grid->interior_nodes) CHECK(res[k] <= 1e-10);
    }
}

TEST_CASE("build_supersolution: the constant (lambda/k0)^(1/gamma)") {
    SECTION("K = 1, lambda = 2, gamma = 1 gives M = 2") {
        ProblemParams p = canonical(63, 1.0, 0.0);
        p.lambda = 2.0;
        Assembled asmb = assemble(p);
        SupersolutionResult sup = build_supersolution(p, asmb);
        CHECK(sup.M == Approx(2.0).margin(1e-9));
        CHECK(sup.certified);
    }
    SECTION("K = 1, lambda = 4, gamma = 2 gives M = 2") {
        ProblemParams p = canonical(63, 1.0, 0.0);
        p.lambda = 4.0;
        p.gamma = 2.0;
        Assembled asmb = assemble(p);
        SupersolutionResult sup = build_supersolution(p, asmb);
        CHECK(sup.M == Approx(2.0).margin(1e-9));
        CHECK(sup.certified);
    }
    SECTION("ball-indicator kernel uses the computed row-mass minimum") {
        ProblemParams p = canonical(127, 1.0, 0.0);
        p.lambda = 3.0;
        p.gamma = 1.5;
        p.kernel = KernelSpec::ball_indicator(0.25, 1.0);
        Assembled asmb = assemble(p);
        SupersolutionResult sup = build_supersolution(p, asmb);
        CHECK(sup.M == Approx(std::pow(3.0 / asmb.W.k0, 1.0 / 1.5)).margin(1e-12));
        CHECK(sup.certified);
    }
    SECTION("k0 = 0 refuses (no positive row-mass bound)") {
        ProblemParams p = canonical(31, 1.0, 0.0);
        p.lambda = 2.0;
        const Grid& g = shared_grid(p.domain, p.n);
        p.kernel = KernelSpec::table_kernel(
            std::vector<std::vector<double>>(g.node_count(), std::vector<double>(g.node_count(), 0.0)));
        Assembled asmb = assemble(p);
        CHECK_THROWS_AS(build_supersolution(p, asmb), NoSupersolutionError);
    }
    SECTION("lambda <= 0 refuses") {
        ProblemParams p = canonical(31, 1.0, 0.0);
        p.lambda = -1.0;
        Assembled asmb = assemble(p);
        CHECK_THROWS_AS(build_supersolution(p, asmb), NoSupersolutionError);
    }
}

TEST_CASE("solve_positive") {
    SECTION("subcritical lambda collapses to the trivial branch") {
        ProblemParams p = canonical(127, 0.5, 0.0);
        SolveReport rep = solve_positive(p);
        CHECK(rep.converged);
        CHECK(sup_norm(rep.solution) == 0.0);
        CHECK(rep.residual_inf == 0.0);
        CHECK_FALSE(rep.positive);
    }
    SECTION("canonical supercritical case: bracketed positive solution, oracle checked") {
        ProblemParams p = canonical(255, 2.0, 1.0, 2.0);
        SolveReport rep = solve_positive(p);
        REQUIRE(rep.converged);
        CHECK(rep.residual_inf <= 1e-8);
        CHECK(rep.positive);
        REQUIRE(rep.bracket.has_value());
        CHECK(rep.bracket_satisfied);
        CHECK(rep.apriori_bound_ok);

        oracle::ShootingProblem pb;
        pb.lambda = p.lambda;
        pb.alpha = 1.0;
        pb.p = 2.0;
        auto osol = oracle::solve_positive_shooting(pb);
        const Grid& g = *rep.solution.grid;
        double dist = 0.0;
        for (std::size_t k = 0; k < g.node_count(); ++k)
            dist = std::max(dist, std::abs(rep.solution[k] - osol.at(g.x(k))));
        CHECK(dist <= 1e-3);
    }
    SECTION("alpha = 0 matches the oracle (classical nonlocal logistic)") {
        ProblemParams p = canonical(255, 2.0, 0.0, 2.0);
        SolveReport rep = solve_positive(p);
        REQUIRE(rep.converged);
        oracle::ShootingProblem pb;
        pb.lambda = p.lambda;
        pb.alpha = 0.0;
        auto osol = oracle::solve_positive_shooting(pb);
        // closed form at alpha = 0: amplitude pi (lambda - pi^2) / 2
        CHECK(osol.sup == Approx(kPi * (p.lambda - kPi * kPi) / 2.0).epsilon(1e-9));
        const Grid& g = *rep.solution.grid;
        double dist = 0.0;
        for (std::size_t k = 0; k < g.node_count(); ++k)
            dist = std::max(dist, std::abs(rep.solution[k] - osol.at(g.x(k))));
        CHECK(dist <= 1e-3);
    }
    SECTION("determinism: identical params give bitwise-identical reports") {
        ProblemParams p = canonical(63, 2.0, 1.0, 2.0);
        SolveReport a = solve_positive(p);
        SolveReport b = solve_positive(p);
        REQUIRE(a.solution.size() == b.solution.size());
        for (std::size_t k = 0; k < a.solution.size(); ++k)
            CHECK(a.solution[k] == b.solution[k]);
        CHECK(a.residual_inf == b.residual_inf);
        CHECK(a.march_iterations == b.march_iterations);
        CHECK(a.newton_iterations == b.newton_iterations);
    }
    SECTION("a priori bound over a lambda grid") {
        const double Lambda_factor = 3.0;
        ProblemParams probe = canonical(127, Lambda_factor, 1.0, 2.0);
        const double M_cap = std::pow(probe.lambda / 1.0, 1.0); // k0 = 1, gamma = 1
        for (double f : {1.2, 1.5, 2.0, 3.0}) {
            ProblemParams p = canonical(127, f, 1.0, 2.0);
            SolveReport rep = solve_positive(p);
            REQUIRE(rep.converged);
            CHECK(sup_norm(rep.solution) <= M_cap + 1e-6);
            CHECK(rep.apriori_bound_ok);
        }
    }
    SECTION("reaction-term scaling consistency under phi homogeneity") {
        ProblemParams p = canonical(63, 2.0, 0.0, 2.0);
        p.gamma = 1.5;
        Assembled asmb = assemble(p);
        const Grid& g = *asmb.grid;
        Field u = field_from(g, [](double x) { return 0.4 + 0.3 * std::sin(3.0 * x); });
        const double t = 1.7;
        Field ut(g);
        for (std::size_t k = 0; k < g.node_count(); ++k) ut[k] = t * u[k];
        Field pht = phi(ut, p.gamma, asmb.W);
        Field ph = phi(u, p.gamma, asmb.W);
        double worst = 0.0;
        for (std::size_t k = 0; k < g.node_count(); ++k) {
            const double direct = (p.lambda - pht[k]) * ut[k];
            const double scaled = t * (p.lambda - std::pow(t, p.gamma) * ph[k]) * u[k];
            worst = std::max(worst, std::abs(direct - scaled));
        }
        CHECK(worst <= 1e-12 * (1.0 + p.lambda) * (1.0 + t));
    }
}

TEST_CASE("verify_solution") {
    SECTION("the zero field: residual 0, not positive") {
        ProblemParams p = canonical(63, 2.0, 0.0);
        const Grid& g = shared_grid(p.domain, p.n);
        VerifyReport v = verify_solution(Field(g), p);
        CHECK(v.residual_inf == 0.0);
        CHECK_FALSE(v.positive);
        CHECK(v.is_solution);
    }
    SECTION("a converged report passes every check") {
        ProblemParams p = canonical(127, 2.0, 1.0, 2.0);
        SolveReport rep = solve_positive(p);
        REQUIRE(rep.converged);
        VerifyReport v = verify_solution(rep.solution, p);
        CHECK(v.is_solution);
        CHECK(v.positive);
        CHECK(v.apriori_ok);
        CHECK(v.boundary_max == 0.0);
    }
    SECTION("twice the carrying capacity is flagged as not a solution") {
        ProblemParams p = canonical(63, 2.0, 0.0);
        const Grid& g = shared_grid(p.domain, p.n);
        Assembled asmb = assemble(p);
        SupersolutionResult sup = build_supersolution(p, asmb);
        Field u(g, 2.0 * sup.M);
        zero_boundary(u);
        VerifyReport v = verify_solution(u, p);
        CHECK_FALSE(v.is_solution);
        CHECK_FALSE(v.apriori_ok);
        // strictly above the supersolution level the inequality is strict:
        // the residual of the constant 2M is positive in the interior
        Field res = residual_raw(sup.field, p, asmb.W);
        double worst = 1e300;
        for (int k : g.interior_nodes) worst = std::min(worst, res[k]);
        CHECK(worst >= -1e-10);
    }
}

TEST_CASE("detect_nonexistence") {
    SECTION("starts < 3 rejected") {
        ProblemParams p = canonical(63, 0.5, 0.0);
        CHECK_THROWS_AS(detect_nonexistence(p, 2), std::invalid_argument);
    }
    SECTION("lambda below lambda1: every start collapses") {
        ProblemParams p = canonical(127, 1.0, 0.0, 1.0);
        p.lambda -= 0.5;
        NonexistenceVerdict v = detect_nonexistence(p, 5, 1);
        CHECK(v.no_positive_found);
        for (double s : v.final_sup_norms) CHECK(s < 1e-6);
    }
    SECTION("p = 1 with flow far above the test-function bound") {
        ProblemParams p = canonical(127, 2.0, 0.0, 1.0);
        const double bound = p.lambda * (p.domain.length(0) + 1.0);
        p.flow = FlowSpec::constant({2.0 * bound});
        NonexistenceVerdict v = detect_nonexistence(p, 3, 1);
        CHECK(v.bound_applicable);
        REQUIRE(v.alpha_bounds.size() == 1);
        CHECK(v.alpha_bounds[0] == Approx(bound).margin(1e-12));
        CHECK(v.alpha_bound_violated);
        CHECK(v.no_positive_found);
    }
    SECTION("p = 2 supercritical: a positive solution is found, verdict negative") {
        ProblemParams p = canonical(127, 2.0, 1.0, 2.0);
        NonexistenceVerdict v = detect_nonexistence(p, 3, 1);
        CHECK_FALSE(v.no_positive_found);
    }
    SECTION("determinism with a fixed seed") {
        ProblemParams p = canonical(63, 0.8, 0.5, 1.0);
        NonexistenceVerdict a = detect_nonexistence(p, 4, 7);
        NonexistenceVerdict b = detect_nonexistence(p, 4, 7);
        REQUIRE(a.final_sup_norms.size() == b.final_sup_norms.size());
        for (std::size_t i = 0; i < a.final_sup_norms.size(); ++i)
            CHECK(a.final_sup_norms[i] == b.final_sup_norms[i]);
    }
}
