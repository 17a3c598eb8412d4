#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nll/experiments.hpp"

using namespace nll;
using Catch::Approx;

namespace {

ProblemParams small_base(double p_exp = 2.0, double alpha = 1.0, int n = 63) {
    ProblemParams p;
    p.domain = Domain::interval(0, 1);
    p.n = n;
    p.gamma = 1.0;
    p.p = p_exp;
    p.kernel = KernelSpec::constant_kernel(1.0);
    p.flow = FlowSpec::constant({alpha});
    return p;
}

double lambda1_of(const ProblemParams& p) {
    return principal_eigenpair_cached(shared_grid(p.domain, p.n)).lambda1;
}

} // namespace

TEST_CASE("threshold_bisect") {
    SECTION("degenerate range rejected") {
        ProblemParams base = small_base();
        base.lambda = 1.0;
        CHECK_THROWS_AS(threshold_bisect(base, 5.0, 5.0), PreconditionError);
    }
    SECTION("threshold sits at the discrete lambda1") {
        ProblemParams base = small_base(2.0, 1.0, 63);
        const double l1 = lambda1_of(base);
        ThresholdResult res = threshold_bisect(base, 0.5 * l1, 2.0 * l1, 3, 1);
        CHECK(std::abs(res.lambda_star - l1) <= 0.05 * l1);
        CHECK(res.lambda1 == Approx(l1));
        CHECK(res.probes.size() >= 3);
    }
}

TEST_CASE("sweep_alpha_to_zero") {
    SECTION("values must be strictly decreasing") {
        SweepSpec spec;
        spec.base = small_base();
        spec.base.lambda = 2.0 * lambda1_of(spec.base);
        spec.values = {0.5, 1.0};
        CHECK_THROWS_AS(sweep_alpha_to_zero(spec), PreconditionError);
    }
    SECTION("lambda <= lambda1 rejected") {
        SweepSpec spec;
        spec.base = small_base();
        spec.base.lambda = 0.5 * lambda1_of(spec.base);
        spec.values = {1.0, 0.5};
        CHECK_THROWS_AS(sweep_alpha_to_zero(spec), PreconditionError);
    }
    SECTION("p = 1 at lambda = 2 lambda1: decreasing with factor 10") {
        SweepSpec spec;
        spec.base = small_base(1.0);
        spec.base.lambda = 2.0 * lambda1_of(spec.base);
        spec.values = {1.0, 0.5, 0.25, 0.125, 0.0625};
        AlphaZeroSweep sw = sweep_alpha_to_zero(spec);
        CHECK(sw.pass);
        CHECK(sw.strictly_decreasing);
        CHECK(sw.final_small);
        CHECK_FALSE(sw.aborted);
    }
    SECTION("an |alpha| = 0 entry has distance exactly 0") {
        SweepSpec spec;
        spec.base = small_base(1.0);
        spec.base.lambda = 1.5 * lambda1_of(spec.base);
        spec.values = {0.5, 0.25, 0.0};
        AlphaZeroSweep sw = sweep_alpha_to_zero(spec);
        REQUIRE(sw.rows.size() == 3);
        CHECK(sw.rows.back().alpha == 0.0);
        CHECK(sw.rows.back().sup_distance == 0.0);
        CHECK(sw.rows.back().c1_distance == 0.0);
    }
    SECTION("warm-start independence of distances") {
        SweepSpec spec;
        spec.base = small_base(1.0);
        spec.base.lambda = 1.5 * lambda1_of(spec.base);
        spec.values = {0.5, 0.25, 0.125};
        AlphaZeroSweep warm = sweep_alpha_to_zero(spec);
        spec.warm_start = false;
        AlphaZeroSweep cold = sweep_alpha_to_zero(spec);
        REQUIRE(warm.rows.size() == cold.rows.size());
        for (std::size_t i = 0; i < warm.rows.size(); ++i)
            CHECK(std::abs(warm.rows[i].c1_distance - cold.rows[i].c1_distance) <= 1e-6);
    }
    SECTION("sweep determinism") {
        SweepSpec spec;
        spec.base = small_base(2.0);
        spec.base.lambda = 1.2 * lambda1_of(spec.base);
        spec.values = {0.5, 0.25};
        AlphaZeroSweep a = sweep_alpha_to_zero(spec);
        AlphaZeroSweep b = sweep_alpha_to_zero(spec);
        REQUIRE(a.rows.size() == b.rows.size());
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            CHECK(a.rows[i].sup_distance == b.rows[i].sup_distance);
            CHECK(a.rows[i].c1_distance == b.rows[i].c1_distance);
        }
    }
}

TEST_CASE("sweep_alpha_to_infinity") {
    SECTION("p = 1 rejected (decay requires p > 1)") {
        SweepSpec spec;
        spec.base = small_base(1.0);
        spec.base.lambda = 2.0 * lambda1_of(spec.base);
        spec.values = {1.0, 2.0};
        CHECK_THROWS_AS(sweep_alpha_to_infinity(spec), PreconditionError);
    }
    SECTION("single-value sweep: one row, no monotonicity verdict") {
        SweepSpec spec;
        spec.base = small_base(2.0);
        spec.base.lambda = 2.0 * lambda1_of(spec.base);
        spec.values = {1.0};
        AlphaInfinitySweep sw = sweep_alpha_to_infinity(spec);
        REQUIRE(sw.rows.size() == 1);
        CHECK_FALSE(sw.has_monotonicity_verdict);
        CHECK(sw.rows[0].bound_ok);
    }
    SECTION("short ascending sweep decays and satisfies the proof bound") {
        SweepSpec spec;
        spec.base = small_base(2.0);
        spec.base.lambda = 2.0 * lambda1_of(spec.base);
        spec.values = {1.0, 2.0, 4.0, 8.0};
        AlphaInfinitySweep sw = sweep_alpha_to_infinity(spec);
        CHECK(sw.strictly_decreasing);
        CHECK(sw.bounds_ok);
        CHECK(sw.xi_sup == Approx(2.0)); // R = width + 1 on (0,1)
    }
}

TEST_CASE("estimate_alpha_nonexistence_p1") {
    SECTION("p = 2 rejected") {
        ProblemParams base = small_base(2.0);
        base.lambda = 2.0 * lambda1_of(base);
        CHECK_THROWS_AS(estimate_alpha_nonexistence_p1(base, {1.0, 2.0}), PreconditionError);
    }
    SECTION("analytic bound arithmetic and scan consistency") {
        ProblemParams base = small_base(1.0, 0.0, 63);
        const double l1 = lambda1_of(base);
        base.lambda = 2.0 * l1;
        AlphaNonexistenceScan scan = estimate_alpha_nonexistence_p1(base, {8.0, 48.0}, 3, 1);
        CHECK(scan.analytic_bound == Approx(2.0 * l1 * 2.0).margin(1e-9));
        CHECK(scan.consistent); // everything beyond the bound collapsed
        REQUIRE(scan.scans.size() == 2);
        CHECK(scan.scans[1].second); // 48 > bound ~ 39.5 must collapse
    }
}

TEST_CASE("sweep_p_to_one") {
    SECTION("p list containing 1.0 rejected") {
        SweepSpec spec;
        spec.base = small_base(2.0);
        spec.base.lambda = 2.0 * lambda1_of(spec.base);
        spec.values = {1.5, 1.0};
        CHECK_THROWS_AS(sweep_p_to_one(spec), PreconditionError);
    }
    SECTION("lambda outside (lambda1, lambda1[L_alpha]) names both eigenvalues") {
        SweepSpec spec;
        spec.base = small_base(2.0, 1.0);
        const Grid& g = shared_grid(spec.base.domain, spec.base.n);
        const double l1 = principal_eigenpair_cached(g).lambda1;
        const double l1a = principal_eigenvalue_advection_cached(g, spec.base.flow);
        spec.base.lambda = 2.0 * l1a;
        spec.values = {1.5, 1.25};
        try {
            sweep_p_to_one(spec);
            FAIL("expected PreconditionError");
        } catch (const PreconditionError& e) {
            const std::string msg = e.what();
            CHECK(msg.find(format_double(l1)) != std::string::npos);
            CHECK(msg.find(format_double(l1a)) != std::string::npos);
        }
    }
    SECTION("distances decrease toward the p = 1 limit") {
        SweepSpec spec;
        spec.base = small_base(2.0, 1.0, 63);
        const Grid& g = shared_grid(spec.base.domain, spec.base.n);
        const double l1 = principal_eigenpair_cached(g).lambda1;
        const double l1a = principal_eigenvalue_advection_cached(g, spec.base.flow);
        spec.base.lambda = 0.5 * (l1 + l1a);
        spec.values = {1.5, 1.25, 1.125};
        PToOneSweep sw = sweep_p_to_one(spec);
        REQUIRE_FALSE(sw.aborted);
        REQUIRE(sw.rows.size() == 3);
        CHECK(sw.strictly_decreasing);
    }
}

TEST_CASE("divergence_free_case") {
    Domain sq = Domain::rectangle(0, 1, 0, 1);
    const Grid& g = shared_grid(sq, 15);
    const double l1 = principal_eigenpair_cached(g).lambda1;

    SECTION("constant flows are not field flows") {
        ProblemParams p = small_base(2.0);
        p.domain = sq;
        p.n = 15;
        p.flow = FlowSpec::constant({1.0, 0.0});
        p.lambda = l1 + 1.0;
        CHECK_THROWS_AS(divergence_free_case(p), PreconditionError);
    }
    SECTION("alpha = (x, 0) rejected: div = 1") {
        std::vector<std::vector<double>> f(2, std::vector<double>(g.node_count(), 0.0));
        for (std::size_t k = 0; k < g.node_count(); ++k) f[0][k] = g.x(k);
        ProblemParams p = small_base(2.0);
        p.domain = sq;
        p.n = 15;
        p.flow = FlowSpec::of_fields(f);
        p.lambda = l1 + 1.0;
        try {
            divergence_free_case(p);
            FAIL("expected PreconditionError");
        } catch (const PreconditionError& e) {
            CHECK(std::string(e.what()).find("1") != std::string::npos);
        }
    }
    SECTION("rotational flow solves; c = 0 reduces to alpha = 0 exactly") {
        ProblemParams p = small_base(2.0);
        p.domain = sq;
        p.n = 15;
        p.flow = FlowSpec::rotational(g, 2.0);
        p.lambda = l1 + 1.0;
        DivFreeResult r = divergence_free_case(p);
        CHECK(r.max_divergence <= 1e-12);
        CHECK(r.verdict);
        CHECK(r.report.positive);

        ProblemParams p0 = p;
        p0.flow = FlowSpec::rotational(g, 0.0);
        DivFreeResult r0 = divergence_free_case(p0);
        ProblemParams pz = p;
        pz.flow = FlowSpec::constant({0.0, 0.0});
        SolveReport rz = solve_positive(pz);
        CHECK(sup_distance(r0.report.solution, rz.solution) == 0.0);
    }
}

TEST_CASE("trace_branch") {
    ProblemParams base = small_base(2.0, 0.0, 63);
    const double l1 = lambda1_of(base);

    SECTION("first lambda must exceed lambda1") {
        CHECK_THROWS_AS(trace_branch(base, {l1 - 0.1, l1 + 0.5}), PreconditionError);
        CHECK_THROWS_AS(trace_branch(base, {}), PreconditionError);
    }
    SECTION("1D branch grows monotonically from near zero") {
        std::vector<double> lambdas;
        for (int i = 1; i <= 5; ++i) lambdas.push_back(l1 + 0.4 * i);
        BranchResult br = trace_branch(base, lambdas);
        CHECK_FALSE(br.lost);
        CHECK(br.origin_small);
        CHECK(br.all_positive);
        CHECK(br.monotone_sup);
        CHECK(br.bounded);
        CHECK(br.pass);
        // branch-point consistency: positive points satisfy the solver bracket
        for (const auto& bp : br.points) {
            CHECK(bp.converged);
            if (bp.positive) {
                CHECK(bp.bracket_ok);
                CHECK(bp.residual_inf <= 1e-8);
            }
        }
    }
}
