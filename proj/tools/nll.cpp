// Command-line laboratory for the nonlocal logistic equation with nonlinear
// advection. Subcommands cover the principal eigenvalues, single solves, and
// the asymptotic experiments; every run emits CSV tables, a JSON manifest and
// an SVG plot under the output directory.
//
// Exit codes: 0 all verdicts pass, 1 verdict failure, 2 usage/config error,
// 3 numerical nonconvergence.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "nll/config.hpp"
#include "nll/csv.hpp"
#include "nll/experiments.hpp"
#include "nll/manifest.hpp"
#include "nll/solver.hpp"
#include "nll/svg.hpp"

namespace fs = std::filesystem;
using namespace nll;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNonconvergence = 3;

struct Ctx {
    RunConfig cfg;
    fs::path out_root;

    fs::path dir(const std::string& sub) const {
        fs::path d = out_root / sub;
        fs::create_directories(d);
        return d;
    }
};

std::string rel(const fs::path& root, const fs::path& p) {
    return fs::relative(p, root).string();
}

/// Midline profile of a field: the whole field in 1D, the row y = mid in 2D.
std::vector<std::pair<double, double>> profile(const Field& f) {
    const Grid& g = *f.grid;
    std::vector<std::pair<double, double>> pts;
    if (g.dim() == 1) {
        for (std::size_t k = 0; k < g.node_count(); ++k) pts.emplace_back(g.x(k), f[k]);
    } else {
        const int m = g.nodes_per_axis();
        const int iy = m / 2;
        for (int ix = 0; ix < m; ++ix) {
            const std::size_t k = g.at(ix, iy);
            pts.emplace_back(g.x(k), f[k]);
        }
    }
    return pts;
}

ProblemParams sweep_base(const Ctx& ctx, double p_exponent, double lambda_rel, double alpha1) {
    ProblemParams params = ctx.cfg.params();
    params.p = p_exponent;
    const Grid& g = shared_grid(params.domain, params.n);
    params.lambda = lambda_rel * principal_eigenpair_cached(g).lambda1;
    std::vector<double> comps(params.domain.dim(), 0.0);
    comps[0] = alpha1;
    params.flow = FlowSpec::constant(comps);
    return params;
}

ProblemParams planar_rotational(const Ctx& ctx, int n, double strength, double lambda_offset) {
    ProblemParams params;
    params.domain = Domain::rectangle(0, 1, 0, 1);
    params.n = n;
    params.gamma = ctx.cfg.gamma;
    params.p = 2.0;
    params.kernel = ctx.cfg.kernel();
    const Grid& g = shared_grid(params.domain, params.n);
    params.flow = FlowSpec::rotational(g, strength);
    params.lambda = principal_eigenpair_cached(g).lambda1 + lambda_offset;
    return params;
}

int run_eig(const Ctx& ctx) {
    const fs::path d = ctx.dir("eig");
    const ProblemParams params = ctx.cfg.params();
    const Grid& g = shared_grid(params.domain, params.n);
    const EigenPair& ep = principal_eigenpair_cached(g);

    Manifest man(ctx.cfg, "eig");
    man.resolved("lambda1", ep.lambda1);
    std::cout << "lambda1 = " << format_double(ep.lambda1) << "\n";
    if (!params.flow.is_zero()) {
        const double la = principal_eigenvalue_advection_cached(g, params.flow);
        man.resolved("lambda1_L_alpha", la);
        std::cout << "lambda1[L_alpha] = " << format_double(la) << "\n";
    }
    write_field_csv(ep.phi1, (d / "phi1.csv").string());
    man.artifact(rel(ctx.out_root, d / "phi1.csv"));
    emit_plot({{"phi1", profile(ep.phi1)}}, {"principal eigenfunction", "x", "phi1"},
              (d / "phi1.svg").string());
    man.artifact(rel(ctx.out_root, d / "phi1.svg"));
    man.verdict("computed", true);
    man.write((d / "manifest.json").string());
    return kExitPass;
}

int run_solve(const Ctx& ctx) {
    const fs::path d = ctx.dir("solve");
    ProblemParams params = ctx.cfg.params();
    Assembled asmb = assemble(params);
    SolveOptions opts;
    opts.residual_tol = ctx.cfg.residual_tol;
    const SolveReport rep = solve_positive(params, asmb, opts);

    Manifest man(ctx.cfg, "solve");
    man.resolved("lambda", params.lambda);
    man.resolved("lambda1", rep.lambda1);
    man.resolved("k0", asmb.W.k0);
    if (rep.M) man.resolved("M", *rep.M);
    if (rep.bracket) {
        man.resolved("epsilon", rep.bracket->epsilon);
        man.resolved("a", rep.bracket->a);
    }
    man.note_solve("solve", rep);
    man.work("march_iterations", rep.march_iterations);
    man.work("newton_iterations", rep.newton_iterations);
    write_field_csv(rep.solution, (d / "solution.csv").string());
    man.artifact(rel(ctx.out_root, d / "solution.csv"));
    emit_plot({{"u", profile(rep.solution)}}, {"computed solution", "x", "u"},
              (d / "solution.svg").string());
    man.artifact(rel(ctx.out_root, d / "solution.svg"));
    man.write((d / "manifest.json").string());

    std::cout << "converged = " << (rep.converged ? "yes" : "no")
              << ", residual_inf = " << format_double(rep.residual_inf)
              << ", positive = " << (rep.positive ? "yes" : "no") << "\n";
    return rep.converged ? kExitPass : kExitNonconvergence;
}

int run_verify(const Ctx& ctx, const std::string& solution_path) {
    const fs::path d = ctx.dir("verify");
    ProblemParams params = ctx.cfg.params();
    const Grid& g = shared_grid(params.domain, params.n);
    Field u = read_field_csv(g, solution_path);
    const VerifyReport v = verify_solution(u, params, ctx.cfg.residual_tol);

    Manifest man(ctx.cfg, "verify");
    Json j;
    j["residual_inf"] = v.residual_inf;
    j["min_interior"] = v.min_interior;
    j["boundary_max"] = v.boundary_max;
    j["sup"] = v.sup;
    if (v.M) j["M"] = *v.M;
    j["apriori_ok"] = v.apriori_ok;
    j["positive"] = v.positive;
    j["is_solution"] = v.is_solution;
    man.verdict("verify", j);
    man.write((d / "manifest.json").string());

    std::cout << "residual_inf = " << format_double(v.residual_inf)
              << ", min_interior = " << format_double(v.min_interior)
              << ", is_solution = " << (v.is_solution ? "yes" : "no") << "\n";
    return v.is_solution ? kExitPass : kExitVerdict;
}

int run_threshold(const Ctx& ctx) {
    const fs::path d = ctx.dir("threshold");
    ProblemParams base = ctx.cfg.params();
    const Grid& g = shared_grid(base.domain, base.n);
    const double l1 = principal_eigenpair_cached(g).lambda1;
    const ThresholdResult res = threshold_bisect(base, ctx.cfg.threshold_lo_rel * l1,
                                                 ctx.cfg.threshold_hi_rel * l1, ctx.cfg.starts,
                                                 ctx.cfg.seed);
    const bool pass = std::abs(res.lambda_star - l1) <= 0.05 * l1;

    CsvTable table;
    table.header = {"lambda", "positive_solution_found"};
    std::vector<std::pair<double, double>> pts;
    for (const auto& [lam, found] : res.probes) {
        table.rows.push_back({lam, found ? 1.0 : 0.0});
        pts.emplace_back(lam, found ? 1.0 : 0.0);
    }
    write_text_file((d / "probes.csv").string(), table.to_csv());
    emit_plot({{"found", pts}}, {"existence threshold probes", "lambda", "positive solution"},
              (d / "probes.svg").string());

    Manifest man(ctx.cfg, "threshold");
    man.resolved("lambda1", l1);
    man.resolved("lambda_star", res.lambda_star);
    man.verdict("threshold_matches_lambda1", pass);
    man.artifact(rel(ctx.out_root, d / "probes.csv"));
    man.artifact(rel(ctx.out_root, d / "probes.svg"));
    man.write((d / "manifest.json").string());
    std::cout << "lambda_star = " << format_double(res.lambda_star)
              << " (lambda1 = " << format_double(l1) << ")\n";
    return pass ? kExitPass : kExitVerdict;
}

int run_alpha0(const Ctx& ctx, double p_exponent, const std::string& name) {
    const fs::path d = ctx.dir(name);
    SweepSpec spec;
    spec.base = sweep_base(ctx, p_exponent, ctx.cfg.alpha0_lambda_rel, 1.0);
    spec.values = ctx.cfg.alpha0_values;
    spec.seed = ctx.cfg.seed;
    const AlphaZeroSweep sw = sweep_alpha_to_zero(spec, ctx.cfg.decay_alpha0);

    CsvTable table;
    table.header = {"alpha", "sup_distance", "c1_distance", "converged"};
    std::vector<std::pair<double, double>> sup_pts, c1_pts;
    for (const auto& r : sw.rows) {
        table.rows.push_back({r.alpha, r.sup_distance, r.c1_distance, r.converged ? 1.0 : 0.0});
        sup_pts.emplace_back(r.alpha, r.sup_distance);
        c1_pts.emplace_back(r.alpha, r.c1_distance);
    }
    write_text_file((d / "sweep.csv").string(), table.to_csv());
    emit_plot({{"sup distance", sup_pts}, {"C1 distance", c1_pts}},
              {"distance to the alpha = 0 solution", "alpha", "distance", true, true},
              (d / "sweep.svg").string());

    Manifest man(ctx.cfg, name);
    man.verdict("strictly_decreasing", sw.strictly_decreasing);
    man.verdict("final_small", sw.final_small);
    man.verdict("aborted", sw.aborted);
    man.verdict("pass", sw.pass);
    man.artifact(rel(ctx.out_root, d / "sweep.csv"));
    man.artifact(rel(ctx.out_root, d / "sweep.svg"));
    man.write((d / "manifest.json").string());
    std::cout << name << ": pass = " << (sw.pass ? "yes" : "no") << "\n";
    if (sw.aborted) return kExitNonconvergence;
    return sw.pass ? kExitPass : kExitVerdict;
}

int run_alphainf(const Ctx& ctx) {
    const fs::path d = ctx.dir("sweep-alphainf");
    SweepSpec spec;
    spec.base = sweep_base(ctx, std::max(ctx.cfg.p, 2.0), ctx.cfg.alphainf_lambda_rel, 1.0);
    spec.values = ctx.cfg.alphainf_values;
    spec.seed = ctx.cfg.seed;
    const AlphaInfinitySweep sw = sweep_alpha_to_infinity(spec, ctx.cfg.decay_alphainf);

    CsvTable table;
    table.header = {"alpha", "sup_norm", "integral_u_p", "bound", "converged"};
    std::vector<std::pair<double, double>> sup_pts, int_pts, bound_pts;
    for (const auto& r : sw.rows) {
        table.rows.push_back({r.alpha, r.sup, r.integral_up, r.bound, r.converged ? 1.0 : 0.0});
        sup_pts.emplace_back(r.alpha, r.sup);
        int_pts.emplace_back(r.alpha, r.integral_up);
        bound_pts.emplace_back(r.alpha, r.bound);
    }
    write_text_file((d / "sweep.csv").string(), table.to_csv());
    emit_plot({{"sup norm", sup_pts}}, {"decay of the solution", "alpha", "sup norm", true, true},
              (d / "decay.svg").string());
    emit_plot({{"integral u^p", int_pts}, {"analytic bound", bound_pts}},
              {"proof bound", "alpha", "integral", true, true}, (d / "bound.svg").string());

    Manifest man(ctx.cfg, "sweep-alphainf");
    man.resolved("xi_sup", sw.xi_sup);
    man.resolved("M", sw.M);
    man.verdict("strictly_decreasing", sw.strictly_decreasing);
    man.verdict("bounds_ok", sw.bounds_ok);
    man.verdict("final_small", sw.final_small);
    man.verdict("pass", sw.pass);
    man.artifact(rel(ctx.out_root, d / "sweep.csv"));
    man.artifact(rel(ctx.out_root, d / "decay.svg"));
    man.artifact(rel(ctx.out_root, d / "bound.svg"));
    man.write((d / "manifest.json").string());
    std::cout << "sweep-alphainf: pass = " << (sw.pass ? "yes" : "no") << "\n";
    bool all_converged = true;
    for (const auto& r : sw.rows) all_converged = all_converged && r.converged;
    if (!all_converged) return kExitNonconvergence;
    return sw.pass ? kExitPass : kExitVerdict;
}

int run_sweep_p(const Ctx& ctx) {
    const fs::path d = ctx.dir("sweep-p");
    SweepSpec spec;
    spec.base = ctx.cfg.params();
    std::vector<double> comps(spec.base.domain.dim(), 0.0);
    comps[0] = ctx.cfg.p_sweep_alpha;
    spec.base.flow = FlowSpec::constant(comps);
    const Grid& g = shared_grid(spec.base.domain, spec.base.n);
    const double l1 = principal_eigenpair_cached(g).lambda1;
    const double l1a = principal_eigenvalue_advection_cached(g, spec.base.flow);
    spec.base.lambda = 0.5 * (l1 + l1a);
    spec.values = ctx.cfg.p_values;
    spec.seed = ctx.cfg.seed;
    const PToOneSweep sw = sweep_p_to_one(spec, ctx.cfg.decay_p);

    CsvTable table;
    table.header = {"p", "sup_distance", "c1_distance"};
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : sw.rows) {
        table.rows.push_back({r.p, r.sup_distance, r.c1_distance});
        pts.emplace_back(r.p, r.c1_distance);
    }
    write_text_file((d / "sweep.csv").string(), table.to_csv());
    emit_plot({{"C1 distance", pts}},
              {"distance to the p = 1 limit", "p", "C1 distance", false, true},
              (d / "sweep.svg").string());

    Manifest man(ctx.cfg, "sweep-p");
    man.resolved("lambda1", sw.lambda1);
    man.resolved("lambda1_L_alpha", sw.lambda1_flow);
    man.resolved("lambda", spec.base.lambda);
    man.resolved("limit_sup", sw.limit_sup);
    man.verdict("strictly_decreasing", sw.strictly_decreasing);
    man.verdict("final_small", sw.final_small);
    man.verdict("aborted", sw.aborted);
    man.verdict("pass", sw.pass);
    man.artifact(rel(ctx.out_root, d / "sweep.csv"));
    man.artifact(rel(ctx.out_root, d / "sweep.svg"));
    man.write((d / "manifest.json").string());
    std::cout << "sweep-p: pass = " << (sw.pass ? "yes" : "no") << "\n";
    if (sw.aborted) return kExitNonconvergence;
    return sw.pass ? kExitPass : kExitVerdict;
}

int run_divfree(const Ctx& ctx) {
    const fs::path d = ctx.dir("divfree");
    const ProblemParams params = planar_rotational(ctx, ctx.cfg.divfree_n, ctx.cfg.divfree_strength,
                                                   ctx.cfg.divfree_lambda_offset);
    const DivFreeResult res = divergence_free_case(params);

    Manifest man(ctx.cfg, "divfree");
    man.resolved("max_divergence", res.max_divergence);
    man.resolved("lambda", params.lambda);
    man.note_solve("divfree", res.report);
    man.verdict("pass", res.verdict);
    write_field_csv(res.report.solution, (d / "solution.csv").string());
    man.artifact(rel(ctx.out_root, d / "solution.csv"));
    emit_plot({{"u(x, 1/2)", profile(res.report.solution)}},
              {"divergence-free flow solution", "x", "u"}, (d / "solution.svg").string());
    man.artifact(rel(ctx.out_root, d / "solution.svg"));
    man.write((d / "manifest.json").string());
    std::cout << "divfree: pass = " << (res.verdict ? "yes" : "no") << "\n";
    if (!res.report.converged) return kExitNonconvergence;
    return res.verdict ? kExitPass : kExitVerdict;
}

int run_branch(const Ctx& ctx) {
    const fs::path d = ctx.dir("branch");
    const ProblemParams base =
        planar_rotational(ctx, ctx.cfg.branch_n, ctx.cfg.divfree_strength, 0.0);
    const Grid& g = shared_grid(base.domain, base.n);
    const double l1 = principal_eigenpair_cached(g).lambda1;
    std::vector<double> lambdas;
    for (int i = 1; i <= ctx.cfg.branch_count; ++i) lambdas.push_back(l1 + i * ctx.cfg.branch_step);
    const BranchResult br = trace_branch(base, lambdas);

    CsvTable table;
    table.header = {"lambda", "sup_norm", "c1_norm", "positive", "converged"};
    std::vector<std::pair<double, double>> sup_pts, c1_pts;
    for (const auto& bp : br.points) {
        table.rows.push_back({bp.lambda, bp.solution_norm_sup, bp.solution_norm_c1,
                              bp.positive ? 1.0 : 0.0, bp.converged ? 1.0 : 0.0});
        sup_pts.emplace_back(bp.lambda, bp.solution_norm_sup);
        c1_pts.emplace_back(bp.lambda, bp.solution_norm_c1);
    }
    write_text_file((d / "branch.csv").string(), table.to_csv());
    emit_plot({{"sup norm", sup_pts}, {"C1 norm", c1_pts}},
              {"positive branch from (lambda1, 0)", "lambda", "norm"}, (d / "branch.svg").string());

    Manifest man(ctx.cfg, "branch");
    man.resolved("lambda1", br.lambda1);
    man.resolved("M_cap", br.M_cap);
    man.verdict("origin_small", br.origin_small);
    man.verdict("all_positive", br.all_positive);
    man.verdict("monotone_sup", br.monotone_sup);
    man.verdict("bounded", br.bounded);
    man.verdict("lost", br.lost);
    man.verdict("pass", br.pass);
    man.artifact(rel(ctx.out_root, d / "branch.csv"));
    man.artifact(rel(ctx.out_root, d / "branch.svg"));
    man.write((d / "manifest.json").string());
    std::cout << "branch: pass = " << (br.pass ? "yes" : "no") << "\n";
    if (br.lost) return kExitNonconvergence;
    return br.pass ? kExitPass : kExitVerdict;
}

int run_all(const Ctx& ctx) {
    struct Step {
        const char* name;
        int code;
    };
    std::vector<Step> steps;
    steps.push_back({"eig", run_eig(ctx)});
    steps.push_back({"solve", run_solve(ctx)});
    steps.push_back({"threshold", run_threshold(ctx)});
    steps.push_back({"sweep-alpha0-p1", run_alpha0(ctx, 1.0, "sweep-alpha0-p1")});
    steps.push_back({"sweep-alpha0-p2", run_alpha0(ctx, 2.0, "sweep-alpha0-p2")});
    steps.push_back({"sweep-alphainf", run_alphainf(ctx)});
    steps.push_back({"sweep-p", run_sweep_p(ctx)});
    steps.push_back({"divfree", run_divfree(ctx)});
    steps.push_back({"branch", run_branch(ctx)});

    Manifest man(ctx.cfg, "all");
    int worst = kExitPass;
    for (const auto& s : steps) {
        man.verdict(s.name, s.code == kExitPass);
        if (s.code == kExitNonconvergence) worst = kExitNonconvergence;
        if (s.code != kExitPass && worst == kExitPass) worst = s.code;
        std::cout << s.name << ": " << (s.code == kExitPass ? "pass" : "FAIL") << "\n";
    }
    man.write((ctx.dir("all") / "manifest.json").string());
    return worst;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nll: a numerical laboratory for the nonlocal logistic equation "
                 "with nonlinear advection"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string solution_path;
    app.add_option("--config", config_path, "configuration file (INI-like sections)");
    app.add_option("--set", overrides, "override a config entry: section.key=value");

    CLI::App* cmd_eig = app.add_subcommand("eig", "principal eigenvalues and eigenfunction");
    CLI::App* cmd_solve = app.add_subcommand("solve", "compute a positive solution");
    CLI::App* cmd_verify = app.add_subcommand("verify", "verify a solution CSV against the config");
    cmd_verify->add_option("--solution", solution_path, "solution CSV to verify")->required();
    CLI::App* cmd_threshold = app.add_subcommand("threshold", "bisect the existence threshold");
    CLI::App* cmd_a0 = app.add_subcommand("sweep-alpha0", "convergence as |alpha| -> 0");
    CLI::App* cmd_ainf = app.add_subcommand("sweep-alphainf", "decay as |alpha| -> infinity");
    CLI::App* cmd_p = app.add_subcommand("sweep-p", "convergence as p -> 1+");
    CLI::App* cmd_divfree = app.add_subcommand("divfree", "divergence-free field flow case");
    CLI::App* cmd_branch = app.add_subcommand("branch", "trace the positive branch from lambda1");
    CLI::App* cmd_all = app.add_subcommand("all", "run the full experiment suite");

    for (CLI::App* sub : {cmd_eig, cmd_solve, cmd_verify, cmd_threshold, cmd_a0, cmd_ainf, cmd_p,
                          cmd_divfree, cmd_branch, cmd_all})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    std::string text;
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) {
            std::cerr << "cannot open config: " << config_path << "\n";
            return kExitUsage;
        }
        text.assign((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    }
    ParseResult parsed = parse_config(text, overrides);
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors) std::cerr << "config error: " << e << "\n";
        return kExitUsage;
    }

    Ctx ctx;
    ctx.cfg = parsed.config;
    const char* env_root = std::getenv("NLL_OUT");
    ctx.out_root = env_root && *env_root ? fs::path(env_root) : fs::path(ctx.cfg.out_dir);
    fs::create_directories(ctx.out_root);

    try {
        if (cmd_eig->parsed()) return run_eig(ctx);
        if (cmd_solve->parsed()) return run_solve(ctx);
        if (cmd_verify->parsed()) return run_verify(ctx, solution_path);
        if (cmd_threshold->parsed()) return run_threshold(ctx);
        if (cmd_a0->parsed()) return run_alpha0(ctx, ctx.cfg.p, "sweep-alpha0");
        if (cmd_ainf->parsed()) return run_alphainf(ctx);
        if (cmd_p->parsed()) return run_sweep_p(ctx);
        if (cmd_divfree->parsed()) return run_divfree(ctx);
        if (cmd_branch->parsed()) return run_branch(ctx);
        if (cmd_all->parsed()) return run_all(ctx);
    } catch (const NonconvergenceError& e) {
        std::cerr << "nonconvergence: " << e.what() << "\n";
        return kExitNonconvergence;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
