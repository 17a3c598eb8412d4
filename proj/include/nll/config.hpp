#pragma once
// Structured-text run configuration: INI-like sections of key = value lines.
// Every field has a default; parsing validates everything and reports all
// errors (line-precise), not just the first.

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nll/csv.hpp"
#include "nll/eigenpair.hpp"
#include "nll/problem.hpp"

namespace nll {

struct RunConfig {
    // [domain]
    std::string domain_kind = "interval"; // interval | rectangle
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    int n = 255;

    // [problem]
    double lambda = 2.0 * kPi * kPi;
    std::optional<double> lambda_rel; // lambda as a multiple of the discrete lambda1
    double gamma = 1.0;
    double p = 2.0;

    // [kernel]
    std::string kernel_variant = "constant"; // constant | gaussian | ball | table
    double kernel_constant = 1.0;
    double kernel_amplitude = 1.0;
    double kernel_width = 0.25;
    double kernel_radius = 0.25;
    double kernel_b = 1.0;
    std::string kernel_table_path;

    // [flow]
    std::string flow_variant = "constant"; // constant | rotational
    std::vector<double> alpha = {0.0};     // components for constant flows
    double flow_strength = 4.0;            // rotational strength c

    // [experiments]
    int starts = 5;
    double threshold_lo_rel = 0.5;
    double threshold_hi_rel = 2.0;
    double alpha0_lambda_rel = 1.2;
    double alphainf_lambda_rel = 2.0;
    std::vector<double> alpha0_values = {1.0, 0.5, 0.25, 0.125, 0.0625};
    std::vector<double> alphainf_values = {1, 2, 4, 8, 16, 32, 64};
    std::vector<double> p_values = {1.5, 1.25, 1.125, 1.0625};
    double p_sweep_alpha = 1.0;
    std::vector<double> nonexistence_scan = {1, 2, 4, 8, 16, 32, 64};
    double divfree_strength = 4.0;
    int divfree_n = 31;
    double divfree_lambda_offset = 1.0;
    int branch_count = 20;
    double branch_step = 0.1;
    int branch_n = 31;
    double decay_alpha0 = 0.1;
    double decay_alphainf = 0.2;
    double decay_p = 0.1;

    // [run]
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    double residual_tol = 1e-8;
    double collapse_tol = 1e-6;

    Domain domain() const {
        return domain_kind == "interval" ? Domain::interval(x0, x1)
                                         : Domain::rectangle(x0, x1, y0, y1);
    }

    KernelSpec kernel() const {
        if (kernel_variant == "constant") return KernelSpec::constant_kernel(kernel_constant);
        if (kernel_variant == "gaussian") return KernelSpec::gaussian(kernel_amplitude, kernel_width);
        if (kernel_variant == "ball") return KernelSpec::ball_indicator(kernel_radius, kernel_b);
        return KernelSpec::table_kernel(read_matrix_csv(kernel_table_path));
    }

    FlowSpec flow(const Grid& g) const {
        if (flow_variant == "rotational") return FlowSpec::rotational(g, flow_strength);
        std::vector<double> comps(g.dim(), 0.0);
        for (std::size_t i = 0; i < comps.size() && i < alpha.size(); ++i) comps[i] = alpha[i];
        return FlowSpec::constant(std::move(comps));
    }

    /// Fully resolved problem parameters (lambda_rel resolved against the
    /// discrete principal eigenvalue).
    ProblemParams params() const {
        ProblemParams pp;
        pp.domain = domain();
        pp.n = n;
        const Grid& g = shared_grid(pp.domain, pp.n);
        pp.flow = flow(g);
        pp.kernel = kernel();
        pp.gamma = gamma;
        pp.p = p;
        pp.lambda = lambda_rel ? *lambda_rel * principal_eigenpair_cached(g).lambda1 : lambda;
        return pp;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

struct ConfigEntry {
    std::string section, key, value;
    int line = 0; // 0 for --set overrides
};

} // namespace detail

struct ParseResult {
    RunConfig config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
};

inline std::string serialize_config(const RunConfig& c);

/// Parse the config text plus any "section.key=value" overrides.
inline ParseResult parse_config(const std::string& text,
                                const std::vector<std::string>& overrides = {}) {
    ParseResult out;
    std::vector<detail::ConfigEntry> entries;

    {
        std::istringstream is(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            std::string t = detail::trim(line);
            if (!t.empty() && t.back() == '\r') t.pop_back();
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']') {
                    out.errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
                    continue;
                }
                section = detail::trim(t.substr(1, t.size() - 2));
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                out.errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
                continue;
            }
            entries.push_back({section, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)),
                               lineno});
        }
    }
    for (const auto& ov : overrides) {
        const auto dot = ov.find('.');
        const auto eq = ov.find('=');
        if (dot == std::string::npos || eq == std::string::npos || dot > eq) {
            out.errors.push_back("--set '" + ov + "': expected section.key=value");
            continue;
        }
        entries.push_back({detail::trim(ov.substr(0, dot)),
                           detail::trim(ov.substr(dot + 1, eq - dot - 1)),
                           detail::trim(ov.substr(eq + 1)), 0});
    }

    RunConfig& c = out.config;
    auto where = [](const detail::ConfigEntry& e) {
        return e.line ? "line " + std::to_string(e.line) : std::string("--set");
    };
    auto fail = [&](const detail::ConfigEntry& e, const std::string& msg) {
        out.errors.push_back(where(e) + " [" + e.section + "] " + e.key + ": " + msg);
    };

    auto as_double = [&](const detail::ConfigEntry& e, double& dst) {
        try {
            std::size_t pos = 0;
            dst = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
        } catch (...) {
            fail(e, "expected a number, got '" + e.value + "'");
        }
    };
    auto as_int = [&](const detail::ConfigEntry& e, int& dst) {
        try {
            std::size_t pos = 0;
            dst = std::stoi(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
        } catch (...) {
            fail(e, "expected an integer, got '" + e.value + "'");
        }
    };
    auto as_u64 = [&](const detail::ConfigEntry& e, std::uint64_t& dst) {
        try {
            std::size_t pos = 0;
            dst = std::stoull(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
        } catch (...) {
            fail(e, "expected an unsigned integer, got '" + e.value + "'");
        }
    };
    auto as_list = [&](const detail::ConfigEntry& e, std::vector<double>& dst) {
        std::vector<double> vals;
        std::string cur;
        std::istringstream is(e.value);
        while (std::getline(is, cur, ',')) {
            try {
                std::size_t pos = 0;
                vals.push_back(std::stod(detail::trim(cur), &pos));
                if (pos != detail::trim(cur).size()) throw std::invalid_argument("");
            } catch (...) {
                fail(e, "expected a comma-separated number list, got '" + e.value + "'");
                return;
            }
        }
        if (vals.empty()) {
            fail(e, "empty list");
            return;
        }
        dst = std::move(vals);
    };

    for (const auto& e : entries) {
        const std::string id = e.section + "." + e.key;
        if (id == "domain.kind") {
            if (e.value != "interval" && e.value != "rectangle")
                fail(e, "expected interval or rectangle");
            else
                c.domain_kind = e.value;
        } else if (id == "domain.x0") as_double(e, c.x0);
        else if (id == "domain.x1") as_double(e, c.x1);
        else if (id == "domain.y0") as_double(e, c.y0);
        else if (id == "domain.y1") as_double(e, c.y1);
        else if (id == "domain.n") as_int(e, c.n);
        else if (id == "problem.lambda") as_double(e, c.lambda);
        else if (id == "problem.lambda_rel") {
            double v = 0;
            as_double(e, v);
            c.lambda_rel = v;
        } else if (id == "problem.gamma") as_double(e, c.gamma);
        else if (id == "problem.p") as_double(e, c.p);
        else if (id == "kernel.variant") {
            if (e.value != "constant" && e.value != "gaussian" && e.value != "ball" &&
                e.value != "table")
                fail(e, "expected constant, gaussian, ball or table");
            else
                c.kernel_variant = e.value;
        } else if (id == "kernel.constant") as_double(e, c.kernel_constant);
        else if (id == "kernel.amplitude") as_double(e, c.kernel_amplitude);
        else if (id == "kernel.width") as_double(e, c.kernel_width);
        else if (id == "kernel.radius") as_double(e, c.kernel_radius);
        else if (id == "kernel.b") as_double(e, c.kernel_b);
        else if (id == "kernel.table_path") c.kernel_table_path = e.value;
        else if (id == "flow.variant") {
            if (e.value != "constant" && e.value != "rotational")
                fail(e, "expected constant or rotational");
            else
                c.flow_variant = e.value;
        } else if (id == "flow.alpha") as_list(e, c.alpha);
        else if (id == "flow.strength") as_double(e, c.flow_strength);
        else if (id == "experiments.starts") as_int(e, c.starts);
        else if (id == "experiments.threshold_lo_rel") as_double(e, c.threshold_lo_rel);
        else if (id == "experiments.threshold_hi_rel") as_double(e, c.threshold_hi_rel);
        else if (id == "experiments.alpha0_lambda_rel") as_double(e, c.alpha0_lambda_rel);
        else if (id == "experiments.alphainf_lambda_rel") as_double(e, c.alphainf_lambda_rel);
        else if (id == "experiments.alpha0_values") as_list(e, c.alpha0_values);
        else if (id == "experiments.alphainf_values") as_list(e, c.alphainf_values);
        else if (id == "experiments.p_values") as_list(e, c.p_values);
        else if (id == "experiments.p_sweep_alpha") as_double(e, c.p_sweep_alpha);
        else if (id == "experiments.nonexistence_scan") as_list(e, c.nonexistence_scan);
        else if (id == "experiments.divfree_strength") as_double(e, c.divfree_strength);
        else if (id == "experiments.divfree_n") as_int(e, c.divfree_n);
        else if (id == "experiments.divfree_lambda_offset") as_double(e, c.divfree_lambda_offset);
        else if (id == "experiments.branch_count") as_int(e, c.branch_count);
        else if (id == "experiments.branch_step") as_double(e, c.branch_step);
        else if (id == "experiments.branch_n") as_int(e, c.branch_n);
        else if (id == "experiments.decay_alpha0") as_double(e, c.decay_alpha0);
        else if (id == "experiments.decay_alphainf") as_double(e, c.decay_alphainf);
        else if (id == "experiments.decay_p") as_double(e, c.decay_p);
        else if (id == "run.seed") as_u64(e, c.seed);
        else if (id == "run.out_dir") c.out_dir = e.value;
        else if (id == "run.residual_tol") as_double(e, c.residual_tol);
        else if (id == "run.collapse_tol") as_double(e, c.collapse_tol);
        else fail(e, "unknown key");
    }

    // Constraint validation, after all assignments so every violation is reported.
    auto constraint = [&](bool ok, const std::string& msg) {
        if (!ok) out.errors.push_back("constraint: " + msg);
    };
    constraint(c.x1 > c.x0, "domain requires x1 > x0");
    if (c.domain_kind == "rectangle") constraint(c.y1 > c.y0, "domain requires y1 > y0");
    constraint(c.n >= 3, "n >= 3 required (stencils undefined)");
    constraint(c.gamma > 0.0, "gamma must be > 0 (problem hypothesis: gamma > 0, p >= 1)");
    constraint(c.p >= 1.0, "p must be >= 1 (problem hypothesis: gamma > 0, p >= 1)");
    constraint(c.kernel_constant >= 0.0, "kernel constant must be >= 0 (kernels are nonnegative)");
    constraint(c.kernel_amplitude >= 0.0, "kernel amplitude must be >= 0 (kernels are nonnegative)");
    constraint(c.kernel_variant != "gaussian" || c.kernel_width > 0.0, "gaussian width must be > 0");
    constraint(c.kernel_variant != "table" || !c.kernel_table_path.empty(),
               "table kernel needs kernel.table_path");
    constraint(c.starts >= 3, "starts >= 3 required");
    constraint(c.residual_tol > 0.0, "residual_tol must be > 0");
    constraint(c.collapse_tol > 0.0, "collapse_tol must be > 0");
    constraint(c.branch_count >= 1, "branch_count >= 1 required");
    constraint(c.branch_step > 0.0, "branch_step must be > 0");
    return out;
}

/// Canonical serialization; parse(serialize(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
    std::string s;
    auto kv = [&](const char* k, const std::string& v) { s += std::string(k) + " = " + v + "\n"; };
    auto kd = [&](const char* k, double v) { kv(k, format_double(v)); };
    auto ki = [&](const char* k, long long v) { kv(k, std::to_string(v)); };
    auto kl = [&](const char* k, const std::vector<double>& v) {
        std::string txt;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) txt += ",";
            txt += format_double(v[i]);
        }
        kv(k, txt);
    };
    s += "[domain]\n";
    kv("kind", c.domain_kind);
    kd("x0", c.x0);
    kd("x1", c.x1);
    if (c.domain_kind == "rectangle") {
        kd("y0", c.y0);
        kd("y1", c.y1);
    }
    ki("n", c.n);
    s += "[problem]\n";
    kd("lambda", c.lambda);
    if (c.lambda_rel) kd("lambda_rel", *c.lambda_rel);
    kd("gamma", c.gamma);
    kd("p", c.p);
    s += "[kernel]\n";
    kv("variant", c.kernel_variant);
    kd("constant", c.kernel_constant);
    kd("amplitude", c.kernel_amplitude);
    kd("width", c.kernel_width);
    kd("radius", c.kernel_radius);
    kd("b", c.kernel_b);
    if (!c.kernel_table_path.empty()) kv("table_path", c.kernel_table_path);
    s += "[flow]\n";
    kv("variant", c.flow_variant);
    kl("alpha", c.alpha);
    kd("strength", c.flow_strength);
    s += "[experiments]\n";
    ki("starts", c.starts);
    kd("threshold_lo_rel", c.threshold_lo_rel);
    kd("threshold_hi_rel", c.threshold_hi_rel);
    kd("alpha0_lambda_rel", c.alpha0_lambda_rel);
    kd("alphainf_lambda_rel", c.alphainf_lambda_rel);
    kl("alpha0_values", c.alpha0_values);
    kl("alphainf_values", c.alphainf_values);
    kl("p_values", c.p_values);
    kd("p_sweep_alpha", c.p_sweep_alpha);
    kl("nonexistence_scan", c.nonexistence_scan);
    kd("divfree_strength", c.divfree_strength);
    ki("divfree_n", c.divfree_n);
    kd("divfree_lambda_offset", c.divfree_lambda_offset);
    ki("branch_count", c.branch_count);
    kd("branch_step", c.branch_step);
    ki("branch_n", c.branch_n);
    kd("decay_alpha0", c.decay_alpha0);
    kd("decay_alphainf", c.decay_alphainf);
    kd("decay_p", c.decay_p);
    s += "[run]\n";
    ki("seed", static_cast<long long>(c.seed));
    kv("out_dir", c.out_dir);
    kd("residual_tol", c.residual_tol);
    kd("collapse_tol", c.collapse_tol);
    return s;
}

} // namespace nll
