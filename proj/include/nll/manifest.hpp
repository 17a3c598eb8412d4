#pragma once
// JSON run manifest: config echo, resolved discrete quantities, verdicts and
// artifact list. The serialized config plus seed is enough to rerun the
// experiment bit-identically, so the manifest carries deterministic work
// counters rather than wall-clock timings.

#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "nll/config.hpp"
#include "nll/csv.hpp"
#include "nll/solver.hpp"

namespace nll {

using Json = nlohmann::json;

struct Manifest {
    Json j;

    explicit Manifest(const RunConfig& config, const std::string& command) {
        const std::string cfg = serialize_config(config);
        j["command"] = command;
        j["config"] = cfg;
        j["seed"] = config.seed;
        std::string hashed = cfg;
        if (!config.kernel_table_path.empty()) {
            std::ifstream is(config.kernel_table_path, std::ios::binary);
            if (is) {
                std::string bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
                hashed += bytes;
            }
        }
        j["input_hash"] = fnv1a64_hex(hashed);
        j["resolved"] = Json::object();
        j["verdicts"] = Json::object();
        j["artifacts"] = Json::array();
        j["work"] = Json::object();
    }

    void resolved(const std::string& key, double value) { j["resolved"][key] = value; }
    void verdict(const std::string& key, const Json& value) { j["verdicts"][key] = value; }
    void work(const std::string& key, long long value) { j["work"][key] = value; }
    void artifact(const std::string& path) { j["artifacts"].push_back(path); }

    void note_solve(const std::string& prefix, const SolveReport& rep) {
        Json r;
        r["converged"] = rep.converged;
        r["residual_inf"] = rep.residual_inf;
        r["positive"] = rep.positive;
        r["min_interior"] = rep.min_interior;
        r["apriori_bound_ok"] = rep.apriori_bound_ok;
        r["bracket_present"] = rep.bracket.has_value();
        r["bracket_satisfied"] = rep.bracket_satisfied;
        r["lambda1"] = rep.lambda1;
        if (rep.M) r["M"] = *rep.M;
        if (rep.bracket) {
            r["epsilon"] = rep.bracket->epsilon;
            r["a"] = rep.bracket->a;
        }
        r["message"] = rep.message;
        r["march_iterations"] = rep.march_iterations;
        r["newton_iterations"] = rep.newton_iterations;
        j["verdicts"][prefix] = r;
    }

    void write(const std::string& path) const { write_text_file(path, j.dump(2) + "\n"); }
};

} // namespace nll
