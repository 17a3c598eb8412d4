#pragma once
// One full instance of the problem: growth rate, crowding exponent,
// advection exponent, flow, kernel, domain, resolution.

#include <stdexcept>

#include "nll/flow.hpp"
#include "nll/grid.hpp"
#include "nll/kernel.hpp"

namespace nll {

struct ProblemParams {
    double lambda = 0.0; // growth rate
    double gamma = 1.0;  // crowding exponent, > 0
    double p = 2.0;      // advection exponent, >= 1
    FlowSpec flow = FlowSpec::zero(1);
    KernelSpec kernel = KernelSpec::constant_kernel(1.0);
    Domain domain = Domain::interval(0.0, 1.0);
    int n = 255;

    void validate() const {
        if (!(gamma > 0.0)) throw std::invalid_argument("ProblemParams: gamma > 0 required");
        if (!(p >= 1.0)) throw std::invalid_argument("ProblemParams: p >= 1 required");
        if (flow.dim() != domain.dim())
            throw std::invalid_argument("ProblemParams: flow dimension does not match domain");
    }
};

} // namespace nll
