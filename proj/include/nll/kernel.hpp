#pragma once
// Crowding kernels K(x,y) and their quadrature-weighted matrix form.
//
// Admissible kernels are bounded and nonnegative; k0 is the smallest row
// mass (the discrete integral of K(x,.) over the domain). Nondegeneracy of
// the kernel has no finite test, so the sufficient certificate "every row
// has positive mass" is recorded instead.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nll/grid.hpp"

namespace nll {

struct KernelSpec {
    enum class Variant { Constant, Gaussian, BallIndicator, Table };
    Variant variant = Variant::Constant;

    double constant = 1.0; // Constant: K == constant >= 0

    double amplitude = 1.0; // Gaussian: amplitude * exp(-|x-y|^2 / (2 width^2))
    double width = 0.25;

    double radius = 0.25;          // BallIndicator: b(y) * 1{|x-y| <= radius}
    double b_constant = 1.0;       // coefficient b, constant form
    std::vector<double> b_values;  // or nodewise b(y); empty means constant

    std::vector<std::vector<double>> table; // Table: explicit K(x_i, y_j)

    static KernelSpec constant_kernel(double c) {
        KernelSpec s;
        s.variant = Variant::Constant;
        s.constant = c;
        return s;
    }
    static KernelSpec gaussian(double amplitude, double width) {
        KernelSpec s;
        s.variant = Variant::Gaussian;
        s.amplitude = amplitude;
        s.width = width;
        return s;
    }
    static KernelSpec ball_indicator(double r, double b = 1.0) {
        KernelSpec s;
        s.variant = Variant::BallIndicator;
        s.radius = r;
        s.b_constant = b;
        return s;
    }
    static KernelSpec table_kernel(std::vector<std::vector<double>> t) {
        KernelSpec s;
        s.variant = Variant::Table;
        s.table = std::move(t);
        return s;
    }
};

/// Quadrature-weighted kernel matrix: W(i,j) = K(x_i, y_j) * quad_w[j], so
/// phi_u = W |u|^gamma is the discrete nonlocal term at every node.
struct KernelMatrix {
    Eigen::MatrixXd W;
    double k0 = 0.0;   // min over rows of the row mass sum_j W(i,j)
    double kinf = 0.0; // max kernel value |K|_inf
    bool rows_all_positive = false; // sufficient nondegeneracy certificate
};

inline KernelMatrix assemble_kernel(const KernelSpec& spec, const Grid& grid) {
    const std::size_t m = grid.node_count();

    auto kernel_value = [&](std::size_t i, std::size_t j) -> double {
        switch (spec.variant) {
            case KernelSpec::Variant::Constant:
                return spec.constant;
            case KernelSpec::Variant::Gaussian: {
                const double dx = grid.x(i) - grid.x(j);
                const double dy = grid.y(i) - grid.y(j);
                return spec.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * spec.width * spec.width));
            }
            case KernelSpec::Variant::BallIndicator: {
                const double dx = grid.x(i) - grid.x(j);
                const double dy = grid.y(i) - grid.y(j);
                if (dx * dx + dy * dy > spec.radius * spec.radius) return 0.0;
                return spec.b_values.empty() ? spec.b_constant : spec.b_values[j];
            }
            case KernelSpec::Variant::Table:
                return spec.table[i][j];
        }
        return 0.0;
    };

    if (spec.variant == KernelSpec::Variant::Gaussian && !(spec.width > 0.0))
        throw std::invalid_argument("assemble_kernel: gaussian width must be > 0");
    if (spec.variant == KernelSpec::Variant::BallIndicator && !spec.b_values.empty() &&
        spec.b_values.size() != m)
        throw std::invalid_argument("assemble_kernel: b field size does not match grid");
    if (spec.variant == KernelSpec::Variant::Table) {
        if (spec.table.size() != m)
            throw std::invalid_argument("assemble_kernel: table row count does not match grid");
        for (const auto& row : spec.table)
            if (row.size() != m)
                throw std::invalid_argument("assemble_kernel: table column count does not match grid");
    }

    KernelMatrix km;
    km.W.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    double k0 = std::numeric_limits<double>::infinity();
    double kinf = 0.0;
    bool all_rows_positive = true;
    for (std::size_t i = 0; i < m; ++i) {
        double row_mass = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double K = kernel_value(i, j);
            if (K < 0.0)
                throw std::invalid_argument("assemble_kernel: kernel values must be nonnegative");
            kinf = std::max(kinf, K);
            const double w = K * grid.quad_w[j];
            km.W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
            row_mass += w;
        }
        k0 = std::min(k0, row_mass);
        if (!(row_mass > 0.0)) all_rows_positive = false;
    }
    km.k0 = k0;
    km.kinf = kinf;
    km.rows_all_positive = all_rows_positive;
    return km;
}

} // namespace nll
