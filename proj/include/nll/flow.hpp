#pragma once
// Flow (advection) coefficient: a constant vector or one coefficient field
// per axis, evaluated nodewise.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nll/grid.hpp"

namespace nll {

struct FlowSpec {
    enum class Variant { Constant, Field };
    Variant variant = Variant::Constant;
    std::vector<double> components;             // Constant: one entry per axis
    std::vector<std::vector<double>> field;     // Field: per axis, per node

    static FlowSpec zero(int dim) { return constant(std::vector<double>(dim, 0.0)); }

    static FlowSpec constant(std::vector<double> comps) {
        FlowSpec f;
        f.variant = Variant::Constant;
        f.components = std::move(comps);
        return f;
    }

    static FlowSpec of_fields(std::vector<std::vector<double>> per_axis) {
        FlowSpec f;
        f.variant = Variant::Field;
        f.field = std::move(per_axis);
        return f;
    }

    /// Rotational (divergence-free) field c * (-(y-cy), (x-cx)) about the
    /// domain center.
    static FlowSpec rotational(const Grid& g, double c) {
        if (g.dim() != 2) throw std::invalid_argument("FlowSpec::rotational needs a 2D grid");
        const double cx = 0.5 * (g.domain.x0 + g.domain.x1);
        const double cy = 0.5 * (g.domain.y0 + g.domain.y1);
        std::vector<std::vector<double>> f(2, std::vector<double>(g.node_count()));
        for (std::size_t k = 0; k < g.node_count(); ++k) {
            f[0][k] = -c * (g.y(k) - cy);
            f[1][k] = c * (g.x(k) - cx);
        }
        return of_fields(std::move(f));
    }

    int dim() const {
        return variant == Variant::Constant ? static_cast<int>(components.size())
                                            : static_cast<int>(field.size());
    }

    bool is_zero() const {
        if (variant == Variant::Field) return false;
        for (double c : components)
            if (c != 0.0) return false;
        return true;
    }

    void validate(const Grid& g) const {
        if (dim() != g.dim()) throw std::invalid_argument("FlowSpec: axis count does not match grid");
        if (variant == Variant::Field)
            for (const auto& f : field)
                if (f.size() != g.node_count())
                    throw std::invalid_argument("FlowSpec: field variant must store a value at every node");
    }

    double component_at(int axis, std::size_t node) const {
        return variant == Variant::Constant ? components[axis] : field[axis][node];
    }

    /// Euclidean |alpha| for constant flows.
    double magnitude() const {
        if (variant != Variant::Constant)
            throw std::invalid_argument("FlowSpec::magnitude: defined for constant flows only");
        double s = 0.0;
        for (double c : components) s += c * c;
        return std::sqrt(s);
    }

    /// max over nodes of the Euclidean flow magnitude.
    double sup_magnitude(const Grid& g) const {
        if (variant == Variant::Constant) return magnitude();
        double m = 0.0;
        for (std::size_t k = 0; k < g.node_count(); ++k) {
            double s = 0.0;
            for (int a = 0; a < dim(); ++a) s += field[a][k] * field[a][k];
            m = std::max(m, s);
        }
        return std::sqrt(m);
    }

    /// max over nodes of the discrete divergence (central differences,
    /// one-sided on the boundary); 0 for constant flows.
    double max_divergence(const Grid& g) const {
        if (variant == Variant::Constant) return 0.0;
        validate(g);
        std::vector<double> div(g.node_count(), 0.0);
        for (int a = 0; a < dim(); ++a) {
            Field f(g);
            f.values = field[a];
            auto grad = gradient(f);
            for (std::size_t k = 0; k < g.node_count(); ++k) div[k] += grad[a][k];
        }
        double m = 0.0;
        for (double v : div) m = std::max(m, std::abs(v));
        return m;
    }
};

} // namespace nll
