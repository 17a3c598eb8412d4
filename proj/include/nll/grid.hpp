#pragma once
// Uniform tensor grids on intervals/rectangles, nodal fields, and the
// quadrature / norm / derivative primitives shared by every other module.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

namespace nll {

inline constexpr double kPi = 3.14159265358979323846;

struct Domain {
    enum class Kind { Interval, Rectangle };
    Kind kind = Kind::Interval;
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = 1.0; // Rectangle only

    static Domain interval(double a, double b) {
        if (!(b > a)) throw std::invalid_argument("Domain: interval requires x1 > x0");
        Domain d;
        d.kind = Kind::Interval;
        d.x0 = a;
        d.x1 = b;
        return d;
    }

    static Domain rectangle(double ax, double bx, double ay, double by) {
        if (!(bx > ax) || !(by > ay))
            throw std::invalid_argument("Domain: rectangle requires x1 > x0 and y1 > y0");
        Domain d;
        d.kind = Kind::Rectangle;
        d.x0 = ax;
        d.x1 = bx;
        d.y0 = ay;
        d.y1 = by;
        return d;
    }

    int dim() const { return kind == Kind::Interval ? 1 : 2; }

    double length(int axis) const { return axis == 0 ? x1 - x0 : y1 - y0; }

    double measure() const {
        return kind == Kind::Interval ? (x1 - x0) : (x1 - x0) * (y1 - y0);
    }

    bool operator==(const Domain& o) const {
        if (kind != o.kind || x0 != o.x0 || x1 != o.x1) return false;
        return kind == Kind::Interval || (y0 == o.y0 && y1 == o.y1);
    }
};

/// Uniform grid with n interior nodes per axis (n+2 nodes per axis in total,
/// the outermost ones lying exactly on the boundary). Node ordering is
/// lexicographic by axis: x fastest, then y, so index = iy*(n+2) + ix in 2D.
struct Grid {
    Domain domain;
    int n = 0;                       // interior nodes per axis
    std::array<double, 2> h{0, 0};   // spacing per axis
    std::vector<std::array<double, 2>> nodes;
    std::vector<bool> boundary_mask; // exactly one of boundary/interior per node
    std::vector<int> interior_index; // node -> 0..n_interior-1, or -1
    std::vector<int> interior_nodes; // interior -> node index
    std::vector<double> quad_w;      // trapezoid weight per node

    int dim() const { return domain.dim(); }
    int nodes_per_axis() const { return n + 2; }
    std::size_t node_count() const { return nodes.size(); }
    std::size_t interior_count() const { return interior_nodes.size(); }
    bool is_boundary(std::size_t k) const { return boundary_mask[k]; }

    double x(std::size_t k) const { return nodes[k][0]; }
    double y(std::size_t k) const { return nodes[k][1]; }

    /// 2D node index from per-axis indices (ix, iy in 0..n+1).
    int at(int ix, int iy) const { return iy * nodes_per_axis() + ix; }

    bool same_as(const Grid& o) const { return domain == o.domain && n == o.n; }
};

inline Grid build_grid(const Domain& domain, int n) {
    if (n < 3) throw std::invalid_argument("build_grid: n >= 3 required (stencils undefined)");
    Grid g;
    g.domain = domain;
    g.n = n;
    const int m = n + 2;
    for (int a = 0; a < domain.dim(); ++a) g.h[a] = domain.length(a) / (n + 1);

    // 1D trapezoid weights per axis: h/2 at the ends, h inside.
    auto axis_w = [&](int a, int i) { return (i == 0 || i == m - 1) ? 0.5 * g.h[a] : g.h[a]; };

    if (domain.dim() == 1) {
        g.nodes.resize(m);
        g.boundary_mask.resize(m);
        g.quad_w.resize(m);
        for (int i = 0; i < m; ++i) {
            g.nodes[i] = {domain.x0 + i * g.h[0], 0.0};
            g.boundary_mask[i] = (i == 0 || i == m - 1);
            g.quad_w[i] = axis_w(0, i);
        }
    } else {
        g.nodes.resize(std::size_t(m) * m);
        g.boundary_mask.resize(std::size_t(m) * m);
        g.quad_w.resize(std::size_t(m) * m);
        for (int iy = 0; iy < m; ++iy) {
            for (int ix = 0; ix < m; ++ix) {
                const int k = iy * m + ix;
                g.nodes[k] = {domain.x0 + ix * g.h[0], domain.y0 + iy * g.h[1]};
                g.boundary_mask[k] = (ix == 0 || ix == m - 1 || iy == 0 || iy == m - 1);
                g.quad_w[k] = axis_w(0, ix) * axis_w(1, iy);
            }
        }
    }

    g.interior_index.assign(g.node_count(), -1);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
        if (!g.boundary_mask[k]) {
            g.interior_index[k] = static_cast<int>(g.interior_nodes.size());
            g.interior_nodes.push_back(static_cast<int>(k));
        }
    }
    return g;
}

/// Process-lifetime grid registry. Fields carried inside reports reference
/// interned grids so they never dangle. Thread-safe.
inline const Grid& shared_grid(const Domain& domain, int n) {
    struct Key {
        Domain d;
        int n;
        bool operator<(const Key& o) const {
            auto tup = [](const Key& k) {
                return std::tuple<int, double, double, double, double, int>(
                    static_cast<int>(k.d.kind), k.d.x0, k.d.x1, k.d.y0, k.d.y1, k.n);
            };
            return tup(*this) < tup(o);
        }
    };
    static std::mutex mu;
    static std::map<Key, Grid> grids;
    std::lock_guard<std::mutex> lock(mu);
    Key key{domain, n};
    auto it = grids.find(key);
    if (it == grids.end()) it = grids.emplace(key, build_grid(domain, n)).first;
    return it->second;
}

/// Nodal scalar field over a grid. The grid must outlive the field.
struct Field {
    const Grid* grid = nullptr;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0) : grid(&g), values(g.node_count(), fill) {}

    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }
    std::size_t size() const { return values.size(); }
};

template <class Fn>
Field field_from(const Grid& g, Fn f) {
    Field u(g);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
        if constexpr (std::is_invocable_v<Fn, double, double>)
            u[k] = f(g.x(k), g.y(k));
        else
            u[k] = f(g.x(k));
    }
    return u;
}

inline void check_same_grid(const Field& f, const Field& g, const char* what) {
    if (!f.grid || !g.grid || !f.grid->same_as(*g.grid))
        throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

/// Force exact zeros on boundary nodes.
inline void zero_boundary(Field& u) {
    for (std::size_t k = 0; k < u.size(); ++k)
        if (u.grid->is_boundary(k)) u[k] = 0.0;
}

/// Trapezoid quadrature (tensor-product in 2D); exact for affine integrands.
inline double integrate(const Field& f) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += f.grid->quad_w[k] * f[k];
    return s;
}

inline double sup_norm(const Field& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

inline double sup_distance(const Field& f, const Field& g) {
    check_same_grid(f, g, "sup_distance");
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) m = std::max(m, std::abs(f[k] - g[k]));
    return m;
}

namespace detail {

// Second-order derivative along one axis: central inside, one-sided at the
// axis ends. stride is the node-index step along the axis. The one-sided
// stencils are written in difference form so constants map to exactly zero.
inline double axis_derivative(const std::vector<double>& v, std::size_t k, int i, int m,
                              std::ptrdiff_t stride, double h) {
    if (i == 0)
        return (4.0 * (v[k + stride] - v[k]) - (v[k + 2 * stride] - v[k])) / (2.0 * h);
    if (i == m - 1)
        return (4.0 * (v[k] - v[k - stride]) - (v[k] - v[k - 2 * stride])) / (2.0 * h);
    return (v[k + stride] - v[k - stride]) / (2.0 * h);
}

} // namespace detail

/// Discrete gradient, one component per axis. Central differences at interior
/// nodes, one-sided second-order stencils on the boundary.
inline std::vector<Field> gradient(const Field& f) {
    const Grid& g = *f.grid;
    const int m = g.nodes_per_axis();
    std::vector<Field> out;
    if (g.dim() == 1) {
        Field d(g);
        for (int i = 0; i < m; ++i)
            d[i] = detail::axis_derivative(f.values, i, i, m, 1, g.h[0]);
        out.push_back(std::move(d));
    } else {
        Field dx(g), dy(g);
        for (int iy = 0; iy < m; ++iy) {
            for (int ix = 0; ix < m; ++ix) {
                const std::size_t k = g.at(ix, iy);
                dx[k] = detail::axis_derivative(f.values, k, ix, m, 1, g.h[0]);
                dy[k] = detail::axis_derivative(f.values, k, iy, m, m, g.h[1]);
            }
        }
        out.push_back(std::move(dx));
        out.push_back(std::move(dy));
    }
    return out;
}

/// Discrete surrogate for the C1(closure) distance: sup distance of values
/// plus sup distance of each gradient component.
inline double c1_distance(const Field& f, const Field& g) {
    check_same_grid(f, g, "c1_distance");
    double d = sup_distance(f, g);
    auto gf = gradient(f);
    auto gg = gradient(g);
    for (std::size_t a = 0; a < gf.size(); ++a) d += sup_distance(gf[a], gg[a]);
    return d;
}

inline double c1_norm(const Field& f) {
    double d = sup_norm(f);
    for (const auto& c : gradient(f)) d += sup_norm(c);
    return d;
}

} // namespace nll
