// Scalar fields, bounded domains and the sampling/scaling predicates the
// rest of the library is built on.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polyharm {

inline constexpr int kMaxDim = 8;

/// Small fixed-capacity point type; `dim` is the active dimension (2..8).
struct Vec {
    std::array<double, kMaxDim> c{};
    int dim = 0;

    Vec() = default;
    Vec(std::initializer_list<double> xs) {
        dim = static_cast<int>(xs.size());
        int i = 0;
        for (double v : xs) c[i++] = v;
    }
    static Vec zero(int n) {
        Vec v;
        v.dim = n;
        return v;
    }

    double& operator[](int i) { return c[static_cast<size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<size_t>(i)]; }

    Vec operator+(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.c[i] += o.c[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.c[i] -= o.c[i];
        return r;
    }
    Vec operator*(double s) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.c[i] *= s;
        return r;
    }
    double norm2() const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += c[i] * c[i];
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec axpy(const Vec& x, double h, const Vec& d) {
    Vec r = x;
    for (int i = 0; i < x.dim; ++i) r.c[i] += h * d.c[i];
    return r;
}

/// Surface area of the unit sphere in R^n.
inline double sphere_area(int n) {
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

/// A real-valued function on R^n. Evaluation must be deterministic.
struct ScalarField {
    enum class Smoothness { c0, c2, c_inf };

    std::function<double(const Vec&)> eval;
    int dim = 0;
    Smoothness smoothness_hint = Smoothness::c2;

    ScalarField() = default;
    ScalarField(std::function<double(const Vec&)> f, int n,
                Smoothness s = Smoothness::c2)
        : eval(std::move(f)), dim(n), smoothness_hint(s) {}

    double operator()(const Vec& x) const { return eval(x); }
};

inline ScalarField constant_field(int dim, double c) {
    return ScalarField([c](const Vec&) { return c; }, dim,
                       ScalarField::Smoothness::c_inf);
}

inline ScalarField field_sum(const ScalarField& f, const ScalarField& g) {
    auto hint = static_cast<int>(f.smoothness_hint) < static_cast<int>(g.smoothness_hint)
                    ? f.smoothness_hint
                    : g.smoothness_hint;
    return ScalarField([f, g](const Vec& x) { return f(x) + g(x); }, f.dim, hint);
}

inline ScalarField field_scale(const ScalarField& f, double a) {
    return ScalarField([f, a](const Vec& x) { return a * f(x); }, f.dim,
                       f.smoothness_hint);
}

/// Bounded open connected set. `boundary_distance` is signed: positive
/// inside, negative outside, zero on the boundary.
struct Domain {
    enum class Kind { ball, box, general };

    int dim = 0;
    Kind kind = Kind::ball;

    Vec center;      // ball
    double radius = 0.0;
    Vec lo, hi;      // box; for ball/general this is the bounding box

    std::function<bool(const Vec&)> indicator_fn;     // general only
    std::function<double(const Vec&)> distance_fn;    // general only, signed

    static Domain ball(const Vec& c, double r) {
        if (r <= 0.0) throw std::invalid_argument("Domain::ball: radius <= 0");
        Domain d;
        d.dim = c.dim;
        d.kind = Kind::ball;
        d.center = c;
        d.radius = r;
        d.lo = c;
        d.hi = c;
        for (int i = 0; i < c.dim; ++i) {
            d.lo[i] -= r;
            d.hi[i] += r;
        }
        return d;
    }

    static Domain box(const Vec& lo, const Vec& hi) {
        Domain d;
        d.dim = lo.dim;
        d.kind = Kind::box;
        d.lo = lo;
        d.hi = hi;
        for (int i = 0; i < d.dim; ++i)
            if (!(lo[i] < hi[i]))
                throw std::invalid_argument("Domain::box: lo must be < hi");
        return d;
    }

    static Domain general(int dim, std::function<bool(const Vec&)> ind,
                          std::function<double(const Vec&)> dist,
                          const Vec& lo, const Vec& hi) {
        Domain d;
        d.dim = dim;
        d.kind = Kind::general;
        d.indicator_fn = std::move(ind);
        d.distance_fn = std::move(dist);
        d.lo = lo;
        d.hi = hi;
        return d;
    }

    /// Signed distance to the boundary (exact for ball/box).
    double boundary_distance(const Vec& x) const {
        switch (kind) {
            case Kind::ball:
                return radius - (x - center).norm();
            case Kind::box: {
                double m = std::numeric_limits<double>::infinity();
                for (int i = 0; i < dim; ++i) {
                    m = std::min(m, x[i] - lo[i]);
                    m = std::min(m, hi[i] - x[i]);
                }
                return m;
            }
            case Kind::general:
                return distance_fn(x);
        }
        return 0.0;
    }

    bool contains(const Vec& x) const {
        if (kind == Kind::general) return indicator_fn(x);
        return boundary_distance(x) > 0.0;
    }

    bool contains_closure(const Vec& x) const {
        return boundary_distance(x) >= 0.0;
    }

    std::pair<Vec, Vec> bounding_box() const { return {lo, hi}; }

    /// Radius of the largest ball contained in the domain. For general
    /// domains this is estimated from the signed distance on a coarse grid.
    double inradius() const {
        switch (kind) {
            case Kind::ball:
                return radius;
            case Kind::box: {
                double m = std::numeric_limits<double>::infinity();
                for (int i = 0; i < dim; ++i) m = std::min(m, 0.5 * (hi[i] - lo[i]));
                return m;
            }
            case Kind::general: {
                double best = 0.0;
                const int m = 33;
                std::vector<int> idx(dim, 0);
                for (;;) {
                    Vec x = Vec::zero(dim);
                    for (int i = 0; i < dim; ++i)
                        x[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (m - 1);
                    best = std::max(best, distance_fn(x));
                    int a = 0;
                    while (a < dim && ++idx[a] == m) idx[a++] = 0;
                    if (a == dim) break;
                }
                return best;
            }
        }
        return 0.0;
    }
};

/// Dyadic sample grid of the closure of D with per-axis spacing <= density.
/// Grids for smaller densities are refinements of grids for larger ones,
/// so sampled suprema are monotone under refinement.
inline std::vector<Vec> sample_closure(const Domain& D, double density) {
    if (density <= 0.0) throw std::invalid_argument("sample grid: density <= 0");
    std::vector<int> m(D.dim);
    for (int i = 0; i < D.dim; ++i) {
        double span = D.hi[i] - D.lo[i];
        int k = std::max(1, (int)std::ceil(std::log2(span / density)));
        m[i] = 1 << k;
    }
    std::vector<Vec> pts;
    std::vector<int> idx(D.dim, 0);
    for (;;) {
        Vec x = Vec::zero(D.dim);
        for (int i = 0; i < D.dim; ++i)
            x[i] = D.lo[i] + (D.hi[i] - D.lo[i]) * idx[i] / m[i];
        if (D.contains_closure(x)) pts.push_back(x);
        int a = 0;
        while (a < D.dim && ++idx[a] > m[a]) idx[a++] = 0;
        if (a == D.dim) break;
    }
    return pts;
}

/// Interior sample points (boundary_distance > 0) on the same dyadic grid.
inline std::vector<Vec> sample_interior(const Domain& D, double density) {
    std::vector<Vec> pts = sample_closure(D, density);
    std::vector<Vec> out;
    out.reserve(pts.size());
    for (const Vec& x : pts)
        if (D.boundary_distance(x) > 0.0) out.push_back(x);
    return out;
}

/// max |f| over the deterministic sample grid of the closure of D.
inline double sup_norm(const ScalarField& f, const Domain& D, double density) {
    std::vector<Vec> pts = sample_closure(D, density);
    if (pts.empty())
        throw std::runtime_error("sup_norm: empty sample set (degenerate domain vs grid)");
    double m = 0.0;
    for (const Vec& x : pts) m = std::max(m, std::abs(f(x)));
    return m;
}

/// Subdomain at distance >= margin from the boundary of D.
inline Domain shrink(const Domain& D, double margin) {
    if (margin <= 0.0) throw std::invalid_argument("shrink: margin <= 0");
    if (margin >= D.inradius())
        throw std::invalid_argument("shrink: margin >= inradius (empty subdomain)");
    switch (D.kind) {
        case Domain::Kind::ball:
            return Domain::ball(D.center, D.radius - margin);
        case Domain::Kind::box: {
            Vec lo = D.lo, hi = D.hi;
            for (int i = 0; i < D.dim; ++i) {
                lo[i] += margin;
                hi[i] -= margin;
            }
            return Domain::box(lo, hi);
        }
        case Domain::Kind::general: {
            auto dist = D.distance_fn;
            Vec lo = D.lo, hi = D.hi;
            return Domain::general(
                D.dim,
                [dist, margin](const Vec& x) { return dist(x) - margin > 0.0; },
                [dist, margin](const Vec& x) { return dist(x) - margin; }, lo, hi);
        }
    }
    throw std::logic_error("shrink: unreachable");
}

/// Affine map y = (x - shift) * scale.
struct Similarity {
    double scale = 1.0;
    Vec shift;

    Vec forward(const Vec& x) const { return (x - shift) * scale; }
    Vec inverse(const Vec& y) const {
        Vec x = y * (1.0 / scale);
        return x + shift;
    }
};

/// Similarity mapping D into B(0; 1/2); the 0.99 factor keeps the closure
/// strictly inside under rounding. Returns the mapped domain and the map.
inline std::pair<Domain, Similarity> rescale_to_half_ball(const Domain& D) {
    Vec c = Vec::zero(D.dim);
    for (int i = 0; i < D.dim; ++i) c[i] = 0.5 * (D.lo[i] + D.hi[i]);
    double circum;  // radius of a ball around c containing D
    if (D.kind == Domain::Kind::ball) {
        c = D.center;
        circum = D.radius;
    } else {
        circum = (D.hi - c).norm();
    }
    Similarity sim{0.99 * 0.5 / circum, c};
    double s = sim.scale;
    switch (D.kind) {
        case Domain::Kind::ball:
            return {Domain::ball(Vec::zero(D.dim), D.radius * s), sim};
        case Domain::Kind::box:
            return {Domain::box(sim.forward(D.lo), sim.forward(D.hi)), sim};
        case Domain::Kind::general: {
            auto ind = D.indicator_fn;
            auto dist = D.distance_fn;
            return {Domain::general(
                        D.dim,
                        [ind, sim](const Vec& y) { return ind(sim.inverse(y)); },
                        [dist, sim, s](const Vec& y) { return s * dist(sim.inverse(y)); },
                        sim.forward(D.lo), sim.forward(D.hi)),
                    sim};
        }
    }
    throw std::logic_error("rescale_to_half_ball: unreachable");
}

/// G(x) = f(x/scale + shift), the field seen from the rescaled frame.
inline ScalarField pullback_field(const ScalarField& f, double scale, const Vec& shift) {
    if (scale <= 0.0) throw std::invalid_argument("pullback_field: scale <= 0");
    Similarity sim{scale, shift};
    return ScalarField([f, sim](const Vec& y) { return f(sim.inverse(y)); }, f.dim,
                       f.smoothness_hint);
}

/// Dense regular-grid sample of a field over a box, with multilinear or
/// per-axis cubic interpolation. Node values are reproduced exactly.
struct GridField {
    enum class Interp { linear, cubic };

    int dim = 0;
    Vec origin;
    double spacing = 0.0;
    std::array<int, kMaxDim> extents{};  // nodes per axis
    std::vector<double> values;          // last axis fastest
    Interp interp = Interp::linear;

    GridField() = default;
    GridField(int n, const Vec& org, double h, std::array<int, kMaxDim> ext,
              Interp ip = Interp::linear)
        : dim(n), origin(org), spacing(h), extents(ext), interp(ip) {
        if (h <= 0.0) throw std::invalid_argument("GridField: spacing <= 0");
        size_t total = 1;
        for (int i = 0; i < n; ++i) total *= static_cast<size_t>(extents[i]);
        values.assign(total, 0.0);
    }

    size_t index(const std::array<int, kMaxDim>& id) const {
        size_t ix = 0;
        for (int i = 0; i < dim; ++i) ix = ix * extents[i] + id[i];
        return ix;
    }
    double& at(const std::array<int, kMaxDim>& id) { return values[index(id)]; }
    double at(const std::array<int, kMaxDim>& id) const { return values[index(id)]; }

    Vec node(const std::array<int, kMaxDim>& id) const {
        Vec x = origin;
        for (int i = 0; i < dim; ++i) x[i] += spacing * id[i];
        return x;
    }

    double interpolate(const Vec& x) const {
        std::array<int, kMaxDim> base{};
        std::array<double, kMaxDim> frac{};
        for (int i = 0; i < dim; ++i) {
            double u = (x[i] - origin[i]) / spacing;
            double fl = std::floor(u);
            int b = static_cast<int>(fl);
            double fr = u - fl;
            // snap to node if within rounding; guarantees exact node values
            if (fr < 1e-12) fr = 0.0;
            if (fr > 1.0 - 1e-12) {
                fr = 0.0;
                b += 1;
            }
            b = std::clamp(b, 0, extents[i] - 1);
            if (b == extents[i] - 1 && fr > 0.0) {
                b = extents[i] - 2;
                fr = 1.0;
            }
            base[i] = b;
            frac[i] = fr;
        }
        if (interp == Interp::linear) return interp_linear(base, frac, 0);
        return interp_cubic(base, frac, 0);
    }

    ScalarField as_field() const {
        GridField copy = *this;
        return ScalarField([g = std::move(copy)](const Vec& x) { return g.interpolate(x); },
                           dim, ScalarField::Smoothness::c0);
    }

  private:
    double interp_linear(std::array<int, kMaxDim> id, const std::array<double, kMaxDim>& fr,
                         int axis) const {
        if (axis == dim) return at(id);
        double a = interp_linear(id, fr, axis + 1);
        if (fr[axis] == 0.0) return a;
        id[axis] += 1;
        double b = interp_linear(id, fr, axis + 1);
        return a + fr[axis] * (b - a);
    }

    // 4-point Lagrange per axis; falls back to linear near the edge
    double interp_cubic(std::array<int, kMaxDim> id, const std::array<double, kMaxDim>& fr,
                        int axis) const {
        if (axis == dim) return at(id);
        int b = id[axis];
        double t = fr[axis];
        if (t == 0.0) return interp_cubic(id, fr, axis + 1);
        if (b < 1 || b + 2 >= extents[axis]) {
            double a0 = interp_cubic(id, fr, axis + 1);
            id[axis] = b + 1;
            double a1 = interp_cubic(id, fr, axis + 1);
            id[axis] = b;
            return a0 + t * (a1 - a0);
        }
        double v[4];
        for (int j = 0; j < 4; ++j) {
            id[axis] = b - 1 + j;
            v[j] = interp_cubic(id, fr, axis + 1);
        }
        id[axis] = b;
        double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        return w0 * v[0] + w1 * v[1] + w2 * v[2] + w3 * v[3];
    }
};

}  // namespace polyharm
