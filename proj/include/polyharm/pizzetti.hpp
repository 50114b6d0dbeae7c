// The radial integral operator J0, its dimension constants, and the
// smoothing family g_{R,t} with its closed-form Laplacian.
#pragma once

#include <functional>
#include <stdexcept>

#include "polyharm/field.hpp"
#include "polyharm/sphere.hpp"

namespace polyharm {

/// Dimension constants tied to J0:
///   l_2 = 1,  l_n = 1/(n-2)        (n >= 3)
///   c_2 = 1/4, c_n = (n-2)/(2n)    (n >= 3), so J0[1;R] = c_n R^2
///   d_n = c_n l_n = 1/(2n)
///   v(t) = (J0[1;t])^-1 = 1/(c_n t^2)
struct PizzettiConstants {
    int dim = 2;
    double l_n = 1.0, c_n = 0.25, d_n = 0.25;

    static PizzettiConstants for_dim(int n) {
        if (n < 2) throw std::invalid_argument("PizzettiConstants: dim < 2");
        PizzettiConstants k;
        k.dim = n;
        k.l_n = (n == 2) ? 1.0 : 1.0 / (n - 2);
        k.c_n = (n == 2) ? 0.25 : (n - 2) / (2.0 * n);
        k.d_n = k.c_n * k.l_n;  // = 1/(2n)
        return k;
    }

    double v(double t) const { return 1.0 / (c_n * t * t); }
    double v_inv(double t) const { return c_n * t * t; }
};

/// J0[phi; R]. The substitution r = R u^2 tames the endpoint behaviour of
/// the n = 2 log factor; Gauss-Legendre in u then resolves smooth phi to
/// ~1e-12 with the default node count.
///   n  = 2:  int_0^R r log(R/r) phi(r) dr      = -4R^2 int_0^1 u^3 ln u phi(Ru^2) du
///   n >= 3:  int_0^R (r - r^{n-1} R^{2-n}) phi = 2R^2 int_0^1 (u^3 - u^{2n-1}) phi(Ru^2) du
inline double j0_apply(const std::function<double(double)>& phi, double R, int dim,
                       int quad_points = 96) {
    if (R <= 0.0) throw std::invalid_argument("j0_apply: R <= 0");
    if (quad_points < 16) throw std::invalid_argument("j0_apply: quad_points < 16");
    auto [gx, gw] = gauss_legendre(quad_points);
    double s = 0.0;
    if (dim == 2) {
        for (int i = 0; i < quad_points; ++i) {
            double u = 0.5 * (gx[i] + 1.0), w = 0.5 * gw[i];
            s += w * u * u * u * std::log(u) * phi(R * u * u);
        }
        return -4.0 * R * R * s;
    }
    for (int i = 0; i < quad_points; ++i) {
        double u = 0.5 * (gx[i] + 1.0), w = 0.5 * gw[i];
        s += w * (std::pow(u, 3) - std::pow(u, 2 * dim - 1)) * phi(R * u * u);
    }
    return 2.0 * R * R * s;
}

/// Both sides of the scaling identity J0_s[phi(st); R] = s^-2 J0_t[phi; sR],
/// computed by independent quadratures.
inline std::pair<double, double> j0_scaling_check(const std::function<double(double)>& phi,
                                                  double s, double R, int dim,
                                                  int quad_points = 96) {
    if (s <= 0.0) throw std::invalid_argument("j0_scaling_check: s <= 0");
    double lhs = j0_apply([&](double t) { return phi(s * t); }, R, dim, quad_points);
    double rhs = j0_apply(phi, s * R, dim, quad_points) / (s * s);
    return {lhs, rhs};
}

/// g_{R,t}(x) = v(t) R^-2 J0[ r -> mu0(f; x, r); tR ].  For harmonic f this
/// reproduces f exactly since v(t) J0[1; t] = 1.
/// If `admissible` is supplied, evaluation requires B(x; Rt) inside it.
inline ScalarField smoothing_field(const ScalarField& f, double R, double t,
                                   const SphereRule& rule, int quad_points = 64,
                                   const Domain* admissible = nullptr) {
    if (R <= 0.0 || t <= 0.0 || t > 1.0)
        throw std::invalid_argument("smoothing_field: need R > 0 and t in (0,1]");
    PizzettiConstants pc = PizzettiConstants::for_dim(f.dim);
    auto [gx, gw] = gauss_legendre(quad_points);
    std::vector<double> us(quad_points), ws(quad_points);
    for (int i = 0; i < quad_points; ++i) {
        us[i] = 0.5 * (gx[i] + 1.0);
        ws[i] = 0.5 * gw[i];
    }
    std::optional<Domain> dom;
    if (admissible) dom = *admissible;
    int n = f.dim;
    double pref = pc.v(t) / (R * R);
    return ScalarField(
        [f, rule, us, ws, R, t, n, pref, dom](const Vec& x) {
            if (dom && dom->boundary_distance(x) < R * t)
                throw std::runtime_error(
                    "smoothing_field: B(x; R t) not contained in the domain "
                    "(requires 0 < R < dist(D1, boundary))");
            double T = t * R;
            double s = 0.0;
            if (n == 2) {
                for (size_t i = 0; i < us.size(); ++i) {
                    double u = us[i];
                    s += ws[i] * u * u * u * std::log(u) *
                         spherical_mean(f, x, T * u * u, rule);
                }
                s *= -4.0 * T * T;
            } else {
                for (size_t i = 0; i < us.size(); ++i) {
                    double u = us[i];
                    s += ws[i] * (std::pow(u, 3) - std::pow(u, 2 * n - 1)) *
                         spherical_mean(f, x, T * u * u, rule);
                }
                s *= 2.0 * T * T;
            }
            return pref * s;
        },
        f.dim, ScalarField::Smoothness::c2);
}

/// Laplacian of g_{R,t} without numerical differentiation:
/// Delta g_{R,t}(x) = v(t) / (l_n R^2) * [mu0(f; x, Rt) - f(x)].
inline ScalarField smoothing_laplacian(const ScalarField& f, double R, double t,
                                       const SphereRule& rule,
                                       const Domain* admissible = nullptr) {
    if (R <= 0.0 || t <= 0.0 || t > 1.0)
        throw std::invalid_argument("smoothing_laplacian: need R > 0 and t in (0,1]");
    PizzettiConstants pc = PizzettiConstants::for_dim(f.dim);
    double pref = pc.v(t) / (pc.l_n * R * R);
    double h = R * t;
    std::optional<Domain> dom;
    if (admissible) dom = *admissible;
    return ScalarField(
        [f, rule, h, pref, dom](const Vec& x) {
            if (dom && dom->boundary_distance(x) < h)
                throw std::runtime_error(
                    "smoothing_laplacian: B(x; R t) not contained in the domain "
                    "(requires 0 < R < dist(D1, boundary))");
            return pref * harmonicity_difference(f, x, h, rule);
        },
        f.dim, ScalarField::Smoothness::c0);
}

}  // namespace polyharm
