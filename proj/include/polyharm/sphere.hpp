// Quadrature on the unit sphere and the spherical mean, the primitive
// behind the harmonicity modulus and the smoothing operators.
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyharm/field.hpp"

namespace polyharm {

/// Gauss-Legendre nodes/weights on [-1, 1], by Newton iteration.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    return {x, w};
}

/// Quadrature rule computing the mean over the unit sphere: weights sum to 1,
/// so the 1/omega_n prefactor of the spherical mean never appears explicitly.
struct SphereRule {
    enum class Scheme { trapezoid, product_gauss, monte_carlo };

    int dim = 0;
    Scheme scheme = Scheme::trapezoid;
    std::vector<Vec> nodes;
    std::vector<double> weights;
    uint64_t seed = 0;

    std::string describe() const {
        switch (scheme) {
            case Scheme::trapezoid:
                return "trapezoid(" + std::to_string(nodes.size()) + ")";
            case Scheme::product_gauss:
                return "product_gauss(" + std::to_string(nodes.size()) + ")";
            case Scheme::monte_carlo:
                return "monte_carlo(" + std::to_string(nodes.size()) +
                       ",seed=" + std::to_string(seed) + ")";
        }
        return "?";
    }
};

namespace detail {
// Deterministic standard normals (Box-Muller over splitmix-seeded mt19937_64).
class NormalGen {
  public:
    explicit NormalGen(uint64_t seed) : eng_(seed) {}
    double operator()() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        double u1 = unit(), u2 = unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * M_PI * u2);
        have_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

  private:
    double unit() {
        // (0,1], avoids log(0)
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
    }
    std::mt19937_64 eng_;
    bool have_ = false;
    double cached_ = 0.0;
};
}  // namespace detail

/// Build a mean-value rule for the unit sphere in R^dim.
///  dim 2:  node_budget equally spaced angles;
///  dim 3:  Gauss-Legendre in the polar cosine x trapezoid in azimuth,
///          with n_polar = floor(sqrt(budget/2)), n_azimuth = 2 n_polar;
///  dim>=4: antithetic Monte Carlo pairs, seeded.
inline SphereRule make_rule(int dim, int node_budget,
                            std::optional<uint64_t> seed = std::nullopt) {
    if (dim < 2) throw std::invalid_argument("make_rule: dim < 2");
    if (node_budget < 4) throw std::invalid_argument("make_rule: node_budget < 4");
    SphereRule r;
    r.dim = dim;
    if (dim == 2) {
        r.scheme = SphereRule::Scheme::trapezoid;
        int n = node_budget;
        r.nodes.reserve(n);
        r.weights.assign(n, 1.0 / n);
        for (int j = 0; j < n; ++j) {
            double th = 2.0 * M_PI * j / n;
            r.nodes.push_back(Vec{std::cos(th), std::sin(th)});
        }
        return r;
    }
    if (dim == 3) {
        int np = static_cast<int>(std::floor(std::sqrt(node_budget / 2.0)));
        if (np < 2) throw std::invalid_argument("make_rule: budget too small for dim 3");
        int na = 2 * np;
        auto [gx, gw] = gauss_legendre(np);
        r.scheme = SphereRule::Scheme::product_gauss;
        r.nodes.reserve(static_cast<size_t>(np) * na);
        r.weights.reserve(static_cast<size_t>(np) * na);
        for (int i = 0; i < np; ++i) {
            double ct = gx[i], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
            for (int j = 0; j < na; ++j) {
                double ph = 2.0 * M_PI * j / na;
                r.nodes.push_back(Vec{st * std::cos(ph), st * std::sin(ph), ct});
                r.weights.push_back(gw[i] / (2.0 * na));
            }
        }
        return r;
    }
    // dim >= 4: antithetic pairs so odd harmonics cancel exactly
    r.scheme = SphereRule::Scheme::monte_carlo;
    r.seed = seed.value_or(0x9e3779b97f4a7c15ull);
    detail::NormalGen gen(r.seed);
    int pairs = node_budget / 2;
    r.nodes.reserve(2 * pairs);
    r.weights.assign(2 * pairs, 0.5 / pairs);
    for (int m = 0; m < pairs; ++m) {
        Vec z = Vec::zero(dim);
        double nrm = 0.0;
        do {
            for (int i = 0; i < dim; ++i) z[i] = gen();
            nrm = z.norm();
        } while (nrm < 1e-8);
        Vec xi = z * (1.0 / nrm);
        r.nodes.push_back(xi);
        r.nodes.push_back(xi * -1.0);
    }
    return r;
}

/// mu0(f; x, h): mean of f over the sphere of radius h about x.
inline double spherical_mean(const ScalarField& f, const Vec& x, double h,
                             const SphereRule& rule) {
    if (h <= 0.0) throw std::invalid_argument("spherical_mean: h <= 0");
    double s = 0.0;
    for (size_t j = 0; j < rule.nodes.size(); ++j)
        s += rule.weights[j] * f(axpy(x, h, rule.nodes[j]));
    return s;
}

/// Delta_h(f; x) = mu0(f; x, h) - f(x), computed in the centered form
/// sum_j w_j (f(x + h xi_j) - f(x)) so harmonic cancellation is exact
/// to rounding.
inline double harmonicity_difference(const ScalarField& f, const Vec& x, double h,
                                     const SphereRule& rule) {
    if (h <= 0.0) throw std::invalid_argument("harmonicity_difference: h <= 0");
    double fx = f(x);
    double s = 0.0;
    for (size_t j = 0; j < rule.nodes.size(); ++j)
        s += rule.weights[j] * (f(axpy(x, h, rule.nodes[j])) - fx);
    return s;
}

}  // namespace polyharm
