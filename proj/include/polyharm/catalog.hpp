// Catalog of analytic test fields with closed-form iterated Laplacians,
// spanning the harmonic / constant-Laplacian / smooth / nonsmooth regimes.
// Supplied Laplacians are verified against finite differences when the
// catalog is first accessed.
#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyharm/field.hpp"

namespace polyharm {

struct TestField {
    std::string id;
    int dim = 2;
    ScalarField field;                    // = laplacians[0]
    std::vector<ScalarField> laplacians;  // Delta^0 f ... Delta^rmax f
    ScalarField::Smoothness smoothness = ScalarField::Smoothness::c2;
    std::string notes;

    int r_max() const { return static_cast<int>(laplacians.size()) - 1; }
    bool has_laplacian() const { return laplacians.size() > 1; }
};

namespace detail {

// 4th-order finite-difference Laplacian used by the catalog self-check
inline double fd_laplacian(const ScalarField& f, const Vec& x, double h) {
    double acc = 0.0;
    for (int a = 0; a < f.dim; ++a) {
        Vec e = Vec::zero(f.dim);
        e[a] = 1.0;
        double fp1 = f(axpy(x, h, e)), fm1 = f(axpy(x, -h, e));
        double fp2 = f(axpy(x, 2 * h, e)), fm2 = f(axpy(x, -2 * h, e));
        acc += (-fp2 + 16.0 * fp1 - 30.0 * f(x) + 16.0 * fm1 - fm2) / (12.0 * h * h);
    }
    return acc;
}

inline void verify_field(const TestField& tf) {
    if (!tf.has_laplacian()) return;
    std::mt19937_64 eng(0x5eedULL + tf.dim);
    std::uniform_real_distribution<double> uni(-0.45, 0.45);
    const double h = 1e-3;
    for (size_t j = 0; j + 1 < tf.laplacians.size(); ++j) {
        for (int pt = 0; pt < 20; ++pt) {
            Vec x = Vec::zero(tf.dim);
            for (int i = 0; i < tf.dim; ++i) x[i] = uni(eng);
            double fd = fd_laplacian(tf.laplacians[j], x, h);
            double cf = tf.laplacians[j + 1](x);
            if (std::abs(fd - cf) > 1e-4 * std::max(1.0, std::abs(cf)))
                throw std::logic_error("catalog: Laplacian mismatch for field '" + tf.id +
                                       "' level " + std::to_string(j));
        }
    }
}

// C-infinity compactly supported bump with a Gaussian-like core:
// f = exp(c (1 - 1/w)), w = 1 - |x|^2 / rho^2, supported in |x| < rho.
inline constexpr double kBumpRho = 0.8;
inline constexpr double kBumpSharpness = 4.0;

inline double bump_value(double s) {
    const double q = kBumpRho * kBumpRho, c = kBumpSharpness;
    double w = 1.0 - s / q;
    if (w <= 1e-3) return 0.0;
    return std::exp(c * (1.0 - 1.0 / w));
}

inline double bump_laplacian(double s, int n) {
    const double q = kBumpRho * kBumpRho, c = kBumpSharpness;
    double w = 1.0 - s / q;
    if (w <= 1e-3) return 0.0;
    double g = std::exp(c * (1.0 - 1.0 / w));
    double gp = -(c / q) * g / (w * w);
    double gpp = (c / (q * q)) * g * (c / (w * w * w * w) - 2.0 / (w * w * w));
    return 4.0 * s * gpp + 2.0 * n * gp;
}

inline std::vector<TestField> build_catalog() {
    using S = ScalarField::Smoothness;
    std::vector<TestField> cat;
    auto add = [&cat](TestField tf) {
        tf.field = tf.laplacians.front();
        cat.push_back(std::move(tf));
    };

    for (int n : {2, 3}) {
        add({"const", n, {},
             {constant_field(n, 3.0), constant_field(n, 0.0)},
             S::c_inf, "f = 3"});
        add({"linear", n, {},
             {ScalarField([](const Vec& x) { return x[0]; }, n, S::c_inf),
              constant_field(n, 0.0)},
             S::c_inf, "f = x1, harmonic"});
        add({"harmonic_saddle", n, {},
             {ScalarField([](const Vec& x) { return x[0] * x[0] - x[1] * x[1]; }, n, S::c_inf),
              constant_field(n, 0.0)},
             S::c_inf, "f = x1^2 - x2^2, harmonic"});
        add({"radial_sq", n, {},
             {ScalarField([](const Vec& x) { return x.norm2(); }, n, S::c_inf),
              constant_field(n, 2.0 * n), constant_field(n, 0.0)},
             S::c_inf, "f = |x|^2, constant Laplacian"});
        {
            double c1 = 8.0 + 4.0 * n;  // Delta |x|^4 = (8+4n)|x|^2
            add({"radial_quartic", n, {},
                 {ScalarField([](const Vec& x) { double s = x.norm2(); return s * s; }, n,
                              S::c_inf),
                  ScalarField([c1](const Vec& x) { return c1 * x.norm2(); }, n, S::c_inf),
                  constant_field(n, c1 * 2.0 * n), constant_field(n, 0.0)},
                 S::c_inf, "f = |x|^4"});
        }
        add({"gauss_bump", n, {},
             {ScalarField([](const Vec& x) { return bump_value(x.norm2()); }, n, S::c_inf),
              ScalarField([n](const Vec& x) { return bump_laplacian(x.norm2(), n); }, n,
                          S::c_inf)},
             S::c_inf, "smoothed Gaussian, compactly supported in |x| < 0.8"});
        add({"cone", n, {},
             {ScalarField([](const Vec& x) { return x.norm(); }, n, S::c0)},
             S::c0, "f = |x|, C0 only"});
    }
    add({"harmonic_re_z3", 2, {},
         {ScalarField([](const Vec& x) { return x[0] * (x[0] * x[0] - 3.0 * x[1] * x[1]); },
                      2, S::c_inf),
          constant_field(2, 0.0)},
         S::c_inf, "Re z^3, harmonic"});
    // sine products: eigenfields, Delta^j f = (-n)^j f
    add({"sine_product", 2, {},
         {ScalarField([](const Vec& x) { return std::sin(x[0]) * std::sin(x[1]); }, 2,
                      S::c_inf),
          ScalarField([](const Vec& x) { return -2.0 * std::sin(x[0]) * std::sin(x[1]); },
                      2, S::c_inf),
          ScalarField([](const Vec& x) { return 4.0 * std::sin(x[0]) * std::sin(x[1]); }, 2,
                      S::c_inf),
          ScalarField([](const Vec& x) { return -8.0 * std::sin(x[0]) * std::sin(x[1]); },
                      2, S::c_inf)},
         S::c_inf, "sin x1 sin x2, Laplacian eigenfield"});
    add({"sine_product", 3, {},
         {ScalarField(
              [](const Vec& x) { return std::sin(x[0]) * std::sin(x[1]) * std::sin(x[2]); },
              3, S::c_inf),
          ScalarField(
              [](const Vec& x) {
                  return -3.0 * std::sin(x[0]) * std::sin(x[1]) * std::sin(x[2]);
              },
              3, S::c_inf),
          ScalarField(
              [](const Vec& x) {
                  return 9.0 * std::sin(x[0]) * std::sin(x[1]) * std::sin(x[2]);
              },
              3, S::c_inf)},
         S::c_inf, "sin x1 sin x2 sin x3"});
    for (auto& tf : cat) verify_field(tf);
    return cat;
}

}  // namespace detail

/// The verified catalog (built and checked on first access).
inline const std::vector<TestField>& catalog() {
    static const std::vector<TestField> cat = detail::build_catalog();
    return cat;
}

inline const TestField& catalog_get(const std::string& id, int dim) {
    for (const TestField& tf : catalog())
        if (tf.id == id && tf.dim == dim) return tf;
    throw std::invalid_argument("catalog: no field '" + id + "' in dimension " +
                                std::to_string(dim));
}

inline std::optional<ScalarField> catalog_laplacian(const TestField& tf) {
    if (!tf.has_laplacian()) return std::nullopt;
    return tf.laplacians[1];
}

}  // namespace polyharm
