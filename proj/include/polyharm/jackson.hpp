// Jackson-type kernels: periodic [sin(nu t/2)/sin(t/2)]^{2k}, the
// nonperiodic radialization through x = 2 sin(t/2), and the polyharmonic
// kernel normalized to unit integral over the unit ball.
//
// The trigonometric expansion is carried in exact integer arithmetic
// (iterated convolution of Fejer coefficient sequences); cos(j t) maps to
// T_j(1 - s/2) with s = |x|^2, so the kernel is a polynomial in s of degree
// k(nu-1). Evaluation goes through Clenshaw recurrence on the Chebyshev
// coefficients, which stays stable at degrees where the monomial basis
// has long since collapsed.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyharm/field.hpp"
#include "polyharm/sphere.hpp"

namespace polyharm {

struct KernelParams {
    int k = 1;
    int nu = 1;
    int dim = 2;
    std::optional<int> p_target;

    static KernelParams for_target(int p, int k, int dim) {
        if (p < 1) throw std::invalid_argument("KernelParams: p < 1");
        if (k < 1) throw std::invalid_argument("KernelParams: k < 1");
        KernelParams kp;
        kp.k = k;
        kp.nu = (p - 1) / k + 1;
        kp.dim = dim;
        kp.p_target = p;
        return kp;
    }

    void validate() const {
        if (k < 1 || nu < 1 || dim < 2)
            throw std::invalid_argument("KernelParams: need k >= 1, nu >= 1, dim >= 2");
        if (p_target) {
            if (nu != (*p_target - 1) / k + 1)
                throw std::invalid_argument("KernelParams: nu inconsistent with p_target");
            if (k * (nu - 1) + 1 > *p_target)
                throw std::invalid_argument("KernelParams: order exceeds p_target");
        }
    }
};

namespace detail {

/// Fourier coefficients of [sin(nu t/2)/sin(t/2)]^{2k} as cosine series
/// b_0 + sum_{j>=1} b_j cos(j t), computed exactly in int64. The base factor
/// is the Fejer-type square with coefficients nu - |j|.
inline std::vector<long long> jackson_cos_coeffs(int k, int nu) {
    if (k < 1 || nu < 1) throw std::invalid_argument("jackson_cos_coeffs: bad k/nu");
    // total mass nu^{2k} must fit in int64
    if (2.0 * k * std::log2(static_cast<double>(nu)) > 62.0)
        throw std::overflow_error("jackson_cos_coeffs: nu^{2k} exceeds int64");
    // full (symmetric) Fourier arrays indexed by offset
    std::vector<long long> base(2 * nu - 1);
    for (int j = -(nu - 1); j <= nu - 1; ++j)
        base[static_cast<size_t>(j + nu - 1)] = nu - std::abs(j);
    std::vector<long long> acc = {1};  // degree-0 series
    int acc_deg = 0;
    for (int rep = 0; rep < k; ++rep) {
        int deg = acc_deg + (nu - 1);
        std::vector<long long> next(2 * static_cast<size_t>(deg) + 1, 0);
        for (int a = -acc_deg; a <= acc_deg; ++a) {
            long long va = acc[static_cast<size_t>(a + acc_deg)];
            if (va == 0) continue;
            for (int b = -(nu - 1); b <= nu - 1; ++b)
                next[static_cast<size_t>(a + b + deg)] +=
                    va * base[static_cast<size_t>(b + nu - 1)];
        }
        acc = std::move(next);
        acc_deg = deg;
    }
    std::vector<long long> cosc(static_cast<size_t>(acc_deg) + 1);
    cosc[0] = acc[static_cast<size_t>(acc_deg)];
    for (int j = 1; j <= acc_deg; ++j)
        cosc[static_cast<size_t>(j)] = 2 * acc[static_cast<size_t>(acc_deg + j)];
    return cosc;
}

/// Clenshaw evaluation of sum b_j T_j(u).
inline double clenshaw(const std::vector<double>& b, double u) {
    double d1 = 0.0, d2 = 0.0;
    for (size_t j = b.size(); j-- > 1;) {
        double d0 = 2.0 * u * d1 - d2 + b[j];
        d2 = d1;
        d1 = d0;
    }
    return u * d1 - d2 + (b.empty() ? 0.0 : b[0]);
}

}  // namespace detail

/// Periodic Jackson kernel of exponent k and order nu, normalized so that
/// (1/pi) integral_{-pi}^{pi} eval dt = 1. gamma is exact: twice the
/// constant Fourier coefficient of the power.
struct PeriodicKernel {
    int k = 1, nu = 1;
    double gamma = 2.0;

    double operator()(double t) const {
        double s = std::sin(0.5 * t);
        double raw;
        if (std::abs(s) < 1e-9) {
            raw = std::pow(static_cast<double>(nu), 2 * k);
        } else {
            raw = std::pow(std::sin(0.5 * nu * t) / s, 2 * k);
        }
        return raw / gamma;
    }
};

inline PeriodicKernel periodic_kernel(int k, int nu) {
    auto cosc = detail::jackson_cos_coeffs(k, nu);
    PeriodicKernel pk;
    pk.k = k;
    pk.nu = nu;
    pk.gamma = 2.0 * static_cast<double>(cosc[0]);
    return pk;
}

/// Monomial coefficients of the unnormalized radial polynomial q0 with
/// q0(|x|^2) = [sin(nu t/2)/sin(t/2)]^{2k} under x = 2 sin(t/2).
/// Computed exactly (rational arithmetic) and rounded once at the end.
/// Degrees above 60 are refused: the monomial basis on s in [0,4] is
/// useless there, callers must stay with the Chebyshev form.
inline std::vector<double> radial_polynomial(int k, int nu) {
    int deg = k * (nu - 1);
    if (deg > 60)
        throw std::overflow_error("radial_polynomial: degree k(nu-1) > 60 (monomial cap)");
    using rat = boost::multiprecision::cpp_rational;
    auto cosc = detail::jackson_cos_coeffs(k, nu);
    // T_j(1 - s/2) as exact polynomials in s via the Chebyshev recurrence
    std::vector<rat> pjm1 = {rat(1)};            // T_0
    std::vector<rat> pj = {rat(1), rat(-1, 2)};  // T_1(1 - s/2)
    std::vector<rat> out(static_cast<size_t>(deg) + 1, rat(0));
    out[0] += rat(cosc[0]);
    if (deg >= 1) {
        for (size_t m = 0; m < pj.size(); ++m) out[m] += rat(cosc[1]) * pj[m];
    }
    for (int j = 2; j <= deg; ++j) {
        // p_{j} = (2 - s) p_{j-1} - p_{j-2}
        std::vector<rat> pn(static_cast<size_t>(j) + 1, rat(0));
        for (size_t m = 0; m < pj.size(); ++m) {
            pn[m] += rat(2) * pj[m];
            pn[m + 1] -= pj[m];
        }
        for (size_t m = 0; m < pjm1.size(); ++m) pn[m] -= pjm1[m];
        pjm1 = std::move(pj);
        pj = std::move(pn);
        for (size_t m = 0; m < pj.size(); ++m) out[m] += rat(cosc[j]) * pj[m];
    }
    std::vector<double> res(out.size());
    for (size_t m = 0; m < out.size(); ++m) res[m] = static_cast<double>(out[m]);
    return res;
}

/// Polyharmonic Jackson kernel J~(x) = q(|x|^2), |x| <= 2, normalized so
/// that the integral over the unit ball B(0;1) is exactly 1.
struct RadialKernel {
    KernelParams params;
    std::vector<double> cheb;    // normalized: q(s) = sum cheb_j T_j(1 - s/2)
    std::vector<double> poly_s;  // normalized monomial coefficients; empty if deg > 60
    double gamma = 0.0;          // Def. 3 constant of the periodic kernel
    double gamma_bar = 0.0;      // nonperiodic normalizer, diagnostic
    double norm_const = 0.0;     // Z: unit-ball integral of the raw q0

    int degree() const { return static_cast<int>(cheb.size()) - 1; }

    /// q(s), s = |x|^2 in [0, 4].
    double q(double s) const { return detail::clenshaw(cheb, 1.0 - 0.5 * s); }

    double operator()(const Vec& x) const { return q(x.norm2()); }
};

namespace detail {

/// integral_0^1 t^{pw} q(t^2) dt for a Chebyshev-form q of degree `deg`,
/// by Gauss-Legendre of exact polynomial order. Positive integrand, so
/// the sum has no cancellation.
inline double radial_poly_integral(const std::vector<double>& cheb, int pw) {
    int deg = static_cast<int>(cheb.size()) - 1;
    int npts = (2 * deg + pw) / 2 + 2;
    auto [gx, gw] = gauss_legendre(npts);
    double s = 0.0;
    for (int i = 0; i < npts; ++i) {
        double t = 0.5 * (gx[i] + 1.0), w = 0.5 * gw[i];
        s += w * std::pow(t, pw) * clenshaw(cheb, 1.0 - 0.5 * t * t);
    }
    return s;
}

}  // namespace detail

inline RadialKernel polyharmonic_kernel(const KernelParams& params) {
    params.validate();
    auto cosc = detail::jackson_cos_coeffs(params.k, params.nu);
    std::vector<double> raw(cosc.begin(), cosc.end());
    int n = params.dim;
    double gamma = 2.0 * raw[0];
    double gamma_bar = 2.0 * detail::radial_poly_integral(raw, 0);
    // Z = omega_n int_0^1 r^{n-1} q0(r^2) dr; q0 >= 0 and not identically 0
    double Z = sphere_area(n) * detail::radial_poly_integral(raw, n - 1);
    if (!(Z > 0.0)) throw std::logic_error("polyharmonic_kernel: nonpositive normalizer");
    RadialKernel K;
    K.params = params;
    K.cheb.resize(raw.size());
    for (size_t j = 0; j < raw.size(); ++j) K.cheb[j] = raw[j] / Z;
    K.gamma = gamma;
    K.gamma_bar = gamma_bar;
    K.norm_const = Z;
    if (params.k * (params.nu - 1) <= 60) {
        K.poly_s = radial_polynomial(params.k, params.nu);
        for (double& c : K.poly_s) c /= Z;
    }
    return K;
}

/// I_i = integral_0^1 t^{i+n-1} J~(t) dt by exact polynomial quadrature.
inline double moment(const RadialKernel& K, int i) {
    if (i < 0) throw std::invalid_argument("moment: i < 0");
    return detail::radial_poly_integral(K.cheb, i + K.params.dim - 1);
}

inline double moment(const KernelParams& params, int i) {
    return moment(polyharmonic_kernel(params), i);
}

/// Polyharmonic order of the kernel: a polynomial of degree m in |x|^2 is
/// annihilated by Delta^{m+1}. The degree is read off the Chebyshev
/// coefficients after trimming relative noise below 1e-9.
inline int polyharmonic_order_check(const RadialKernel& K) {
    double mx = 0.0;
    for (double c : K.cheb) mx = std::max(mx, std::abs(c));
    int deg = 0;
    for (size_t j = 0; j < K.cheb.size(); ++j)
        if (std::abs(K.cheb[j]) > 1e-9 * mx) deg = static_cast<int>(j);
    return deg + 1;
}

/// Radial Laplacian acting on polynomials in s = |x|^2:
/// Delta |x|^{2m} = 2m (2m + n - 2) |x|^{2(m-1)}.
inline std::vector<double> laplacian_poly_s(const std::vector<double>& coeffs, int dim) {
    if (coeffs.size() <= 1) return {};
    std::vector<double> out(coeffs.size() - 1, 0.0);
    for (size_t m = 1; m < coeffs.size(); ++m) {
        double mm = static_cast<double>(m);
        out[m - 1] = coeffs[m] * 2.0 * mm * (2.0 * mm + dim - 2.0);
    }
    return out;
}

}  // namespace polyharm
