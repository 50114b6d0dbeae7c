// Harmonicity modulus, classical moduli of continuity, and the
// K-functional estimator built from the smoothing family g_{R,t}.
//
// Suprema are taken over deterministic dyadic sample grids; reported
// values are lower bounds of the true suprema that converge as the
// densities increase, and every curve records how it was sampled.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polyharm/field.hpp"
#include "polyharm/pizzetti.hpp"
#include "polyharm/sphere.hpp"

namespace polyharm {

struct ModulusSampling {
    double x_density = 0.0;
    int t_refine = 16;
    std::string rule;
};

struct ModulusCurve {
    std::vector<double> radii;
    std::vector<double> values;
    std::vector<bool> clipped;  // radius exceeded the admissible (x,t) set
    std::string domain_tag;
    ModulusSampling sampling;

    double value_at(double u) const {
        for (size_t i = 0; i < radii.size(); ++i)
            if (std::abs(radii[i] - u) <= 1e-12 * (1.0 + u)) return values[i];
        throw std::invalid_argument("ModulusCurve: radius not in the grid");
    }
};

/// omega^h(f; u) over D for each u in u_grid: max of |Delta_t(f;x)| over
/// sampled x in D with boundary_distance(x) >= t and t on a refinement grid
/// of (0, u]. The running maximum enforces monotonicity exactly.
inline ModulusCurve harmonicity_modulus(const ScalarField& f, const Domain& D,
                                        const std::vector<double>& u_grid,
                                        double x_density, const SphereRule& rule,
                                        int t_refine = 16,
                                        const std::string& tag = "") {
    if (u_grid.empty()) throw std::invalid_argument("harmonicity_modulus: empty u_grid");
    for (size_t i = 0; i < u_grid.size(); ++i) {
        if (u_grid[i] <= 0.0) throw std::invalid_argument("harmonicity_modulus: u <= 0");
        if (i > 0 && u_grid[i] <= u_grid[i - 1])
            throw std::invalid_argument("harmonicity_modulus: u_grid not sorted");
    }
    // deduplicated t values, each feeding the smallest curve entry it belongs to
    std::map<double, size_t> tmap;
    for (size_t i = 0; i < u_grid.size(); ++i)
        for (int j = 1; j <= t_refine; ++j) {
            double t = u_grid[i] * j / t_refine;
            auto it = tmap.find(t);
            if (it == tmap.end())
                tmap[t] = i;
            else
                it->second = std::min(it->second, i);
        }

    std::vector<Vec> xs = sample_interior(D, x_density);
    std::vector<double> bd(xs.size());
    double max_bd = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        bd[i] = D.boundary_distance(xs[i]);
        max_bd = std::max(max_bd, bd[i]);
    }

    ModulusCurve curve;
    curve.radii = u_grid;
    curve.values.assign(u_grid.size(), 0.0);
    curve.clipped.assign(u_grid.size(), false);
    curve.domain_tag = tag;
    curve.sampling = {x_density, t_refine, rule.describe()};

    for (size_t i = 0; i < xs.size(); ++i) {
        for (const auto& [t, slot] : tmap) {
            if (t > bd[i]) break;  // map iterates in increasing t
            double v = std::abs(harmonicity_difference(f, xs[i], t, rule));
            if (v > curve.values[slot]) curve.values[slot] = v;
        }
    }
    for (size_t i = 1; i < curve.values.size(); ++i)
        curve.values[i] = std::max(curve.values[i], curve.values[i - 1]);
    for (size_t i = 0; i < u_grid.size(); ++i)
        curve.clipped[i] = u_grid[i] > max_bd;
    return curve;
}

/// Same modulus for a compactly supported field over the whole space:
/// x ranges over a box around the support, with no admissibility bound on
/// t, and points too far from the support (zero difference) are skipped.
inline ModulusCurve modulus_of_extension(const ScalarField& f, double support_radius,
                                         const std::vector<double>& u_grid,
                                         double x_density, const SphereRule& rule,
                                         int t_refine = 16,
                                         const std::string& tag = "R^n") {
    double u_max = u_grid.back();
    double reach = support_radius + u_max;
    Vec lo = Vec::zero(f.dim), hi = Vec::zero(f.dim);
    for (int i = 0; i < f.dim; ++i) {
        lo[i] = -reach;
        hi[i] = reach;
    }
    Domain box = Domain::box(lo, hi);
    std::vector<Vec> xs = sample_closure(box, x_density);

    std::map<double, size_t> tmap;
    for (size_t i = 0; i < u_grid.size(); ++i)
        for (int j = 1; j <= t_refine; ++j) {
            double t = u_grid[i] * j / t_refine;
            auto it = tmap.find(t);
            if (it == tmap.end())
                tmap[t] = i;
            else
                it->second = std::min(it->second, i);
        }

    ModulusCurve curve;
    curve.radii = u_grid;
    curve.values.assign(u_grid.size(), 0.0);
    curve.clipped.assign(u_grid.size(), false);
    curve.domain_tag = tag;
    curve.sampling = {x_density, t_refine, rule.describe()};

    for (const Vec& x : xs) {
        double nx = x.norm();
        for (const auto& [t, slot] : tmap) {
            if (nx > support_radius + t) continue;  // sphere misses the support
            double v = std::abs(harmonicity_difference(f, x, t, rule));
            if (v > curve.values[slot]) curve.values[slot] = v;
        }
    }
    for (size_t i = 1; i < curve.values.size(); ++i)
        curve.values[i] = std::max(curve.values[i], curve.values[i - 1]);
    return curve;
}

/// Sampled first and second moduli of continuity at scale u. Steps h run
/// over u*j/8 and the given direction set; segments must stay in the
/// closure of D.
inline std::pair<double, double> classical_moduli_dirs(const ScalarField& f,
                                                       const Domain& D,
                                                       const std::vector<Vec>& dirs,
                                                       const std::vector<double>& steps,
                                                       double x_density) {
    std::vector<Vec> xs = sample_closure(D, x_density);
    double w1 = 0.0, w2 = 0.0;
    for (const Vec& x : xs) {
        double fx = f(x);
        for (const Vec& d : dirs) {
            for (double h : steps) {
                Vec xp = axpy(x, h, d);
                Vec xm = axpy(x, -h, d);
                bool inp = D.contains_closure(xp);
                bool inm = D.contains_closure(xm);
                if (inp) w1 = std::max(w1, std::abs(f(xp) - fx));
                if (inp && inm)
                    w2 = std::max(w2, std::abs(f(xp) - 2.0 * fx + f(xm)));
            }
        }
    }
    return {w1, w2};
}

inline std::pair<double, double> classical_moduli(const ScalarField& f, const Domain& D,
                                                  double u, double x_density,
                                                  int dir_samples) {
    if (u <= 0.0) throw std::invalid_argument("classical_moduli: u <= 0");
    SphereRule dr = make_rule(f.dim, std::max(dir_samples, 4));
    std::vector<double> steps;
    for (int j = 1; j <= 8; ++j) steps.push_back(u * j / 8.0);
    return classical_moduli_dirs(f, D, dr.nodes, steps, x_density);
}

/// One candidate of the K-functional estimator: cost(t) = err_norm + t^2 lap_norm.
/// Smoothing candidates depend on (R, t_inner) only through z = R * t_inner.
struct KCandidate {
    std::string label;
    double z = 0.0;          // 0 for the trivial candidates
    double err_norm = 0.0;   // sup |f - g| on D1
    double lap_norm = 0.0;   // sup |Delta g| on D1
    double cost(double t) const { return err_norm + t * t * lap_norm; }
};

/// Candidate family {g_{R,t'}} U {0} U {f itself when a closed-form
/// Laplacian is supplied}. Sup norms are taken on the shared dyadic grid
/// of the closure of D1; Delta g comes from the closed form (Eq.-19 style),
/// not numerical differentiation.
inline std::vector<KCandidate> kfunctional_candidates(
    const ScalarField& f, const std::optional<ScalarField>& f_laplacian,
    const Domain& D1, const std::vector<double>& z_grid, const SphereRule& rule,
    double x_density, int quad_points = 64) {
    if (z_grid.empty()) throw std::invalid_argument("kfunctional_candidates: empty grid");
    PizzettiConstants pc = PizzettiConstants::for_dim(f.dim);
    std::vector<Vec> xs = sample_closure(D1, x_density);
    if (xs.empty()) throw std::runtime_error("kfunctional_candidates: empty sample set");

    std::vector<KCandidate> cands;
    {
        KCandidate zero{"zero", 0.0, 0.0, 0.0};
        for (const Vec& x : xs) zero.err_norm = std::max(zero.err_norm, std::abs(f(x)));
        cands.push_back(zero);
    }
    if (f_laplacian) {
        KCandidate self{"f", 0.0, 0.0, 0.0};
        for (const Vec& x : xs)
            self.lap_norm = std::max(self.lap_norm, std::abs((*f_laplacian)(x)));
        cands.push_back(self);
    }
    for (double z : z_grid) {
        if (z <= 0.0) throw std::invalid_argument("kfunctional_candidates: z <= 0");
        ScalarField g = smoothing_field(f, z, 1.0, rule, quad_points);
        KCandidate c{"g_z", z, 0.0, 0.0};
        double lap_pref = 1.0 / (pc.d_n * z * z);
        for (const Vec& x : xs) {
            c.err_norm = std::max(c.err_norm, std::abs(f(x) - g(x)));
            c.lap_norm = std::max(
                c.lap_norm, std::abs(lap_pref * harmonicity_difference(f, x, z, rule)));
        }
        cands.push_back(c);
    }
    return cands;
}

struct KFunctionalEstimate {
    double t = 0.0;
    double upper = 0.0;   // best candidate cost: upper bound of the infimum
    double lower = 0.0;   // omega^h(f; t)_{D1} / 2, from Lemma-1's constant
    double best_R = 0.0;  // representative (R, t_inner) of the best candidate
    double best_t_inner = 1.0;
    std::string best_label;
};

inline KFunctionalEstimate pick_best(const std::vector<KCandidate>& cands, double t,
                                     double lower) {
    KFunctionalEstimate e;
    e.t = t;
    e.lower = lower;
    e.upper = std::numeric_limits<double>::infinity();
    for (const KCandidate& c : cands) {
        double v = c.cost(t);
        if (v < e.upper) {
            e.upper = v;
            e.best_label = c.label;
            e.best_R = c.z;
            e.best_t_inner = c.z > 0.0 ? 1.0 : 0.0;
        }
    }
    return e;
}

/// K-functional estimator at scale t. candidate_R_grid x candidate_t_grid
/// defines the smoothing family (only the product R*t' matters); the
/// precondition of Thm. 3 requires max R < dist(D1, boundary of D).
inline KFunctionalEstimate k_functional(const ScalarField& f,
                                        const std::optional<ScalarField>& f_laplacian,
                                        const Domain& D1, double t,
                                        const std::vector<double>& candidate_R_grid,
                                        const std::vector<double>& candidate_t_grid,
                                        const SphereRule& rule, double x_density,
                                        std::optional<double> lower = std::nullopt) {
    if (candidate_R_grid.empty() || candidate_t_grid.empty())
        throw std::invalid_argument("k_functional: empty candidate grids");
    std::vector<double> zs;
    for (double R : candidate_R_grid)
        for (double tp : candidate_t_grid) {
            double z = R * tp;
            bool dup = false;
            for (double z0 : zs)
                if (std::abs(z0 - z) <= 1e-12 * z) dup = true;
            if (!dup) zs.push_back(z);
        }
    auto cands = kfunctional_candidates(f, f_laplacian, D1, zs, rule, x_density);
    double low = lower ? *lower
                       : 0.5 * harmonicity_modulus(f, D1, {t}, x_density, rule).values[0];
    return pick_best(cands, t, low);
}

struct EquivalenceRow {
    double t = 0.0;
    double omega_D = 0.0;
    double omega_D1 = 0.0;
    double k_upper = 0.0;
    double ratio_lemma1 = 0.0;  // omega_D1 / k_upper, <= 2 by Lemma 1
    double ratio_thm3 = 0.0;    // k_upper / omega_D, <= max(1, v(1)/l_n) by Thm 3
    bool degenerate = false;    // harmonic case: 0/0 flagged, never NaN
};

/// Per-t equivalence table between the modulus on D, the modulus on D1 and
/// the K-functional estimator on D1. Every t must satisfy
/// 0 < t < dist(D1, boundary of D).
inline std::vector<EquivalenceRow> equivalence_report(
    const ScalarField& f, const std::optional<ScalarField>& f_laplacian,
    const Domain& D, const Domain& D1, const std::vector<double>& t_grid,
    const std::vector<double>& z_grid, const SphereRule& rule, double x_density) {
    // dist(D1, boundary of D), estimated on the sample grid for general domains
    double dist = std::numeric_limits<double>::infinity();
    for (const Vec& x : sample_closure(D1, x_density))
        dist = std::min(dist, D.boundary_distance(x));
    for (double t : t_grid)
        if (!(t > 0.0 && t < dist))
            throw std::invalid_argument(
                "equivalence_report: t outside (0, dist(D1, boundary of D))");

    ModulusCurve om_D = harmonicity_modulus(f, D, t_grid, x_density, rule, 16, "D");
    ModulusCurve om_D1 = harmonicity_modulus(f, D1, t_grid, x_density, rule, 16, "D1");
    auto cands = kfunctional_candidates(f, f_laplacian, D1, z_grid, rule, x_density);

    double scale = 0.0;
    for (const KCandidate& c : cands)
        if (c.label == "zero") scale = c.err_norm;

    std::vector<EquivalenceRow> rows;
    for (size_t i = 0; i < t_grid.size(); ++i) {
        EquivalenceRow r;
        r.t = t_grid[i];
        r.omega_D = om_D.values[i];
        r.omega_D1 = om_D1.values[i];
        r.k_upper = pick_best(cands, r.t, 0.0).upper;
        double eps = 1e-13 * (1.0 + scale);
        if (r.omega_D <= eps && r.k_upper <= eps) {
            r.degenerate = true;
        } else {
            r.ratio_lemma1 = r.k_upper > 0.0 ? r.omega_D1 / r.k_upper : 0.0;
            r.ratio_thm3 = r.omega_D > 0.0 ? r.k_upper / r.omega_D : 0.0;
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace polyharm
