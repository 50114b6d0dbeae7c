// Finite-difference Dirichlet and iterated-Laplacian solvers on a regular
// grid, plus the compactly supported remainder F_r = f - h_f.
//
// Curved boundaries use Shortley-Weller cut stencils: each boundary arm is
// shortened to the crossing point found by bisection on the signed distance,
// and the boundary value is imposed there. The scheme stays second order on
// the disk/ball and satisfies a discrete maximum principle.
#pragma once

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

#include <stdexcept>
#include <vector>

#include "polyharm/field.hpp"

namespace polyharm {

namespace detail {

/// Fraction alpha in (0, 1] of the arm from inside node `a` toward `b`
/// where the boundary is crossed. Requires bd(a) > 0 >= bd(b).
inline double boundary_fraction(const Domain& D, const Vec& a, const Vec& b) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        Vec x = a;
        for (int i = 0; i < a.dim; ++i) x[i] += mid * (b[i] - a[i]);
        if (D.boundary_distance(x) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return std::max(0.5 * (lo + hi), 1e-9);
}

struct Lattice {
    Vec origin;
    double h = 0.0;
    std::array<int, kMaxDim> ext{};
    int dim = 0;

    size_t size() const {
        size_t t = 1;
        for (int i = 0; i < dim; ++i) t *= static_cast<size_t>(ext[i]);
        return t;
    }
    size_t flat(const std::array<int, kMaxDim>& id) const {
        size_t ix = 0;
        for (int i = 0; i < dim; ++i) ix = ix * ext[i] + id[i];
        return ix;
    }
    Vec node(const std::array<int, kMaxDim>& id) const {
        Vec x = origin;
        for (int i = 0; i < dim; ++i) x[i] += h * id[i];
        return x;
    }
};

inline Lattice make_lattice(const Domain& D, double h) {
    Lattice L;
    L.dim = D.dim;
    L.h = h;
    L.origin = D.lo;
    for (int i = 0; i < D.dim; ++i) {
        L.origin[i] -= 2.0 * h;
        double span = D.hi[i] - D.lo[i];
        L.ext[i] = static_cast<int>(std::llround(span / h)) + 5;
    }
    return L;
}

}  // namespace detail

/// Solve Delta u = rhs (0 if absent) in D with u = boundary_data on the
/// boundary, by the 5/7-point Shortley-Weller stencil and a preconditioned
/// BiCGStab iteration to relative residual <= tol. Outside nodes of the
/// returned grid carry linear extrapolations through the boundary value so
/// that interpolation stays second order up to the boundary.
inline GridField solve_dirichlet(const ScalarField& boundary_data, const GridField* rhs,
                                 const Domain& D, double spacing, double tol,
                                 double* residual_out = nullptr) {
    if (spacing <= 0.0) throw std::invalid_argument("solve_dirichlet: spacing <= 0");
    if (D.inradius() < 8.0 * spacing)
        throw std::invalid_argument("solve_dirichlet: spacing too coarse for the domain");
    detail::Lattice L = detail::make_lattice(D, spacing);
    size_t total = L.size();
    const double h = spacing;

    std::vector<char> inside(total, 0);
    std::vector<int> unknown(total, -1);
    std::vector<std::array<int, kMaxDim>> ids;
    {
        std::array<int, kMaxDim> id{};
        for (size_t f = 0; f < total; ++f) {
            Vec x = L.node(id);
            if (D.boundary_distance(x) > 0.0) inside[f] = 1;
            int a = L.dim - 1;
            while (a >= 0 && ++id[a] == L.ext[a]) id[a--] = 0;
        }
    }
    int nunk = 0;
    {
        std::array<int, kMaxDim> id{};
        for (size_t f = 0; f < total; ++f) {
            if (inside[f]) {
                unknown[f] = nunk++;
                ids.push_back(id);
            }
            int a = L.dim - 1;
            while (a >= 0 && ++id[a] == L.ext[a]) id[a--] = 0;
        }
    }
    if (nunk == 0) throw std::runtime_error("solve_dirichlet: no interior nodes");

    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    trips.reserve(static_cast<size_t>(nunk) * (2 * L.dim + 1));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nunk);

    for (int row = 0; row < nunk; ++row) {
        const auto& id = ids[static_cast<size_t>(row)];
        size_t f = L.flat(id);
        Vec xp = L.node(id);
        double diag = 0.0;
        double rhs_val = rhs ? rhs->at(id) : 0.0;
        b[row] += -rhs_val;  // solving -Delta u = -rhs, positive definite diag
        for (int a = 0; a < L.dim; ++a) {
            double alpha[2] = {1.0, 1.0};
            double bval[2] = {0.0, 0.0};
            int nidx[2] = {-1, -1};
            for (int s = 0; s < 2; ++s) {
                auto nid = id;
                nid[a] += (s == 0 ? 1 : -1);
                size_t nf = L.flat(nid);
                if (inside[nf]) {
                    nidx[s] = unknown[nf];
                } else {
                    Vec xn = L.node(nid);
                    double al = detail::boundary_fraction(D, xp, xn);
                    alpha[s] = al;
                    Vec xb = xp;
                    for (int i = 0; i < L.dim; ++i) xb[i] += al * (xn[i] - xp[i]);
                    bval[s] = boundary_data(xb);
                }
            }
            double ap = alpha[0], am = alpha[1];
            double cp = 2.0 / (ap * (ap + am) * h * h);
            double cm = 2.0 / (am * (ap + am) * h * h);
            diag += 2.0 / (ap * am * h * h);
            for (int s = 0; s < 2; ++s) {
                double c = (s == 0) ? cp : cm;
                if (nidx[s] >= 0)
                    trips.emplace_back(row, nidx[s], -c);
                else
                    b[row] += c * bval[s];
            }
        }
        trips.emplace_back(row, row, diag);
    }

    Eigen::SparseMatrix<double, Eigen::RowMajor> A(nunk, nunk);
    A.setFromTriplets(trips.begin(), trips.end());

    Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>,
                    Eigen::IncompleteLUT<double>> solver;
    solver.preconditioner().setDroptol(1e-5);
    solver.preconditioner().setFillfactor(12);
    solver.setTolerance(tol);
    solver.setMaxIterations(20000);
    solver.compute(A);
    Eigen::VectorXd u = solver.solve(b);
    double rel = (A * u - b).norm() / std::max(b.norm(), 1e-300);
    if (solver.info() != Eigen::Success || rel > tol * 10.0)
        throw std::runtime_error("solve_dirichlet: iteration did not converge, residual " +
                                 std::to_string(rel));
    if (residual_out) *residual_out = rel;

    GridField out(L.dim, L.origin, h, L.ext);
    // interior values
    {
        std::array<int, kMaxDim> id{};
        for (size_t f = 0; f < total; ++f) {
            if (inside[f]) out.values[f] = u[unknown[f]];
            int a = L.dim - 1;
            while (a >= 0 && ++id[a] == L.ext[a]) id[a--] = 0;
        }
    }
    // outside values: extrapolate through the boundary crossing from an
    // interior neighbour; nodes with no usable neighbour take the trace field
    {
        std::array<int, kMaxDim> id{};
        for (size_t f = 0; f < total; ++f) {
            if (!inside[f]) {
                Vec xq = L.node(id);
                double acc = 0.0;
                int cnt = 0;
                for (int a = 0; a < L.dim; ++a) {
                    for (int s = -1; s <= 1; s += 2) {
                        auto nid = id;
                        nid[a] += s;
                        if (nid[a] < 0 || nid[a] >= L.ext[a]) continue;
                        size_t nf = L.flat(nid);
                        if (!inside[nf]) continue;
                        Vec xn = L.node(nid);
                        double beta = detail::boundary_fraction(D, xn, xq);
                        if (beta < 0.05) continue;
                        Vec xb = xn;
                        for (int i = 0; i < L.dim; ++i) xb[i] += beta * (xq[i] - xn[i]);
                        double gb = boundary_data(xb);
                        double un = out.values[nf];
                        acc += un + (gb - un) / beta;
                        ++cnt;
                    }
                }
                out.values[f] = cnt > 0 ? acc / cnt : boundary_data(xq);
            }
            int a = L.dim - 1;
            while (a >= 0 && ++id[a] == L.ext[a]) id[a--] = 0;
        }
    }
    return out;
}

/// Levels u_r, ..., u_0 of the iterated Dirichlet problem
///   Delta^{r+1} h_f = 0 in D,  Delta^j h_f = Delta^j f on the boundary.
struct BvpSolution {
    int r = 0;
    std::vector<GridField> levels;  // levels[0] = u_r, levels[r] = u_0 = h_f
    Domain domain;
    double grid_spacing = 0.0;
    std::vector<double> residual_norms;

    const GridField& harmonic_part() const { return levels.back(); }
};

/// laplacians = {f, Delta f, ..., Delta^r f} in closed form.
inline BvpSolution solve_iterated(const ScalarField& f,
                                  const std::vector<ScalarField>& laplacians,
                                  const Domain& D, double spacing, double tol) {
    if (laplacians.empty()) throw std::invalid_argument("solve_iterated: empty laplacian list");
    (void)f;
    int r = static_cast<int>(laplacians.size()) - 1;
    BvpSolution sol;
    sol.r = r;
    sol.domain = D;
    sol.grid_spacing = spacing;
    const GridField* prev = nullptr;
    for (int j = r; j >= 0; --j) {
        double res = 0.0;
        GridField uj = solve_dirichlet(laplacians[static_cast<size_t>(j)], prev, D,
                                       spacing, tol, &res);
        sol.levels.push_back(std::move(uj));
        sol.residual_norms.push_back(res);
        prev = &sol.levels.back();
    }
    return sol;
}

/// F_r(x) = f(x) - h_f(x) on the closure of D, 0 outside.
inline ScalarField build_remainder(const ScalarField& f, const BvpSolution& sol,
                                   const Domain& D) {
    GridField hf = sol.harmonic_part();
    return ScalarField(
        [f, hf, D](const Vec& x) {
            if (!D.contains_closure(x)) return 0.0;
            return f(x) - hf.interpolate(x);
        },
        f.dim, ScalarField::Smoothness::c0);
}

}  // namespace polyharm
