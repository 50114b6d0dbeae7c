// Experiment configuration, CSV/JSON-lines emission and the runners behind
// the CLI subcommands. Configs are flat key=value files plus command-line
// overrides; identical config + seed reruns produce byte-identical CSV.
#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "polyharm/approximant.hpp"
#include "polyharm/catalog.hpp"
#include "polyharm/dirichlet.hpp"
#include "polyharm/field.hpp"
#include "polyharm/jackson.hpp"
#include "polyharm/modulus.hpp"
#include "polyharm/pizzetti.hpp"
#include "polyharm/ratefit.hpp"
#include "polyharm/sphere.hpp"

namespace polyharm {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ExperimentConfig {
    std::string experiment;
    std::map<std::string, std::string> kv;
    std::string out_dir = ".";
    uint64_t seed = 0x9e3779b97f4a7c15ull;
    bool dump_grid = false;

    static ExperimentConfig from_file(const std::string& path) {
        ExperimentConfig cfg;
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open config file: " + path);
        std::string line;
        while (std::getline(in, line)) {
            size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            size_t eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto trim = [](std::string s) {
                size_t a = s.find_first_not_of(" \t\r");
                size_t b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            if (!key.empty()) cfg.kv[key] = val;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    std::string str(const std::string& key, const std::string& def) const {
        auto it = kv.find(key);
        return it == kv.end() ? def : it->second;
    }
    double num(const std::string& key, double def) const {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        try {
            return std::stod(it->second);
        } catch (...) {
            throw ValidationError("config key '" + key + "' is not a number: " + it->second);
        }
    }
    int integer(const std::string& key, int def) const {
        return static_cast<int>(std::llround(num(key, def)));
    }
    std::vector<double> list(const std::string& key, const std::string& def) const {
        std::string v = str(key, def);
        std::vector<double> out;
        std::stringstream ss(v);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (...) {
                throw ValidationError("config key '" + key + "' has a bad entry: " + tok);
            }
        }
        if (out.empty()) throw ValidationError("config key '" + key + "' is an empty list");
        return out;
    }

    std::string canonical() const {
        std::string s = "experiment=" + experiment + "\n";
        for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
        s += "seed=" + std::to_string(seed) + "\n";
        return s;
    }

    uint64_t hash() const {  // FNV-1a
        uint64_t h = 0xcbf29ce484222325ull;
        for (unsigned char c : canonical()) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return h;
    }
    std::string hash_hex() const {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
        return buf;
    }
};

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const ExperimentConfig& cfg,
              const std::vector<std::string>& extra_header,
              const std::vector<std::string>& columns)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
        out_ << "# manifest: " << cfg.hash_hex() << "\n";
        for (const auto& h : extra_header) out_ << "# " << h << "\n";
        for (size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }
    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i)
            out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
    }

  private:
    std::ofstream out_;
};

inline void dump_grid_csv(const GridField& g, const std::string& path,
                          const ExperimentConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "# manifest: " << cfg.hash_hex() << "\n";
    out << "# origin=(";
    for (int i = 0; i < g.dim; ++i) out << (i ? "," : "") << format_double(g.origin[i]);
    out << "), spacing=" << format_double(g.spacing) << ", dims=";
    for (int i = 0; i < g.dim; ++i) out << (i ? "x" : "") << g.extents[i];
    out << "\n";
    out << "value\n";
    for (double v : g.values) out << format_double(v) << "\n";
}

namespace detail {

inline Domain domain_from_config(const ExperimentConfig& cfg, int dim) {
    std::string kind = cfg.str("domain", "ball");
    double radius = cfg.num("radius", 1.0);
    if (kind == "ball") return Domain::ball(Vec::zero(dim), radius);
    if (kind == "box") {
        Vec lo = Vec::zero(dim), hi = Vec::zero(dim);
        for (int i = 0; i < dim; ++i) {
            lo[i] = -radius;
            hi[i] = radius;
        }
        return Domain::box(lo, hi);
    }
    throw ValidationError("config: unknown domain kind '" + kind + "'");
}

inline SphereRule rule_from_config(const ExperimentConfig& cfg, int dim) {
    int budget = cfg.integer("budget", dim == 2 ? 128 : 1152);
    return make_rule(dim, budget, cfg.seed);
}

inline std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline void append_manifest(const ExperimentConfig& cfg,
                            const std::vector<std::string>& outputs, double elapsed) {
    nlohmann::json j;
    j["experiment"] = cfg.experiment;
    j["hash"] = cfg.hash_hex();
    j["seed"] = cfg.seed;
    nlohmann::json kvj = nlohmann::json::object();
    for (const auto& [k, v] : cfg.kv) kvj[k] = v;
    j["config"] = kvj;
    j["outputs"] = outputs;
    j["elapsed_s"] = elapsed;
    std::ofstream out(out_path(cfg, "run_manifest.jsonl"), std::ios::app);
    out << j.dump() << "\n";
}

inline int bool01(bool b) { return b ? 1 : 0; }

// ---- experiment bodies ----------------------------------------------------

inline std::vector<std::string> run_modulus(const ExperimentConfig& cfg) {
    int dim = cfg.integer("dim", 2);
    const TestField& tf = catalog_get(cfg.str("field", "radial_sq"), dim);
    Domain D = domain_from_config(cfg, dim);
    SphereRule rule = rule_from_config(cfg, dim);
    std::vector<double> u_grid = cfg.list("u_grid", "0.05,0.1,0.2,0.4");
    double dens = cfg.num("x_density", 0.05);
    int refine = cfg.integer("t_refine", 16);
    ModulusCurve c = harmonicity_modulus(tf.field, D, u_grid, dens, rule, refine, tf.id);
    std::string name = "modulus_" + tf.id + "_" + std::to_string(dim) + "d.csv";
    CsvWriter csv(out_path(cfg, name), cfg,
                  {"field=" + tf.id + ", n=" + std::to_string(dim) +
                   ", x_density=" + format_double(dens) +
                   ", t_refine=" + std::to_string(refine) + ", rule=" + rule.describe()},
                  {"t", "omega_h", "clipped"});
    for (size_t i = 0; i < c.radii.size(); ++i)
        csv.row({format_double(c.radii[i]), format_double(c.values[i]),
                 std::to_string(bool01(c.clipped[i]))});
    return {name};
}

inline std::vector<std::string> run_kfunc(const ExperimentConfig& cfg) {
    int dim = cfg.integer("dim", 2);
    const TestField& tf = catalog_get(cfg.str("field", "radial_sq"), dim);
    Domain D = domain_from_config(cfg, dim);
    double margin = cfg.num("margin", 0.3);
    Domain D1 = shrink(D, margin);
    SphereRule rule = rule_from_config(cfg, dim);
    double dens = cfg.num("x_density", 0.04);
    std::vector<double> t_grid = cfg.list("t_grid", "0.02,0.05,0.1");
    std::vector<double> z_grid;
    if (cfg.has("z_grid")) {
        z_grid = cfg.list("z_grid", "");
    } else {
        double zmax = 0.99 * margin, zmin = cfg.num("z_min", 0.02);
        int nz = cfg.integer("z_count", 10);
        for (int i = 0; i < nz; ++i)
            z_grid.push_back(zmin * std::pow(zmax / zmin, double(i) / (nz - 1)));
    }
    auto rows = equivalence_report(tf.field, catalog_laplacian(tf), D, D1, t_grid,
                                   z_grid, rule, dens);
    std::string name = "kfunc_" + tf.id + "_" + std::to_string(dim) + "d.csv";
    CsvWriter csv(out_path(cfg, name), cfg,
                  {"field=" + tf.id + ", n=" + std::to_string(dim) +
                   ", margin=" + format_double(margin) +
                   ", x_density=" + format_double(dens)},
                  {"t", "omega_D", "omega_D1", "k_upper", "k_lower", "ratio_lemma1",
                   "ratio_thm3", "flag"});
    for (const auto& r : rows)
        csv.row({format_double(r.t), format_double(r.omega_D), format_double(r.omega_D1),
                 format_double(r.k_upper), format_double(0.5 * r.omega_D1),
                 format_double(r.ratio_lemma1), format_double(r.ratio_thm3),
                 r.degenerate ? "degenerate" : "ok"});
    return {name};
}

inline std::vector<std::string> run_pizzetti(const ExperimentConfig& cfg) {
    int dim = cfg.integer("dim", 2);
    const TestField& tf = catalog_get(cfg.str("field", "radial_sq"), dim);
    if (!tf.has_laplacian())
        throw ValidationError("pizzetti: field '" + tf.id + "' has no closed-form Laplacian");
    SphereRule rule = rule_from_config(cfg, dim);
    PizzettiConstants pc = PizzettiConstants::for_dim(dim);
    std::vector<double> R_grid = cfg.list("R_grid", "0.05,0.1,0.2,0.4");
    int quad = cfg.integer("quad_points", 96);
    const ScalarField& f = tf.field;
    const ScalarField& lap = tf.laplacians[1];
    // Eq. 8 residual is only meaningful when the Laplacian is constant
    bool lap_const = true;
    {
        Vec a = Vec::zero(dim), b = Vec::zero(dim), c = Vec::zero(dim);
        b[0] = 0.31;
        c[0] = -0.17;
        c[1] = 0.23;
        double la = lap(a);
        lap_const = std::abs(lap(b) - la) < 1e-13 && std::abs(lap(c) - la) < 1e-13;
    }
    std::string name = "pizzetti_" + tf.id + "_" + std::to_string(dim) + "d.csv";
    CsvWriter csv(out_path(cfg, name), cfg,
                  {"field=" + tf.id + ", n=" + std::to_string(dim) +
                   ", quad_points=" + std::to_string(quad) + ", rule=" + rule.describe()},
                  {"xnorm", "R", "resid_eq7", "resid_eq8", "eq8_applicable"});
    std::mt19937_64 eng(cfg.seed);
    std::uniform_real_distribution<double> uni(-0.35, 0.35);
    int npts = cfg.integer("points", 10);
    for (int ip = 0; ip < npts; ++ip) {
        Vec x = Vec::zero(dim);
        for (int i = 0; i < dim; ++i) x[i] = uni(eng);
        for (double R : R_grid) {
            double mu = spherical_mean(f, x, R, rule);
            double j0 = j0_apply(
                [&](double r) { return spherical_mean(lap, x, r, rule); }, R, dim, quad);
            double resid7 = mu - f(x) - pc.l_n * j0;
            double resid8 = lap_const ? mu - f(x) - pc.d_n * R * R * lap(x) : 0.0;
            csv.row({format_double(x.norm()), format_double(R), format_double(resid7),
                     format_double(resid8), std::to_string(bool01(lap_const))});
        }
    }
    return {name};
}

inline std::vector<std::string> run_kernel(const ExperimentConfig& cfg) {
    int dim = cfg.integer("n", cfg.integer("dim", 2));
    int k = cfg.integer("k", 3);
    KernelParams params;
    if (cfg.has("p")) {
        params = KernelParams::for_target(cfg.integer("p", 8), k, dim);
    } else {
        params.k = k;
        params.nu = cfg.integer("nu", 4);
        params.dim = dim;
    }
    RadialKernel K = polyharmonic_kernel(params);
    int order = polyharmonic_order_check(K);
    double I0 = moment(K, 0);
    std::vector<std::string> outputs;
    std::string name = "kernel_k" + std::to_string(params.k) + "_nu" +
                       std::to_string(params.nu) + "_n" + std::to_string(dim) + ".csv";
    bool monomial = !K.poly_s.empty();
    {
        CsvWriter csv(out_path(cfg, name), cfg,
                      {"k=" + std::to_string(params.k) + ", nu=" + std::to_string(params.nu) +
                       ", n=" + std::to_string(dim) + ", order=" + std::to_string(order) +
                       ", I0=" + format_double(I0) +
                       ", basis=" + (monomial ? "monomial_s" : "chebyshev")},
                      {"j", "coeff_j"});
        const std::vector<double>& coeffs = monomial ? K.poly_s : K.cheb;
        for (size_t j = 0; j < coeffs.size(); ++j)
            csv.row({std::to_string(j), format_double(coeffs[j])});
        outputs.push_back(name);
    }
    if (cfg.has("nu_list")) {
        std::vector<double> nus = cfg.list("nu_list", "");
        int max_i = cfg.integer("max_moment", 2);
        std::string mname = "kernel_moments_k" + std::to_string(k) + "_n" +
                            std::to_string(dim) + ".csv";
        CsvWriter csv(out_path(cfg, mname), cfg,
                      {"k=" + std::to_string(k) + ", n=" + std::to_string(dim)},
                      {"nu", "i", "I_i"});
        for (double nud : nus) {
            KernelParams kp;
            kp.k = k;
            kp.nu = static_cast<int>(nud);
            kp.dim = dim;
            RadialKernel Kn = polyharmonic_kernel(kp);
            for (int i = 0; i <= max_i; ++i)
                csv.row({std::to_string(kp.nu), std::to_string(i),
                         format_double(moment(Kn, i))});
        }
        outputs.push_back(mname);
    }
    return outputs;
}

inline ApproximantConfig approx_config(const ExperimentConfig& cfg, int p) {
    ApproximantConfig ac;
    ac.p = p;
    ac.r = cfg.integer("r", 0);
    ac.k = cfg.integer("k", 3);
    ac.conv_grid = cfg.num("conv_grid", p >= 100 ? 1.0 / 256 : 1.0 / 128);
    ac.eval_grid = cfg.num("eval_grid", 1.0 / 64);
    ac.bvp_spacing = cfg.num("bvp_spacing", 1.0 / 128);
    ac.bvp_tol = cfg.num("bvp_tol", 1e-10);
    ac.modulus_density = cfg.num("modulus_density", 0.0);
    ac.sphere_budget = cfg.integer("budget", 128);
    return ac;
}

inline nlohmann::json approx_record(const ExperimentConfig& cfg, const TestField& tf,
                                    int p, const ApproximantConfig& ac,
                                    const ApproximantResult& res) {
    nlohmann::json j;
    j["field"] = tf.id;
    j["n"] = tf.dim;
    j["p"] = p;
    j["r"] = ac.r;
    j["k"] = ac.k;
    j["nu"] = res.nu;
    j["order_equals_p"] = res.order_equals_p;
    j["sup_error"] = res.sup_error;
    j["per_stage_errors"] = res.per_stage_errors;
    j["modulus_factor"] = res.modulus_factor;
    j["rate_budget"] = res.rate_budget;
    j["implied_constant"] = res.implied_constant;
    j["mass_defect"] = res.mass_defect;
    j["error_floor"] = res.error_floor;
    j["hash"] = cfg.hash_hex();
    return j;
}

inline std::vector<std::string> run_approx(const ExperimentConfig& cfg) {
    int dim = cfg.integer("dim", 2);
    const TestField& tf = catalog_get(cfg.str("field", "radial_sq"), dim);
    int p = cfg.integer("p", 8);
    ApproximantConfig ac = approx_config(cfg, p);
    if (tf.r_max() < ac.r)
        throw ValidationError("approx: field '" + tf.id + "' lacks Laplacians up to r");
    Domain D = domain_from_config(cfg, dim);
    ApproximantResult res = build_approximant(tf.field, tf.laplacians, D, ac);

    std::vector<std::string> outputs;
    std::string name = "approx_" + tf.id + "_p" + std::to_string(p) + ".csv";
    CsvWriter csv(out_path(cfg, name), cfg,
                  {"field=" + tf.id + ", n=" + std::to_string(dim)},
                  {"p", "r", "k", "nu", "stage", "stage_error", "sup_error",
                   "modulus_factor", "mass_defect", "error_floor"});
    for (size_t m = 0; m < res.per_stage_errors.size(); ++m)
        csv.row({std::to_string(p), std::to_string(ac.r), std::to_string(ac.k),
                 std::to_string(res.nu), std::to_string(m),
                 format_double(res.per_stage_errors[m]), format_double(res.sup_error),
                 format_double(res.modulus_factor), format_double(res.mass_defect),
                 format_double(res.error_floor)});
    outputs.push_back(name);
    {
        std::ofstream out(out_path(cfg, "approx_meta.jsonl"), std::ios::app);
        out << approx_record(cfg, tf, p, ac, res).dump() << "\n";
    }
    if (cfg.dump_grid) {
        std::string gname = "approx_" + tf.id + "_p" + std::to_string(p) + "_grid.csv";
        dump_grid_csv(res.t_p, out_path(cfg, gname), cfg);
        outputs.push_back(gname);
    }
    return outputs;
}

inline std::vector<std::string> run_rates(const ExperimentConfig& cfg) {
    int dim = cfg.integer("dim", 2);
    const TestField& tf = catalog_get(cfg.str("field", "radial_sq"), dim);
    std::vector<double> p_list = cfg.list("p_list", "4,8,16,32");
    for (size_t i = 1; i < p_list.size(); ++i)
        if (p_list[i] <= p_list[i - 1])
            throw ValidationError("rates: p_list must be sorted ascending");
    Domain D = domain_from_config(cfg, dim);
    int r = cfg.integer("r", 0);
    if (tf.r_max() < r)
        throw ValidationError("rates: field '" + tf.id + "' lacks Laplacians up to r");

    struct Row {
        int p, nu;
        double sup_error, modulus_factor, implied_C;
        double omega1, omega2, c_omega1, c_omega2;
        double floor;
        bool excluded;
    };
    std::vector<Row> rows;
    for (double pd : p_list) {
        int p = static_cast<int>(pd);
        ApproximantConfig ac = approx_config(cfg, p);
        ApproximantResult res = build_approximant(tf.field, tf.laplacians, D, ac);
        CorollaryBounds cb = corollary_bounds(res, p, r, cfg.num("x_density", 0.02),
                                              cfg.integer("dir_samples", 64));
        Row row;
        row.p = p;
        row.nu = res.nu;
        row.sup_error = res.sup_error;
        row.modulus_factor = res.modulus_factor;
        row.implied_C = res.implied_constant;
        row.omega1 = cb.omega1;
        row.omega2 = cb.omega2;
        row.c_omega1 = cb.c_omega1;
        row.c_omega2 = cb.c_omega2;
        row.floor = res.error_floor;
        row.excluded = res.sup_error < 10.0 * res.error_floor;
        rows.push_back(row);
        std::ofstream out(out_path(cfg, "approx_meta.jsonl"), std::ios::app);
        out << approx_record(cfg, tf, p, ac, res).dump() << "\n";
    }
    std::vector<std::pair<double, double>> pairs;
    for (const Row& row : rows)
        if (!row.excluded) pairs.push_back({double(row.p), row.sup_error});
    double slope = 0.0, intercept = 0.0;
    bool fitted = false;
    if (pairs.size() >= 3) {
        RateFit fit = fit_rate(pairs);
        slope = fit.slope;
        intercept = fit.intercept;
        fitted = true;
    }
    std::string name = "rates_" + tf.id + "_r" + std::to_string(r) + ".csv";
    CsvWriter csv(out_path(cfg, name), cfg,
                  {"field=" + tf.id + ", n=" + std::to_string(dim) + ", r=" +
                   std::to_string(r) + ", k=" + std::to_string(cfg.integer("k", 3)),
                   std::string("fitted=") + (fitted ? "1" : "0")},
                  {"p", "nu", "sup_error", "modulus_factor", "implied_C", "omega1",
                   "omega2", "c_omega1", "c_omega2", "floor", "excluded", "slope",
                   "intercept"});
    for (const Row& row : rows)
        csv.row({std::to_string(row.p), std::to_string(row.nu),
                 format_double(row.sup_error), format_double(row.modulus_factor),
                 format_double(row.implied_C), format_double(row.omega1),
                 format_double(row.omega2), format_double(row.c_omega1),
                 format_double(row.c_omega2), format_double(row.floor),
                 std::to_string(bool01(row.excluded)), format_double(slope),
                 format_double(intercept)});
    return {name};
}

}  // namespace detail

/// Run one experiment; returns 0 on success, 2 on validation error, 3 on
/// numerical failure. Artifacts land in cfg.out_dir.
inline int run(ExperimentConfig cfg) {
    auto t0 = std::chrono::steady_clock::now();
    try {
        std::vector<std::string> outputs;
        if (cfg.experiment == "modulus")
            outputs = detail::run_modulus(cfg);
        else if (cfg.experiment == "kfunc")
            outputs = detail::run_kfunc(cfg);
        else if (cfg.experiment == "pizzetti")
            outputs = detail::run_pizzetti(cfg);
        else if (cfg.experiment == "kernel")
            outputs = detail::run_kernel(cfg);
        else if (cfg.experiment == "approx")
            outputs = detail::run_approx(cfg);
        else if (cfg.experiment == "rates")
            outputs = detail::run_rates(cfg);
        else
            throw ValidationError("unknown experiment: " + cfg.experiment);
        double elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0).count();
        detail::append_manifest(cfg, outputs, elapsed);
        return 0;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}

}  // namespace polyharm
