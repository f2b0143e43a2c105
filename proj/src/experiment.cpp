#include "conical/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>

#ifndef CONICAL_VERSION
#define CONICAL_VERSION "0.0.0"
#endif

namespace conical {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void reject_unknown(const json& j, const std::set<std::string>& keys, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!keys.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_plane(const json& j, PlaneGrid& g) {
    reject_unknown(j, {"x_max", "y_max", "nx", "ny", "alpha"}, "grids.plane");
    read(j, "x_max", g.x_max);
    read(j, "y_max", g.y_max);
    read(j, "nx", g.nx);
    read(j, "ny", g.ny);
}

std::string angle_label(const json& a) {
    if (a.is_string()) return a.get<std::string>();
    std::ostringstream s;
    s << a.get<double>();
    return s.str();
}

}  // namespace

// ============================================================================
// Config
// ============================================================================

PeriodicStripGrid ExperimentConfig::strip_grid() const {
    PeriodicStripGrid g = strip;
    g.nx *= grid_scale;
    g.ny *= grid_scale;
    return g;
}

PlaneGrid ExperimentConfig::plane_grid(double alpha) const {
    PlaneGrid g = plane;
    for (const auto& [a, j] : plane_by_alpha)
        if (std::abs(a - alpha) < 1e-12) read_plane(j, g);
    g.nx *= grid_scale;
    g.ny *= grid_scale;
    return g;
}

void ExperimentConfig::validate() const {
    auto fr = problem.f.validate();
    if (!fr.ok()) throw ConfigError("nonlinearity fails validation: " + to_json(fr).dump());
    auto qr = validate_flow(problem.flow);
    if (!qr.ok()) throw ConfigError("flow fails validation: " + to_json(qr).dump());
    if (grid_scale < 1) throw ConfigError("grid_scale must be >= 1");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    PeriodicStripGrid sg = strip_grid();
    sg.validate();
    if (strip.nx < 64) throw ConfigError("strip nx must resolve the flow period with at least 64 cells");
    if (std::abs(sg.period_L - problem.flow.period()) > 1e-12) throw ConfigError("strip period must equal the flow period");
    for (double a : problem.alphas) {
        PlaneGrid pg = plane_grid(a);
        pg.validate(a);
        double reach = pg.x_max * std::abs(std::cos(a)) + pg.y_max * std::sin(a);
        if (reach > sg.y_max - 4.0 * sg.dy())
            throw ConfigError("strip y_max too small for the plane extents at alpha = " + std::to_string(a));
        double cells = problem.flow.period() / pg.dx();
        if (std::abs(cells - std::round(cells)) > 1e-9)
            throw ConfigError("plane dx must divide the flow period");
    }
    const double tols[] = {tol.planar_speed, tol.speed_formula, tol.symmetry, tol.monotone,
                           tol.shift,        tol.comparison,    tol.eps_factor, tol.max_locus_margin,
                           pulsating.speed_tol, pulsating.drift_tol, evolve.dt, evolve.change_tol, evolve.speed_tol};
    for (double t : tols)
        if (!(t > 0.0)) throw ConfigError("tolerances and time steps must be positive");
    for (double b : beta_factors)
        if (!(b > 0.0)) throw ConfigError("beta factors must be positive");
}

ExperimentConfig parse_config(const json& j) {
    reject_unknown(j, {"name", "problem", "grids", "pulsating", "evolve", "barriers", "runs", "verify", "tolerances",
                       "outputs", "seed", "grid_scale", "jobs", "description"},
                   "config");
    ExperimentConfig c;
    c.raw = j;
    read(j, "name", c.name);
    if (!j.contains("problem")) throw ConfigError("config.problem is required");
    const json& pj = j.at("problem");
    reject_unknown(pj, {"theta", "r", "reaction", "flow", "alpha"}, "problem");
    c.problem = parse_problem(pj);
    if (pj.at("alpha").is_array())
        for (const auto& a : pj.at("alpha")) c.alpha_labels.push_back(angle_label(a));
    else
        c.alpha_labels.push_back(angle_label(pj.at("alpha")));
    c.strip.period_L = c.problem.flow.period();
    c.strip.nx = 64;
    c.strip.y_max = 24.0;
    c.strip.ny = 1536;

    if (j.contains("grids")) {
        const json& g = j.at("grids");
        reject_unknown(g, {"strip", "plane", "plane_by_alpha"}, "grids");
        if (g.contains("strip")) {
            reject_unknown(g.at("strip"), {"nx", "y_max", "ny"}, "grids.strip");
            read(g.at("strip"), "nx", c.strip.nx);
            read(g.at("strip"), "y_max", c.strip.y_max);
            read(g.at("strip"), "ny", c.strip.ny);
        }
        if (g.contains("plane")) read_plane(g.at("plane"), c.plane);
        if (g.contains("plane_by_alpha"))
            for (const auto& e : g.at("plane_by_alpha")) {
                if (!e.contains("alpha")) throw ConfigError("grids.plane_by_alpha entries need alpha");
                PlaneGrid probe;
                read_plane(e, probe);
                c.plane_by_alpha.emplace_back(parse_angle(e.at("alpha")), e);
            }
    }
    if (j.contains("pulsating")) {
        const json& p = j.at("pulsating");
        reject_unknown(p, {"dt", "warmup_time", "relax_time", "window_time", "speed_tol", "drift_tol",
                           "max_evaluations", "max_windows", "initial_step"},
                       "pulsating");
        read(p, "dt", c.pulsating.dt);
        read(p, "warmup_time", c.pulsating.warmup_time);
        read(p, "relax_time", c.pulsating.relax_time);
        read(p, "window_time", c.pulsating.window_time);
        read(p, "speed_tol", c.pulsating.speed_tol);
        read(p, "drift_tol", c.pulsating.drift_tol);
        read(p, "max_evaluations", c.pulsating.max_evaluations);
        read(p, "max_windows", c.pulsating.max_windows);
        read(p, "initial_step", c.pulsating.initial_step);
    }
    if (j.contains("evolve")) {
        const json& e = j.at("evolve");
        reject_unknown(e, {"dt", "t_max", "t_min", "check_interval", "change_tol", "speed_tol", "consecutive_checks",
                           "measure_time", "scheme", "lateral", "frame_gain", "adaptive_frame", "recenter_distance"},
                       "evolve");
        auto& o = c.evolve;
        read(e, "dt", o.dt);
        read(e, "t_max", o.t_max);
        read(e, "t_min", o.t_min);
        read(e, "check_interval", o.check_interval);
        read(e, "change_tol", o.change_tol);
        read(e, "speed_tol", o.speed_tol);
        read(e, "consecutive_checks", o.consecutive_checks);
        read(e, "measure_time", o.measure_time);
        read(e, "frame_gain", o.frame_gain);
        read(e, "adaptive_frame", o.adaptive_frame);
        read(e, "recenter_distance", o.recenter_distance);
        if (e.contains("scheme")) o.scheme = parse_time_scheme(e.at("scheme").get<std::string>());
        if (e.contains("lateral")) o.lateral = parse_lateral_bc(e.at("lateral").get<std::string>());
    }
    if (j.contains("barriers")) {
        reject_unknown(j.at("barriers"), {"beta_factors"}, "barriers");
        read(j.at("barriers"), "beta_factors", c.beta_factors);
    }
    if (j.contains("runs")) {
        reject_unknown(j.at("runs"), {"from_super", "substitute_super"}, "runs");
        read(j.at("runs"), "from_super", c.from_super);
        read(j.at("runs"), "substitute_super", c.substitute_super);
    }
    if (j.contains("verify")) {
        const json& v = j.at("verify");
        reject_unknown(v, {"cone_levels", "lower_threshold", "upper_threshold", "margin_cells"}, "verify");
        read(v, "cone_levels", c.cone.levels);
        read(v, "lower_threshold", c.cone.lower_threshold);
        read(v, "upper_threshold", c.cone.upper_threshold);
        read(v, "margin_cells", c.cone.margin_cells);
    }
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        reject_unknown(t, {"planar_speed", "speed_formula", "symmetry", "monotone", "shift", "comparison",
                           "eps_factor", "max_locus_margin"},
                       "tolerances");
        read(t, "planar_speed", c.tol.planar_speed);
        read(t, "speed_formula", c.tol.speed_formula);
        read(t, "symmetry", c.tol.symmetry);
        read(t, "monotone", c.tol.monotone);
        read(t, "shift", c.tol.shift);
        read(t, "comparison", c.tol.comparison);
        read(t, "eps_factor", c.tol.eps_factor);
        read(t, "max_locus_margin", c.tol.max_locus_margin);
    }
    if (j.contains("outputs")) {
        const json& o = j.at("outputs");
        reject_unknown(o, {"dir", "csv", "snapshot_stride", "snapshot_interval"}, "outputs");
        read(o, "dir", c.out_dir);
        read(o, "csv", c.csv);
        read(o, "snapshot_stride", c.snapshot_stride);
        read(o, "snapshot_interval", c.snapshot_interval);
        if (c.snapshot_stride < 1) throw ConfigError("outputs.snapshot_stride must be >= 1");
    }
    read(j, "seed", c.seed);
    read(j, "grid_scale", c.grid_scale);
    read(j, "jobs", c.jobs);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

void apply_override(json& j, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value");
    std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    if (!value.is_primitive()) throw ConfigError("overrides apply to scalar fields only");
    json* node = &j;
    std::stringstream ss(path);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(ss, key, '.')) keys.push_back(key);
    for (size_t k = 0; k + 1 < keys.size(); ++k) node = &(*node)[keys[k]];
    (*node)[keys.back()] = value;
}

Stage stage_for_verb(const std::string& verb) {
    if (verb == "validate") return Stage::validate;
    if (verb == "solve-planar") return Stage::planar;
    if (verb == "solve-pulsating") return Stage::pulsating;
    if (verb == "build-barriers") return Stage::barriers;
    if (verb == "evolve") return Stage::evolve;
    if (verb == "verify" || verb == "run-all") return Stage::verify;
    throw ConfigError("unknown verb '" + verb + "'");
}

std::string to_string(Stage s) {
    switch (s) {
        case Stage::validate: return "validate";
        case Stage::planar: return "planar";
        case Stage::pulsating: return "pulsating";
        case Stage::barriers: return "barriers";
        case Stage::evolve: return "evolve";
        default: return "verify";
    }
}

bool RunManifest::pass() const {
    if (!complete()) return false;
    for (const auto& c : doc.at("checks"))
        if (!c.value("diagnostic", false) && !c.at("pass").get<bool>()) return false;
    return true;
}

// ============================================================================
// Pipeline
// ============================================================================

namespace {

struct Checks {
    std::mutex m;
    std::vector<json> list;

    void add(const std::string& name, const std::string& alpha, bool pass, double value, double tol, const json& grid,
             bool diagnostic = false) {
        json c = {{"name", name}, {"alpha", alpha}, {"pass", pass}, {"value", value}, {"tolerance", tol}, {"grid", grid}};
        if (diagnostic) c["diagnostic"] = true;
        std::lock_guard<std::mutex> lock(m);
        list.push_back(c);
    }
};

json strip_json(const PeriodicStripGrid& g) {
    return {{"period_L", g.period_L}, {"nx", g.nx}, {"y_max", g.y_max}, {"ny", g.ny}, {"dx", g.dx()}, {"dy", g.dy()}};
}

CsvTable field_table(const std::string& name, const PlaneGrid& g, const std::vector<std::string>& cols,
                     const std::vector<const Field2D*>& fields, int stride) {
    CsvTable t;
    t.name = name;
    t.header = {"x", "y"};
    t.header.insert(t.header.end(), cols.begin(), cols.end());
    int rows_per_block = 0;
    for (int i = 0; i <= g.nx; i += stride) {
        int n = 0;
        for (int j = 0; j <= g.ny; j += stride, ++n) {
            std::vector<double> r{g.x(i), g.y(j)};
            for (const auto* f : fields) r.push_back((*f)(i, j));
            t.rows.push_back(std::move(r));
        }
        rows_per_block = n;
    }
    t.block = rows_per_block;
    return t;
}

CsvTable strip_table(const std::string& name, const FrontProfile& p, int stride) {
    CsvTable t;
    t.name = name;
    t.header = {"X", "Y", "u"};
    const auto& g = p.grid;
    int n = 0;
    for (int i = 0; i < g.nx; ++i) {
        n = 0;
        for (int j = 0; j <= g.ny; j += stride, ++n) t.rows.push_back({g.X(i), g.Y(j), p.values(i, j)});
    }
    t.block = n;
    return t;
}

// Smallest multiple of the threshold beta for which the lemma's properties hold.
double substitute_beta(const CombustionNonlinearity& f, double* factor_out) {
    const double base = h_monotonicity_threshold(f);
    for (double k : {1.05, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0}) {
        if (check_h_lemma(extend_H(integrate_h(k * base, f.theta(), f))).ok()) {
            if (factor_out) *factor_out = k;
            return k * base;
        }
    }
    throw std::runtime_error("no admissible substitute beta found");
}

struct AlphaOutput {
    json doc = json::object();
    std::vector<CsvTable> tables;
    bool complete = false;
};

AlphaOutput run_alpha(const ExperimentConfig& cfg, size_t index, const PlanarFront& oracle, Stage last,
                      Checks& checks) {
    AlphaOutput out;
    json& d = out.doc;
    const double alpha = cfg.problem.alphas[index];
    const std::string label = cfg.alpha_labels[index];
    const std::string dir = "alpha_" + std::to_string(index);
    const auto& f = cfg.problem.f;
    const auto& flow = cfg.problem.flow;
    const double theta = f.theta();
    const double sa = std::sin(alpha);
    d["alpha"] = alpha;
    d["label"] = label;
    d["output_dir"] = dir;
    d["timings"] = json::object();
    std::string stage = "pulsating";
    try {
        // ---------------- pulsating fronts
        auto t0 = Clock::now();
        const PeriodicStripGrid sg = cfg.strip_grid();
        const json sgj = strip_json(sg);
        auto solve = [&](MatrixVariant v) {
            return solve_pulsating_front(diffusion_matrix(alpha, v), flow, alpha, f, sg, cfg.pulsating);
        };
        PulsatingResult rA, rB;
        if (cfg.jobs > 1) {
            auto fb = std::async(std::launch::async, solve, MatrixVariant::B);
            rA = solve(MatrixVariant::A);
            rB = fb.get();
        } else {
            rA = solve(MatrixVariant::A);
            rB = solve(MatrixVariant::B);
        }
        const double cA = rA.speed.c, cB = rB.speed.c;
        json pj;
        pj["A"] = speed_record(rA, flow);
        pj["B"] = speed_record(rB, flow);
        const double sym = std::abs(cA - cB);
        const bool sym_ok = check_speed_symmetry(rA.speed, rB.speed, cfg.tol.symmetry * cA);
        pj["symmetry"] = {{"abs_difference", sym}, {"rel_difference", sym / cA}, {"tol_rel", cfg.tol.symmetry},
                          {"pass", sym_ok}};
        checks.add("speed_symmetry", label, sym_ok, sym / cA, cfg.tol.symmetry, sgj);
        double res_A = residual_max_norm(strip_residual(rA.profile, diffusion_matrix(alpha, MatrixVariant::A), flow, f, cA));
        double res_R = residual_max_norm(
            strip_residual(reflect_x(rA.profile), diffusion_matrix(alpha, MatrixVariant::B), flow, f, cA));
        bool refl_ok = res_R <= 2.0 * res_A + 1e-14;
        pj["reflection"] = {{"residual_A", res_A}, {"residual_reflected_in_B", res_R}, {"pass", refl_ok}};
        checks.add("reflection_residual", label, refl_ok, res_R, 2.0 * res_A, sgj);
        if (flow.is_zero()) {
            double e = std::abs(cA - oracle.speed);
            pj["vs_oracle"] = {{"c0", oracle.speed}, {"abs_difference", e}, {"tol", 1e-3}};
            checks.add("strip_vs_oracle", label, e <= 1e-3, e, 1e-3, sgj);
        }
        d["pulsating"] = pj;
        FrontProfile phi = normalize_front(rA.profile, theta), psi = normalize_front(rB.profile, theta);
        if (cfg.csv) {
            const int s = std::max(1, cfg.snapshot_stride);
            out.tables.push_back(strip_table(dir + "/profile_A", phi, s));
            out.tables.push_back(strip_table(dir + "/profile_B", psi, s));
        }
        d["timings"]["pulsating"] = since(t0);
        if (last == Stage::pulsating) {
            out.complete = true;
            return out;
        }

        // ---------------- barriers
        stage = "barriers";
        t0 = Clock::now();
        const PlaneGrid pg = cfg.plane_grid(alpha);
        const json pgj = to_json(pg);
        const double c_expected = cA / sa;
        BandConstants K = measure_band_constants(phi, psi, theta, alpha);
        K.beta = choose_beta(K, alpha);
        json bj;
        bj["constants"] = to_json(K);
        bj["monotonicity_threshold_beta"] = h_monotonicity_threshold(f);
        json lemmas = json::array();
        bool lemmas_ok = true;
        for (double k : cfg.beta_factors) {
            auto rep = check_h_lemma(extend_H(integrate_h(k * K.beta, theta, f)));
            lemmas.push_back({{"factor", k}, {"beta", k * K.beta}, {"report", to_json(rep)}});
            lemmas_ok = lemmas_ok && rep.ok();
        }
        bj["h_lemma"] = lemmas;
        checks.add("h_lemma", label, lemmas_ok, lemmas_ok ? 0.0 : 1.0, 0.0, json::object());
        HProfile H = extend_H(integrate_h(K.beta, theta, f));
        Components comp = build_components(phi, psi, alpha, pg);
        Field2D sub = build_subsolution(comp.phi1, comp.phi2);
        int clamped = 0;
        Field2D super = build_supersolution(H, comp.phi1, comp.phi2, &clamped);
        const double cal = calibrate_discretization(oracle, f, pg);
        const double eps = cfg.tol.eps_factor * cal;
        bj["calibration_residual"] = cal;
        bj["eps_disc"] = eps;
        bj["clamped"] = clamped;
        Field2D res_super = residual(super, c_expected, flow, f, pg);
        Field2D res_sub = residual(sub, c_expected, flow, f, pg);
        double super_max = -INFINITY, sub_min = INFINITY;
        int off_margin = 0;
        for (int j = 1; j < pg.ny; ++j)
            for (int i = 1; i < pg.nx; ++i) {
                super_max = std::max(super_max, res_super(i, j));
                if (std::abs(comp.phi1(i, j) - comp.phi2(i, j)) > cfg.tol.max_locus_margin) {
                    sub_min = std::min(sub_min, res_sub(i, j));
                    ++off_margin;
                }
            }
        // phi1 = phi2 everywhere when alpha = pi/2: the off-margin set is empty
        if (off_margin == 0) sub_min = 0.0;
        bj["super_residual_max"] = super_max;
        bj["sub_residual_min_off_margin"] = sub_min;
        bj["sub_off_margin_nodes"] = off_margin;
        checks.add("supersolution_residual", label, super_max <= eps, super_max, eps, pgj);
        checks.add("subsolution_residual", label, sub_min >= -eps, sub_min, -eps, pgj);
        auto order = check_ordering(sub, sub, super, pg, 0.0);
        bj["sub_le_super"] = to_json(order);
        checks.add("sub_le_super", label, order.pass, order.worst_violation, 0.0, pgj);
        auto cases = certify_supersolution_cases(super, comp, K, H, res_super, f, pg, alpha, eps);
        bj["cases"] = to_json(cases);
        checks.add("supersolution_cases", label, cases.ok(),
                   cases.residual_violations() + cases.case2_derivative_violations + cases.case3_reaction_nonzero, 0.0,
                   pgj);
        auto sub_cone = check_cone_limits(sub, pg, alpha, cfg.cone);
        bj["sub_cone_limits"] = to_json(sub_cone);
        checks.add("sub_cone_limits", label, sub_cone.pass, sub_cone.worst_violation, 0.0, pgj);
        d["barriers"] = bj;
        if (cfg.csv) {
            CsvTable ht;
            ht.name = dir + "/h_table";
            ht.header = {"z", "h", "dh", "H"};
            for (size_t k = 0; k < H.z_nodes.size(); ++k) {
                double z = H.z_nodes[k];
                bool on_h = z >= 0.5 * theta;
                ht.rows.push_back({z, on_h ? H.h(z) : NAN, H.dH(z), H.H_values[k]});
            }
            out.tables.push_back(std::move(ht));
            Field2D region = pg.make_field();
            for (int j = 0; j <= pg.ny; ++j)
                for (int i = 0; i <= pg.nx; ++i)
                    region(i, j) = static_cast<int>(classify_region(pg.x(i), pg.y(j), K, alpha));
            out.tables.push_back(field_table(dir + "/barriers", pg, {"sub", "super", "region"}, {&sub, &super, &region},
                                             cfg.snapshot_stride));
        }
        d["timings"]["barriers"] = since(t0);
        if (last == Stage::barriers) {
            out.complete = true;
            return out;
        }

        // ---------------- evolution
        stage = "evolve";
        t0 = Clock::now();
        EvolveOptions eo = cfg.evolve;
        eo.grid = pg;
        eo.alpha = alpha;
        eo.c_frame = c_expected;
        int snap = 0;
        double next_snap = cfg.snapshot_interval;
        auto run = [&](const Field2D& init, const std::string& tag) {
            EvolveOptions o = eo;
            if (cfg.csv && cfg.snapshot_interval > 0.0 && tag == "sub")
                o.observer = [&](const EvolutionState& st) {
                    if (st.t + 1e-9 < next_snap) return;
                    next_snap += cfg.snapshot_interval;
                    out.tables.push_back(field_table(dir + "/snapshot_" + std::to_string(snap++), pg, {"u"}, {&st.u},
                                                     cfg.snapshot_stride));
                };
            return evolve(init, flow, f, o);
        };
        json ej;
        EvolveResult from_sub = run(sub, "sub");
        ej["from_sub"] = to_json(from_sub);
        checks.add("evolve_converged", label, from_sub.converged, from_sub.final_change_rate, eo.change_tol, pgj);
        auto formula = compare_speed_formula(from_sub.speed, rA.speed, alpha, cfg.tol.speed_formula);
        ej["speed_formula"] = to_json(formula);
        checks.add("speed_formula", label, formula.pass, formula.rel_error, formula.tol, pgj);
        double agree = std::abs(from_sub.shift_speed - from_sub.speed.c) / from_sub.speed.c;
        ej["shift_speed_agreement"] = agree;
        checks.add("shift_speed_agreement", label, agree <= 0.01, agree, 0.01, pgj);
        if (flow.is_zero() && std::abs(std::cos(alpha)) < 1e-12) {
            double rel = std::abs(from_sub.speed.c - oracle.speed) / oracle.speed;
            ej["planar_reduction"] = {{"c0", oracle.speed}, {"measured", from_sub.speed.c}, {"rel_error", rel},
                                      {"tol", cfg.tol.planar_speed}};
            checks.add("planar_reduction", label, rel <= cfg.tol.planar_speed, rel, cfg.tol.planar_speed, pgj);
        }
        Field2D steady_super, steady_subst;
        bool have_super = false, have_subst = false;
        if (cfg.from_super) {
            try {
                Field2D init = super;
                for (auto& v : init.v) v = std::clamp(v, 0.0, 1.0);
                EvolveResult r = run(init, "super");
                ej["from_super"] = to_json(r);
                steady_super = std::move(r.steady);
                have_super = true;
            } catch (const std::exception& e) {
                ej["from_super"] = {{"error", e.what()}};
            }
        }
        if (cfg.substitute_super) {
            try {
                double k = 0.0;
                double beta_s = substitute_beta(f, &k);
                HProfile Hs = extend_H(integrate_h(beta_s, theta, f));
                Field2D sup_s = build_supersolution(Hs, comp.phi1, comp.phi2);
                auto ord = check_ordering(sub, sub, sup_s, pg, 0.0);
                for (auto& v : sup_s.v) v = std::clamp(v, 0.0, 1.0);
                EvolveResult r = run(sup_s, "substitute");
                ej["from_substitute_super"] = to_json(r);
                ej["from_substitute_super"]["beta"] = beta_s;
                ej["from_substitute_super"]["threshold_factor"] = k;
                ej["from_substitute_super"]["sub_le_initial"] = to_json(ord);
                steady_subst = std::move(r.steady);
                have_subst = true;
            } catch (const std::exception& e) {
                ej["from_substitute_super"] = {{"error", e.what()}};
            }
        }
        d["evolve"] = ej;
        d["timings"]["evolve"] = since(t0);
        if (cfg.csv) {
            CsvTable tr;
            tr.name = dir + "/trace";
            tr.header = {"t", "y_level", "frame_shift"};
            for (size_t k = 0; k < from_sub.trace.times.size(); ++k)
                tr.rows.push_back({from_sub.trace.times[k], from_sub.trace.level_positions[k], from_sub.trace.frame_shifts[k]});
            out.tables.push_back(std::move(tr));
            out.tables.push_back(field_table(dir + "/steady", pg, {"u"}, {&from_sub.steady}, cfg.snapshot_stride));
        }
        if (last == Stage::evolve) {
            out.complete = true;
            return out;
        }

        // ---------------- verification
        stage = "verify";
        t0 = Clock::now();
        const Field2D& u = from_sub.steady;
        json vj;
        auto mono = check_monotone_y(u, pg, cfg.tol.monotone);
        vj["monotone_y"] = to_json(mono);
        checks.add("monotone_y", label, mono.pass, mono.worst_violation, cfg.tol.monotone, pgj);
        auto cone = check_cone_limits(u, pg, alpha, cfg.cone);
        vj["cone_limits"] = to_json(cone);
        checks.add("cone_limits", label, cone.pass, cone.worst_violation, 0.0, pgj);
        auto ord = check_ordering(sub, u, super, pg, eps);
        vj["ordering"] = to_json(ord);
        checks.add("ordering", label, ord.pass, ord.worst_violation, eps, pgj);

        // sliding comparison: u(x, y + tau) against u on the upper cone where it exceeds 1 - rho
        const double tau = 3.0, rho = default_rho(theta);
        Field2D shifted = shift_field(u, pg, tau / pg.dy());
        double l_found = NAN;
        for (double l = -0.5 * pg.y_max; l <= 0.5 * pg.y_max + 1e-12; l += 0.25) {
            ConeRegion probe{alpha, l, ConeSide::upper};
            auto r = check_comparison_on_cone(u, shifted, pg, probe, rho, cfg.tol.comparison);
            if (r.failed.rfind("interior_bound", 0) != 0) {
                l_found = l;
                break;
            }
        }
        if (std::isfinite(l_found)) {
            auto cmp = check_comparison_on_cone(u, shifted, pg, {alpha, l_found, ConeSide::upper}, rho,
                                                cfg.tol.comparison);
            cmp.details["tau"] = tau;
            cmp.details["rho"] = rho;
            vj["comparison_on_cone"] = to_json(cmp);
            checks.add("comparison_on_cone", label, cmp.pass, cmp.worst_violation, cfg.tol.comparison, pgj);
        } else {
            vj["comparison_on_cone"] = {{"pass", false}, {"failed", "no cone level satisfies the interior bound"}};
            checks.add("comparison_on_cone", label, false, NAN, cfg.tol.comparison, pgj);
        }
        if (cfg.from_super && !have_super) {
            vj["shift_uniqueness"] = {{"pass", false}, {"error", "evolution from the supersolution failed"}};
            checks.add("shift_uniqueness", label, false, NAN, cfg.tol.shift, pgj);
        } else if (cfg.from_super) {
            try {
                auto sh = check_shift_uniqueness(u, steady_super, pg, cfg.tol.shift);
                vj["shift_uniqueness"] = to_json(sh.report);
                checks.add("shift_uniqueness", label, sh.report.pass, sh.report.worst_violation, cfg.tol.shift, pgj);
            } catch (const VerificationError& e) {
                vj["shift_uniqueness"] = {{"pass", false}, {"error", e.what()}};
                checks.add("shift_uniqueness", label, false, NAN, cfg.tol.shift, pgj);
            }
        }
        if (cfg.substitute_super && !have_subst) {
            vj["shift_uniqueness_substitute"] = {{"pass", false}, {"error", "evolution from the substitute failed"}};
            checks.add("shift_uniqueness_substitute", label, false, NAN, cfg.tol.shift, pgj, true);
        } else if (cfg.substitute_super) {
            try {
                auto sh = check_shift_uniqueness(u, steady_subst, pg, cfg.tol.shift);
                vj["shift_uniqueness_substitute"] = to_json(sh.report);
                checks.add("shift_uniqueness_substitute", label, sh.report.pass, sh.report.worst_violation,
                           cfg.tol.shift, pgj, true);
            } catch (const VerificationError& e) {
                vj["shift_uniqueness_substitute"] = {{"pass", false}, {"error", e.what()}};
                checks.add("shift_uniqueness_substitute", label, false, NAN, cfg.tol.shift, pgj, true);
            }
        }
        d["verify"] = vj;
        d["timings"]["verify"] = since(t0);
        out.complete = true;
    } catch (const std::exception& e) {
        d["failure"] = {{"stage", stage}, {"error", e.what()}};
        checks.add("stage_" + stage, label, false, NAN, 0.0, json::object());
    }
    return out;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg, Stage last) {
    RunManifest m;
    json& d = m.doc;
    d["name"] = cfg.name;
    d["config"] = cfg.raw;
    d["grid_scale"] = cfg.grid_scale;
    d["requested_stage"] = to_string(last);
    d["versions"] = {{"conical", CONICAL_VERSION},
                     {"compiler", __VERSION__},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    d["timings"] = json::object();
    d["complete"] = false;
    Checks checks;

    auto t0 = Clock::now();
    json validation;
    validation["nonlinearity"] = to_json(cfg.problem.f.validate());
    validation["flow"] = to_json(validate_flow(cfg.problem.flow));
    json dm = json::array();
    for (double a : cfg.problem.alphas)
        for (auto v : {MatrixVariant::A, MatrixVariant::B}) {
            auto M = diffusion_matrix(a, v);
            auto [l1, l2] = M.eigenvalues();
            dm.push_back({{"alpha", a}, {"variant", to_string(v)}, {"xy", M.xy}, {"eigenvalues", {l1, l2}}});
        }
    validation["diffusion_matrices"] = dm;
    d["validation"] = validation;
    d["timings"]["validate"] = since(t0);
    if (last == Stage::validate) {
        d["complete"] = true;
        d["checks"] = json::array();
        d["summary"] = {{"pass", true}, {"failed", json::array()}};
        return m;
    }

    t0 = Clock::now();
    PlanarFront oracle;
    try {
        oracle = planar_front_speed_1d(cfg.problem.f);
        d["planar"] = {{"c0", oracle.speed},
                       {"bracket", oracle.bracket},
                       {"richardson_error", oracle.richardson_error},
                       {"decay_rate", oracle.decay_rate},
                       {"estimate", to_json(oracle.estimate())}};
    } catch (const std::exception& e) {
        d["failure"] = {{"stage", "planar"}, {"error", e.what()}};
        d["checks"] = {{{"name", "stage_planar"}, {"pass", false}}};
        d["summary"] = {{"pass", false}, {"failed", {"stage_planar"}}};
        return m;
    }
    d["timings"]["planar"] = since(t0);
    if (last == Stage::planar) {
        d["complete"] = true;
        d["checks"] = json::array();
        d["summary"] = {{"pass", true}, {"failed", json::array()}};
        return m;
    }

    const size_t n = cfg.problem.alphas.size();
    std::vector<AlphaOutput> outs(n);
    const size_t width = std::max<size_t>(1, std::min<size_t>(cfg.jobs, n));
    for (size_t start = 0; start < n; start += width) {
        std::vector<std::future<AlphaOutput>> futs;
        for (size_t k = start; k < std::min(n, start + width); ++k)
            futs.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred,
                                      [&, k] { return run_alpha(cfg, k, oracle, last, checks); }));
        for (size_t k = start; k < std::min(n, start + width); ++k) outs[k] = futs[k - start].get();
    }
    json runs = json::array();
    bool complete = true;
    for (auto& o : outs) {
        complete = complete && o.complete;
        runs.push_back(o.doc);
        for (auto& t : o.tables) m.tables.push_back(std::move(t));
    }
    d["alphas"] = runs;
    d["complete"] = complete;

    // stable order regardless of thread interleaving
    std::stable_sort(checks.list.begin(), checks.list.end(), [&](const json& a, const json& b) {
        auto idx = [&](const json& c) {
            auto it = std::find(cfg.alpha_labels.begin(), cfg.alpha_labels.end(), c.value("alpha", std::string()));
            return it - cfg.alpha_labels.begin();
        };
        return idx(a) < idx(b);
    });
    d["checks"] = checks.list;
    json failed = json::array();
    for (const auto& c : checks.list)
        if (!c.value("diagnostic", false) && !c.at("pass").get<bool>())
            failed.push_back(c.at("name").get<std::string>() + "@" + c.at("alpha").get<std::string>());
    d["summary"] = {{"pass", complete && failed.empty()}, {"failed", failed}};
    return m;
}

// ============================================================================
// Reports
// ============================================================================

std::vector<std::string> emit_report(const RunManifest& manifest, const std::string& dir, ReportFormat format) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + dir + "'");
    std::vector<std::string> written;
    auto open = [&](const fs::path& p) {
        fs::create_directories(p.parent_path(), ec);
        std::ofstream o(p);
        if (!o) throw std::runtime_error("cannot write '" + p.string() + "'");
        written.push_back(p.string());
        return o;
    };
    {
        auto o = open(fs::path(dir) / "manifest.json");
        o << manifest.doc.dump(2) << "\n";
    }
    if (format != ReportFormat::csv) return written;
    for (const auto& t : manifest.tables) {
        {
            auto o = open(fs::path(dir) / (t.name + ".csv"));
            o.precision(12);
            for (size_t k = 0; k < t.header.size(); ++k) o << (k ? "," : "") << t.header[k];
            o << "\n";
            for (const auto& r : t.rows) {
                for (size_t k = 0; k < r.size(); ++k) o << (k ? "," : "") << r[k];
                o << "\n";
            }
        }
        if (t.block > 0) {
            auto o = open(fs::path(dir) / (t.name + ".dat"));
            o.precision(12);
            o << "#";
            for (const auto& h : t.header) o << " " << h;
            o << "\n";
            for (size_t k = 0; k < t.rows.size(); ++k) {
                if (k > 0 && k % t.block == 0) o << "\n";
                for (size_t c = 0; c < t.rows[k].size(); ++c) o << (c ? " " : "") << t.rows[k][c];
                o << "\n";
            }
        }
    }
    return written;
}

}  // namespace conical
