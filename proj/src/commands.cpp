#include "stl/commands.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stl/entropy.hpp"
#include "stl/hjheat.hpp"
#include "stl/om.hpp"
#include "stl/parallel.hpp"
#include "stl/pathmeasure.hpp"
#include "stl/schrodinger.hpp"
#include "stl/sde.hpp"
#include "stl/verify.hpp"

namespace stl {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind k) {
    switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Specification: return 2;
    default: return 3;
    }
}

namespace {

struct Env {
    const CommandOptions& opt;
    const Config* cfg;
    fs::path dir;
    std::vector<std::string> outputs;
    bool svg = false;
    bool binary = true;

    void log(LogLevel l, const std::string& m) const {
        if (opt.log) opt.log(l, m);
    }
    std::string file(const std::string& name) {
        fs::create_directories(dir);
        outputs.push_back(name);
        return (dir / name).string();
    }
    const Json& section(const std::string& s) const { return cfg->section(s); }
    Json optional_section(const std::string& s) const {
        const Json* j = cfg ? cfg->find(s) : nullptr;
        return j ? *j : Json::object();
    }
    unsigned long long seed() const {
        if (opt.seed) return *opt.seed;
        Json run = optional_section("run");
        double s = get_number(run, "seed", 1.0);
        if (s < 0 || s != std::floor(s)) fail(ErrorKind::Config, "[run] seed must be a nonnegative integer");
        return static_cast<unsigned long long>(s);
    }
};

void write_json(const std::string& path, const Json& j) {
    std::ofstream os(path);
    os << j.dump(2) << '\n';
    if (!os) fail(ErrorKind::Io, "write failed: " + path);
}

// Minimal line plot; axes autoscale to the data.
void write_svg(const std::string& path, const std::string& title,
               const std::vector<std::pair<std::string, std::pair<Vec, Vec>>>& series) {
    const double W = 640, H = 400, L = 60, R = 20, Tp = 40, B = 40;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (size_t i = 0; i < s.second.first.size(); ++i) {
            double x = s.second.first[i], y = s.second.second[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tp - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::ofstream os(path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n"
       << "<rect x=\"" << L << "\" y=\"" << Tp << "\" width=\"" << W - L - R << "\" height=\"" << H - Tp - B
       << "\" fill=\"none\" stroke=\"#888\"/>\n";
    os << "<text x=\"" << L << "\" y=\"" << H - 12 << "\" font-family=\"sans-serif\" font-size=\"11\">" << x0
       << "</text><text x=\"" << W - R - 40 << "\" y=\"" << H - 12 << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << x1 << "</text>\n";
    os << "<text x=\"4\" y=\"" << H - B << "\" font-family=\"sans-serif\" font-size=\"11\">" << y0
       << "</text><text x=\"4\" y=\"" << Tp + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">" << y1
       << "</text>\n";
    for (size_t s = 0; s < series.size(); ++s) {
        os << "<polyline fill=\"none\" stroke=\"" << colors[s % 4] << "\" stroke-width=\"1.5\" points=\"";
        const auto& [xs, ys] = series[s].second;
        for (size_t i = 0; i < xs.size(); ++i)
            if (std::isfinite(xs[i]) && std::isfinite(ys[i])) os << px(xs[i]) << ',' << py(ys[i]) << ' ';
        os << "\"/>\n<text x=\"" << W - R - 150 << "\" y=\"" << Tp + 16 + 14 * s << "\" fill=\"" << colors[s % 4]
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[s].first << "</text>\n";
    }
    os << "</svg>\n";
    if (!os) fail(ErrorKind::Io, "write failed: " + path);
}

Vec axis_nodes(const Axis& ax) {
    Vec x(ax.n);
    for (int i = 0; i < ax.n; ++i) x[i] = ax.x(i);
    return x;
}

void validate_or_fail(const Env& env, const CostSpec& spec, const SpaceTimeGrid& grid) {
    ValidationReport v = validate_spec(spec, grid);
    for (const auto& w : v.warnings) env.log(LogLevel::warn, w);
    if (!v.ok()) {
        std::string msg = "invalid problem specification:";
        for (const auto& s : v.violations) msg += "\n  " + s;
        fail(ErrorKind::Config, msg);
    }
}

Vec x0_from(const Json& sec, int dim) {
    Vec x0 = get_vec(sec, "x0", Vec(dim, 0.0));
    if (static_cast<int>(x0.size()) != dim) fail(ErrorKind::Config, "x0 must have dim entries");
    return x0;
}

// ---------------------------------------------------------------- hj

Json cmd_hj(Env& env) {
    CostSpec spec = cost_from_config(*env.cfg);
    SpaceTimeGrid grid = grid_from_config(*env.cfg, spec);
    validate_or_fail(env, spec, grid);
    env.log(LogLevel::info, "solving the backward equation on " + std::to_string(grid.x().n) + " x " +
                                std::to_string(grid.n_t) + " nodes");
    ScalarField S = solve_hj(spec, grid);
    ScalarField res = hj_residual(S, spec);
    const double window = default_window(spec, grid);
    const double max_res = max_abs_interior(res, window);
    write_field_csv(S, env.file("S.csv"));
    if (env.binary) write_field_binary(S, env.file("S.bin"));
    write_field_csv(res, env.file("residual.csv"));
    Json summary = {{"max_residual", max_res},
                    {"window_half_width", window},
                    {"log_domain", needs_log_domain(spec, grid, false)},
                    {"S0_min", *std::min_element(S.values.begin(), S.values.begin() + grid.x().n)},
                    {"S0_max", *std::max_element(S.values.begin(), S.values.begin() + grid.x().n)}};
    if (spec.initial) {
        ScalarField Sr = solve_hj_reversed(spec, grid);
        write_field_csv(Sr, env.file("S_rev.csv"));
        summary["max_residual_reversed"] = max_abs_interior(hj_residual(Sr, spec, true), window);
    }
    if (env.svg) {
        Vec x = axis_nodes(grid.x());
        write_svg(env.file("S.svg"), "S(t, x)",
                  {{"t = 0", {x, S.slice(0)}}, {"t = T/2", {x, S.slice(grid.n_t / 2)}},
                   {"t = T", {x, S.slice(grid.n_t - 1)}}});
    }
    write_json(env.file("summary.json"), summary);
    return summary;
}

// ---------------------------------------------------------------- drifts / initial laws

struct DriftBundle {
    DriftSpec drift;
    std::optional<ScalarField> S;  // when built from the optimal drift
};

DriftBundle drift_from_config(const Env& env, const CostSpec& spec) {
    Json d = env.optional_section("drift");
    const std::string kind = get_string(d, "kind", "optimal");
    DriftBundle b;
    if (kind == "optimal") {
        if (spec.dim != 1) fail(ErrorKind::Config, "[drift] optimal drift needs dim = 1 (grid route)");
        SpaceTimeGrid grid = grid_from_config(*env.cfg, spec);
        validate_or_fail(env, spec, grid);
        b.S = solve_hj(spec, grid);
        b.drift = DriftSpec::gradient_of(*b.S);
    } else if (kind == "zero") {
        b.drift = DriftSpec::zero(spec.dim);
    } else if (kind == "linear") {
        Vec A = get_vec(d, "A", {});
        if (A.size() != static_cast<size_t>(spec.dim) * spec.dim)
            fail(ErrorKind::Config, "[drift] A must have dim*dim entries");
        Vec off = get_vec(d, "offset", Vec(spec.dim, 0.0));
        if (static_cast<int>(off.size()) != spec.dim) fail(ErrorKind::Config, "[drift] offset must have dim entries");
        b.drift = DriftSpec::linear(A, spec.dim, off);
    } else if (kind == "registry") {
        if (!d.contains("potential")) fail(ErrorKind::Config, "[drift] registry drift needs a potential table");
        b.drift = DriftSpec::registry(potential_from_json(d["potential"], spec.dim, "[drift].potential"),
                                      get_number(d, "sign", -1.0));
    } else {
        fail(ErrorKind::Config, "[drift] unknown kind '" + kind + "' (optimal, zero, linear, registry)");
    }
    return b;
}

InitialCondition init_from_config(const Env& env, const CostSpec& spec, std::optional<ScalarField>& holder) {
    Json run = env.optional_section("run");
    const std::string kind = get_string(run, "init", "point");
    if (kind == "point") return InitialCondition::point(x0_from(run, spec.dim));
    if (kind == "gaussian") {
        Vec m = get_vec(run, "init_mean", Vec(spec.dim, 0.0));
        Vec c = get_vec(run, "init_cov", {});
        if (static_cast<int>(m.size()) != spec.dim || c.size() != static_cast<size_t>(spec.dim) * spec.dim)
            fail(ErrorKind::Config, "[run] init_mean needs dim entries and init_cov dim*dim entries");
        return InitialCondition::gaussian(m, c);
    }
    if (kind == "born") {
        SpaceTimeGrid grid = grid_from_config(*env.cfg, spec);
        holder = born_marginal(0.0, spec, grid);
        return InitialCondition::from_density(*holder);
    }
    fail(ErrorKind::Config, "[run] unknown init '" + kind + "' (point, gaussian, born)");
}

int positive_int(const Json& sec, const std::string& key, int fallback, const std::string& where) {
    int v = get_int(sec, key, fallback);
    if (v < 1) fail(ErrorKind::Config, where + " " + key + " must be positive");
    return v;
}

// ---------------------------------------------------------------- simulate

Json cmd_simulate(Env& env) {
    CostSpec spec = cost_from_config(*env.cfg);
    Json run = env.optional_section("run");
    const int n_paths = positive_int(run, "n_paths", 10000, "[run]");
    const int n_steps = positive_int(run, "n_steps", 1000, "[run]");
    DriftBundle b = drift_from_config(env, spec);
    std::optional<ScalarField> dens;
    InitialCondition init = init_from_config(env, spec, dens);
    SimOptions so;
    so.record_stride = positive_int(run, "record_stride", std::max(1, n_steps / 100), "[run]");
    const unsigned long long seed = env.seed();
    env.log(LogLevel::info, "simulating " + std::to_string(n_paths) + " paths, drift " + b.drift.kind_name());
    PathEnsemble e = simulate(b.drift, init, spec, TimeGrid{spec.horizon, n_steps}, n_paths, seed, so);

    Json times = Json::array(), means = Json::array(), vars = Json::array();
    for (int k = 0; k < e.n_times(); ++k) {
        Json m = Json::array(), v = Json::array();
        for (int c = 0; c < e.dim; ++c) {
            MeanSE s = mean_se(e.marginal(k, c));
            double var = s.se * s.se * static_cast<double>(s.n);  // sample variance
            m.push_back(s.mean);
            v.push_back(var);
        }
        times.push_back(e.times[k]);
        means.push_back(m);
        vars.push_back(v);
    }
    write_ensemble_csv(e, env.file("ensemble.csv"));
    if (env.binary) write_ensemble_binary(e, env.file("ensemble.bin"));
    Json moments = {{"times", times}, {"mean", means}, {"var", vars}, {"n_paths", e.n_paths},
                    {"n_escaped", e.n_escaped}, {"seed", seed}, {"drift", b.drift.kind_name()}};
    write_json(env.file("moments.json"), moments);
    if (env.svg) {
        Vec t(e.times), m, v;
        for (int k = 0; k < e.n_times(); ++k) {
            m.push_back(means[k][0].get<double>());
            v.push_back(vars[k][0].get<double>());
        }
        write_svg(env.file("moments.svg"), "ensemble moments (component 1)", {{"mean", {t, m}}, {"variance", {t, v}}});
    }
    return Json{{"n_paths", e.n_paths}, {"n_escaped", e.n_escaped}, {"terminal_mean", means.back()},
                {"terminal_var", vars.back()}};
}

// ---------------------------------------------------------------- entropy

Json cmd_entropy(Env& env, int& exit_code) {
    CostSpec spec = cost_from_config(*env.cfg);
    Json run = env.optional_section("run");
    Json ent = env.optional_section("entropy");
    const int n_paths = positive_int(run, "n_paths", 10000, "[run]");
    const int n_steps = positive_int(run, "n_steps", 1000, "[run]");
    DriftBundle b = drift_from_config(env, spec);
    Vec m0 = get_vec(run, "init_mean", Vec(spec.dim, 0.0));
    Vec c0 = get_vec(run, "init_cov", {});
    if (static_cast<int>(m0.size()) != spec.dim || c0.size() != static_cast<size_t>(spec.dim) * spec.dim)
        fail(ErrorKind::Config, "[run] entropy runs need a Gaussian initial law (init_mean, init_cov)");

    // density used by the system term; a mismatch is a negative control
    Vec c_rho = c0;
    const bool mismatch = get_bool(ent, "inject_mismatch", false);
    if (mismatch) {
        double s = get_number(ent, "mismatch_scale", 4.0);
        for (double& v : c_rho) v *= s;
        env.log(LogLevel::warn, "negative control: density built from a mismatched initial covariance");
    }
    const bool linear = b.drift.kind == DriftSpec::Kind::linear || b.drift.kind == DriftSpec::Kind::zero;
    const std::string route = get_string(ent, "density", linear ? "gaussian" : "grid");
    DensityEvolution rho = [&] {
        if (route == "gaussian") {
            if (!linear) fail(ErrorKind::Config, "[entropy] gaussian density route needs a linear drift");
            return evolve_gaussian(b.drift, m0, c_rho, spec, n_steps + 1);
        }
        if (route != "grid") fail(ErrorKind::Config, "[entropy] density must be gaussian or grid");
        if (spec.dim != 1) fail(ErrorKind::Config, "[entropy] grid density route is d = 1");
        SpaceTimeGrid grid = grid_from_config(*env.cfg, spec);
        ScalarField init = ScalarField::space(FieldLabel::rho, {grid.x()});
        for (int i = 0; i < grid.x().n; ++i) {
            double x = grid.x().x(i) - m0[0];
            init.values[i] = std::exp(-0.5 * x * x / c_rho[0]) / std::sqrt(2.0 * M_PI * c_rho[0]);
        }
        return evolve_fpe(init, b.drift, spec, grid);
    }();

    const unsigned long long seed = env.seed();
    PathEnsemble e = simulate(b.drift, InitialCondition::gaussian(m0, c0), spec, TimeGrid{spec.horizon, n_steps},
                              n_paths, seed);
    EntropyLedger L = entropy_ledger(e, rho, b.drift, spec);
    SecondLawReport sl = second_law_check(L);
    IftReport ift = ift_check(L);
    double epr = epr_quadrature(rho, b.drift, spec);
    {
        std::ofstream os(env.file("ledger.csv"));
        os << "path_id,ds_sys,ds_m,ds_tot\n";
        for (size_t i = 0; i < L.ds_tot.size(); ++i)
            os << L.path_ids[i] << ',' << format_double(L.ds_sys[i]) << ',' << format_double(L.ds_m[i]) << ','
               << format_double(L.ds_tot[i]) << '\n';
        if (!os) fail(ErrorKind::Io, "write failed: ledger.csv");
    }
    Json summary = {{"mean_tot", L.total.mean},
                    {"se_tot", L.total.se},
                    {"mean_sys", L.sys.mean},
                    {"mean_medium", L.medium.mean},
                    {"ift_mean", ift.mean_exp},
                    {"ift_se", ift.se},
                    {"epr_quadrature", epr},
                    {"density_route", route},
                    {"n_paths", static_cast<long>(L.ds_tot.size())},
                    {"excluded", L.excluded},
                    {"mismatch_injected", mismatch},
                    {"pass", {{"second_law", sl.pass}, {"ift", ift.pass}}}};
    write_json(env.file("summary.json"), summary);
    if (!sl.pass || !ift.pass) {
        exit_code = 4;
        env.log(LogLevel::error, "entropy checks failed (second law " + std::string(sl.pass ? "pass" : "FAIL") +
                                     ", IFT " + (ift.pass ? "pass" : "FAIL") + ")");
    }
    return summary;
}

// ---------------------------------------------------------------- bridge

ScalarField mixture_on_axis(const Json& j, const Axis& ax, const std::string& where) {
    if (!j.is_object()) fail(ErrorKind::Config, where + " must be a table with means, sds, weights");
    Vec means = get_vec(j, "means", {});
    Vec sds = get_vec(j, "sds", {});
    Vec w = get_vec(j, "weights", Vec(means.size(), 1.0));
    if (means.empty() || sds.size() != means.size() || w.size() != means.size())
        fail(ErrorKind::Config, where + ": means, sds and weights must have equal nonzero length");
    double tw = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
        if (!(w[k] >= 0.0)) fail(ErrorKind::Specification, where + ": mixture weights must be nonnegative");
        if (!(sds[k] > 0.0)) fail(ErrorKind::Specification, where + ": standard deviations must be positive");
        tw += w[k];
    }
    if (!(tw > 0.0)) fail(ErrorKind::Specification, where + ": target density is identically zero");
    ScalarField f = ScalarField::space(FieldLabel::rho, {ax});
    for (int i = 0; i < ax.n; ++i) {
        double v = 0.0;
        for (size_t k = 0; k < w.size(); ++k) {
            double z = (ax.x(i) - means[k]) / sds[k];
            v += w[k] / tw * std::exp(-0.5 * z * z) / (sds[k] * std::sqrt(2.0 * M_PI));
        }
        f.values[i] = v;
    }
    return f;
}

Json cmd_bridge(Env& env) {
    CostSpec spec = cost_from_config(*env.cfg);
    if (spec.dim != 1) fail(ErrorKind::Config, "bridge runs are d = 1");
    SpaceTimeGrid grid = grid_from_config(*env.cfg, spec);
    validate_or_fail(env, spec, grid);
    const Json& br = env.section("bridge");
    if (!br.contains("rho0") || !br.contains("rhoT")) fail(ErrorKind::Config, "[bridge] needs rho0 and rhoT tables");
    ScalarField r0 = mixture_on_axis(br["rho0"], grid.x(), "[bridge].rho0");
    ScalarField rT = mixture_on_axis(br["rhoT"], grid.x(), "[bridge].rhoT");
    BridgeOptions bo;
    bo.tol = get_number(br, "tol", bo.tol);
    bo.max_iter = positive_int(br, "max_iter", bo.max_iter, "[bridge]");
    BridgeSolution sol = solve_schrodinger_system(r0, rT, spec, grid, bo);
    env.log(LogLevel::info, "IPFP converged in " + std::to_string(sol.iterations) + " iterations");
    ScalarField Sstar = optimal_drift(sol, spec, grid);
    ScalarField drift = Sstar;
    for (int k = 0; k < drift.n_t; ++k) {
        Vec g = gradient_1d(Sstar.slice_ptr(k), Sstar.nx(), grid.x().dx());
        std::copy(g.begin(), g.end(), drift.slice_ptr(k));
    }
    drift.label = FieldLabel::other;
    write_field_csv(sol.f_star, env.file("f_star.csv"));
    write_field_csv(sol.g_star, env.file("g_star.csv"));
    write_field_csv(sol.fitted_rho0, env.file("fitted_rho0.csv"));
    write_field_csv(sol.fitted_rhoT, env.file("fitted_rhoT.csv"));
    write_field_csv(drift, env.file("drift.csv"));
    if (env.binary) write_field_binary(Sstar, env.file("S_star.bin"));
    Json diag = {{"iterations", sol.iterations},
                 {"l1_initial", sol.l1_0},
                 {"l1_terminal", sol.l1_T},
                 {"floored_nodes", sol.floored_nodes},
                 {"kernel_min_raw", sol.kernel->min_raw},
                 {"history", sol.history}};
    write_json(env.file("diagnostics.json"), diag);
    if (env.svg) {
        Vec x = axis_nodes(grid.x());
        write_svg(env.file("marginals.svg"), "bridge marginals",
                  {{"rho0", {x, r0.values}}, {"rhoT", {x, rT.values}}, {"fitted rho0", {x, sol.fitted_rho0.values}},
                   {"fitted rhoT", {x, sol.fitted_rhoT.values}}});
    }
    diag.erase("history");
    return diag;
}

// ---------------------------------------------------------------- mpp

Json report_json(const ActionReport& r) {
    return Json{{"value", r.value},         {"gradient_norm", r.gradient_norm}, {"method", r.method},
                {"iterations", r.iterations}, {"initial_velocity", r.initial_velocity}, {"trace", r.trace},
                {"starts", r.starts}};
}

Json cmd_mpp(Env& env) {
    CostSpec spec = cost_from_config(*env.cfg);
    Json m = env.optional_section("mpp");
    Vec x0 = x0_from(m, spec.dim);
    const std::string method = get_string(m, "method", "shooting");
    const double tol = get_number(m, "tol", 1e-10);
    Json out = Json::object();
    if (method == "shooting" || method == "both") {
        ELOptions eo;
        eo.n_steps = positive_int(m, "n_steps", 1000, "[mpp]");
        eo.max_iter = positive_int(m, "max_iter", 60, "[mpp]");
        ActionReport r = solve_euler_lagrange(x0, spec, tol, eo);
        write_path_csv(r.path, env.file("path.csv"));
        out["shooting"] = report_json(r);
    }
    if (method == "direct" || method == "both") {
        DirectOptions dopt;
        dopt.max_iter = positive_int(m, "direct_max_iter", dopt.max_iter, "[mpp]");
        dopt.multistart = positive_int(m, "multistart", 1, "[mpp]");
        ActionReport r = minimize_om_direct(x0, spec, positive_int(m, "n_knots", 200, "[mpp]"),
                                            get_number(m, "direct_tol", 1e-9), dopt);
        write_path_csv(r.path, env.file("path_direct.csv"));
        out["direct"] = report_json(r);
    }
    if (out.empty()) fail(ErrorKind::Config, "[mpp] method must be shooting, direct or both");
    write_json(env.file("action.json"), out);
    Json summary = Json::object();
    for (auto& [k, v] : out.items()) summary[k] = v["value"];
    return summary;
}

// ---------------------------------------------------------------- verify

Json cmd_verify(Env& env, int& exit_code) {
    Json vsec = env.optional_section("verify");
    std::string suite = !env.opt.suite.empty() ? env.opt.suite : get_string(vsec, "suite", "all");
    VerifyOptions vo;
    if (env.opt.seed) vo.seed = *env.opt.seed;
    std::string ff = get_string(vsec, "field_file", "");
    if (!ff.empty()) {
        fs::path p(ff);
        if (p.is_relative() && env.cfg && env.cfg->source.find('/') != std::string::npos)
            p = fs::path(env.cfg->source).parent_path() / p;
        vo.field_file = p.string();
    }
    vo.log = [&](const std::string& s) { env.log(LogLevel::info, s); };
    Json crit = Json::array();
    bool all = true;
    for (int id : suite_criteria(suite)) {
        CriterionResult r = run_criterion(id, vo);
        env.log(r.pass ? LogLevel::info : LogLevel::error,
                "criterion " + std::to_string(id) + " (" + r.name + "): " + (r.pass ? "PASS" : "FAIL"));
        all = all && r.pass;
        crit.push_back(to_json(r));
    }
    Json report = {{"suite", suite}, {"pass", all}, {"criteria", crit}};
    write_json(env.file("verify.json"), report);
    if (!all) exit_code = 4;
    Json summary = {{"suite", suite}, {"pass", all}};
    for (const auto& c : crit) summary["criteria"][std::to_string(c["id"].get<int>())] = c["pass"];
    return summary;
}

Json versions() {
    return Json{{"stl", kVersion},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                {"compiler", __VERSION__}};
}

}  // namespace

CommandResult run_command(const CommandOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    CommandResult res;
    Env env{opt, opt.config ? &*opt.config : nullptr, fs::path(opt.out_dir), {}};
    Json seed_json = nullptr;
    try {
        if (opt.threads > 0) set_threads(opt.threads);
        const std::string& c = opt.command;
        if (c != "verify" && !env.cfg) fail(ErrorKind::Config, "command '" + c + "' needs --config");
        Json out = env.optional_section("output");
        env.svg = get_bool(out, "svg", false);
        env.binary = get_bool(out, "binary", true);
        if (c != "verify" && c != "hj" && c != "bridge" && c != "mpp") seed_json = env.seed();
        int code = 0;
        if (c == "hj")
            res.summary = cmd_hj(env);
        else if (c == "simulate")
            res.summary = cmd_simulate(env);
        else if (c == "entropy")
            res.summary = cmd_entropy(env, code);
        else if (c == "bridge")
            res.summary = cmd_bridge(env);
        else if (c == "mpp")
            res.summary = cmd_mpp(env);
        else if (c == "verify")
            res.summary = cmd_verify(env, code);
        else
            fail(ErrorKind::Config, "unknown command '" + c + "' (hj, simulate, entropy, bridge, mpp, verify)");
        res.exit_code = code;
        if (code == 4) res.error = "verification failed";
    } catch (const Error& e) {
        res.exit_code = exit_code_for(e.kind());
        res.error = std::string(to_string(e.kind())) + " error: " + e.what();
    } catch (const std::exception& e) {
        res.exit_code = 3;
        res.error = std::string("error: ") + e.what();
    }
    if (!res.error.empty()) env.log(LogLevel::error, res.error);
    res.outputs = env.outputs;
    // manifest
    try {
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        Json man = {{"command", opt.command},
                    {"config_digest", env.cfg ? Json(env.cfg->digest()) : Json(nullptr)},
                    {"config_source", env.cfg ? Json(env.cfg->source) : Json(nullptr)},
                    {"seed", seed_json},
                    {"versions", versions()},
                    {"wall_time", wall},
                    {"exit_code", res.exit_code},
                    {"outputs", env.outputs}};
        if (!res.error.empty()) man["error"] = res.error;
        fs::create_directories(env.dir);
        write_json((env.dir / "manifest.json").string(), man);
    } catch (const std::exception& e) {
        env.log(LogLevel::warn, std::string("could not write manifest: ") + e.what());
    }
    return res;
}

}  // namespace stl
