#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include "wulffflow/calibration.hpp"
#include "wulffflow/diagnostics.hpp"
#include "wulffflow/errors.hpp"
#include "wulffflow/identities.hpp"
#include "wulffflow/interface.hpp"
#include "wulffflow/solver.hpp"

namespace fs = std::filesystem;

namespace wulffflow::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x)
{
    if (std::isnan(x)) return "nan";
    return fmt::format("{:.17g}", x);
}

class Csv {
public:
    Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path)
    {
        if (!out_) throw InputError(fmt::format("cannot write {}", path.string()));
        row(header);
    }
    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

// |W_σ| = |B_1|·mean over the sphere of ρ^d, ρ = 1/σ° the radial function.
double wulff_measure(const Anisotropy& a)
{
    const int d = a.dim();
    const auto dirs = sphere_directions(d, d == 3 ? 20000 : 4096);
    double s = 0.0;
    for (const auto& e : dirs) s += std::pow(1.0 / a.polar(e), d);
    s /= static_cast<double>(dirs.size());
    const double ball = d == 1 ? 2.0 : d == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
    return ball * s;
}

Model make_model(const RunConfig& c)
{
    Anisotropy sigma = make_anisotropy(c.sigma, c.d);
    Anisotropy mu = c.mobility ? make_anisotropy(*c.mobility, c.d) : sigma;
    return Model(std::move(sigma), std::move(mu), make_well(c.well));
}

bool mobility_is_sigma(const Model& m) { return m.sigma() == m.mobility(); }

void require_run_fields(const RunConfig& c, const char* cmd)
{
    if (c.eps_list.empty()) throw ConfigError(fmt::format("{}: eps: missing (required by {})", c.origin, cmd));
    if (!(c.t_end > 0.0) && c.scenario.kind != ScenarioKind::constant)
        throw ConfigError(fmt::format("{}: t_end: must be positive for {}", c.origin, cmd));
}

PeriodicField initial_field(const RunConfig& c, const Model& m, const Grid& g, double eps)
{
    const Profile prof(m.well());
    switch (c.scenario.kind) {
    case ScenarioKind::wulff: {
        Vec center(c.d);
        for (int i = 0; i < c.d; ++i) center(i) = c.scenario.center[static_cast<std::size_t>(i)];
        return initial_wulff(m.sigma(), prof, center, c.scenario.r0, eps, g);
    }
    case ScenarioKind::planar:
        return initial_planar(m.sigma(), prof, c.scenario.axis, c.scenario.plane_center, c.scenario.half_width, eps, g);
    case ScenarioKind::snapshot: {
        SnapshotMeta meta;
        PeriodicField u = read_snapshot(c.scenario.path, &meta);
        if (u.grid() != g)
            throw ConfigError(fmt::format("{}: scenario.snapshot.path: grid (d={}, n={}, L={}) differs from the config "
                                          "grid (d={}, n={}, L={})",
                                          c.origin, meta.dims, meta.n, meta.L, g.dim, g.n, g.length));
        return u;
    }
    case ScenarioKind::constant: return PeriodicField(g, c.scenario.value);
    }
    throw ConfigError("unknown scenario");
}

Vec scenario_center(const RunConfig& c)
{
    Vec center(c.d);
    for (int i = 0; i < c.d; ++i)
        center(i) = c.scenario.kind == ScenarioKind::wulff ? c.scenario.center[static_cast<std::size_t>(i)] : 0.5 * c.L;
    return center;
}

// The shrinking-Wulff law applies to a Wulff initial shape with μ = σ.
bool has_radius_law(const RunConfig& c, const Model& m)
{
    return c.scenario.kind == ScenarioKind::wulff && mobility_is_sigma(m) && c.d >= 2;
}

// Calibration is available when the reference evolution is defined.
std::optional<Calibration> make_calibration(const RunConfig& c, const Model& m, double t_last, bool strict)
{
    auto refuse = [&](const std::string& why) -> std::optional<Calibration> {
        if (strict) throw ConfigError(fmt::format("{}: calibration: {}", c.origin, why));
        spdlog::info("calibration disabled: {}", why);
        return std::nullopt;
    };
    if (c.scenario.kind != ScenarioKind::wulff) return refuse("needs a wulff scenario");
    if (!mobility_is_sigma(m)) return refuse("needs mobility same-as-sigma");
    if (c.d < 2) return refuse("needs d >= 2");
    if (m.sigma().kind() != AnisotropyKind::euclidean && c.d != 2) return refuse("anisotropic calibration needs d = 2");
    const double r0 = c.scenario.r0;
    const double t_ext = r0 * r0 / (2.0 * (c.d - 1));
    double horizon = c.calibration.horizon > 0.0 ? c.calibration.horizon : t_last;
    horizon = std::max(horizon, t_last * (1.0 + 1e-12));
    if (!(horizon > 0.0)) horizon = 0.5 * t_ext;
    if (horizon >= t_ext)
        return refuse(fmt::format("horizon {:.6g} reaches the extinction time {:.6g}", horizon, t_ext));
    try {
        const ReferenceEvolution ref(m.sigma(), scenario_center(c), r0, horizon, c.L);
        return build_calibration(ref, c.calibration.delta);
    } catch (const InputError& e) {
        return refuse(e.what());
    }
}

CalibrationSampling sampling_of(const RunConfig& c)
{
    CalibrationSampling s;
    s.times = c.calibration.times;
    s.n_angles = c.calibration.n_angles;
    s.n_layers = c.calibration.n_layers;
    s.n_bulk = c.calibration.n_bulk;
    return s;
}

RadiusFit fit_radius(const std::vector<RadiusRow>& rows, double expected)
{
    RadiusFit f;
    f.expected_slope = expected;
    double st = 0, sy = 0, stt = 0, sty = 0;
    long n = 0;
    for (const auto& r : rows) {
        if (!(r.radius > 0.0)) continue;
        const double y = r.radius * r.radius;
        st += r.t;
        sy += y;
        stt += r.t * r.t;
        sty += r.t * y;
        ++n;
    }
    f.points = n;
    const double den = n * stt - st * st;
    if (n < 2 || den <= 0.0) {
        f.slope = f.intercept = f.rel_error = f.exponent = kNaN;
        return f;
    }
    f.slope = (n * sty - st * sy) / den;
    f.intercept = (sy - f.slope * st) / n;
    f.rel_error = expected != 0.0 ? std::abs(f.slope - expected) / std::abs(expected) : kNaN;
    // log r = p log(t_ext − t) + const with t_ext from the r² fit
    const double t_ext = f.slope < 0.0 ? -f.intercept / f.slope : kNaN;
    double sx = 0, sl = 0, sxx = 0, sxl = 0;
    long m = 0;
    for (const auto& r : rows) {
        if (!(r.radius > 0.0) || !(t_ext - r.t > 0.0)) continue;
        const double x = std::log(t_ext - r.t), l = std::log(r.radius);
        sx += x;
        sl += l;
        sxx += x * x;
        sxl += x * l;
        ++m;
    }
    const double den2 = m * sxx - sx * sx;
    f.exponent = (m >= 2 && den2 > 0.0) ? (m * sxl - sx * sl) / den2 : kNaN;
    return f;
}

void check_grid_resolution(const RunConfig& c, double eps, int n)
{
    const double dx = c.L / n;
    if (eps < 4.0 * dx * (1.0 - 1e-12))
        throw ConfigError(fmt::format("{}: eps: {} resolves the interface by fewer than 4 cells (n = {}, dx = {:.6g})",
                                      c.origin, eps, n, dx));
}

}  // namespace

nlohmann::json CaseResult::to_json() const
{
    auto jnum = [](double x) -> nlohmann::json { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["eps"] = eps;
    j["n"] = n;
    j["h"] = h;
    j["steps"] = steps;
    j["energy"] = {{"initial", energy_initial}, {"final", energy_final}, {"max_increase", max_energy_increase}};
    j["min_dissipation_slack"] = min_dissipation_slack;
    j["max_principle"] = {{"bound", mp_bound}, {"min_slack", min_max_principle_slack}};
    j["radius_fit"] = {{"quantity", "r^2 vs t"},        {"slope", jnum(fit.slope)},
                       {"intercept", jnum(fit.intercept)}, {"expected_slope", jnum(fit.expected_slope)},
                       {"rel_error", jnum(fit.rel_error)}, {"exponent", jnum(fit.exponent)},
                       {"points", fit.points}};
    nlohmann::json series = nlohmann::json::array();
    for (const auto& r : radius)
        if (r.step % std::max<long>(1, steps / 200) == 0 || r.step == steps)
            series.push_back({{"step", r.step}, {"t", r.t}, {"radius", jnum(r.radius)}});
    j["radius_series"] = series;
    j["hausdorff"] = {{"max", jnum(hausdorff_max)}, {"checkpoints", hausdorff_checkpoints}};
    j["calibration"] = {{"enabled", calibrated}, {"c_fit", calibrated ? jnum(c_fit) : nlohmann::json(nullptr)}};
    j["gronwall_holds"] = gronwall_holds ? nlohmann::json(*gronwall_holds) : nlohmann::json(nullptr);
    return j;
}

int member_grid_size(const RunConfig& c, std::size_t i)
{
    if (!c.n_list.empty()) return c.n_list.at(i);
    if (i == 0) return c.n;
    return static_cast<int>(std::lround(c.n * c.eps_list.front() / c.eps_list[i]));
}

CaseResult simulate_case(const RunConfig& c, std::size_t i, const std::string& dir)
{
    const double eps = c.eps_list.at(i);
    const int n = member_grid_size(c, i);
    check_grid_resolution(c, eps, n);
    const Model m = make_model(c);
    const Grid g(c.d, n, c.L);

    SolverConfig cfg = SolverConfig::make(m, eps, c.t_end, c.theta_h);
    cfg.tol_grad = c.tol_grad;
    cfg.max_inner_iters = c.max_inner_iters;
    cfg.lbfgs_memory = c.lbfgs_memory;
    cfg.snapshot_every = c.snapshot_every;
    cfg.keep_neighbours = true;
    cfg.dump_dir = (fs::path(dir) / "dump").string();
    validate(cfg, m);

    fs::create_directories(dir);
    const PeriodicField u0 = initial_field(c, m, g, eps);
    const Vec center = scenario_center(c);
    const bool law = has_radius_law(c, m);
    const double r0 = c.scenario.r0;
    const double wm = wulff_measure(m.sigma());
    const double r_law = law ? -2.0 * (c.d - 1) : 0.0;

    CaseResult res;
    res.dir = dir;
    res.eps = eps;
    res.n = n;
    res.h = cfg.h;

    auto radius_row = [&](long k, double t, const PeriodicField& u) {
        RadiusRow r;
        r.step = k;
        r.t = t;
        const Interface iface = extract_interface(u);
        r.measure = iface.empty() ? 0.0 : enclosed_measure(iface, center, c.L);
        if (r.measure < 0.0) r.measure += std::pow(c.L, c.d);  // complement phase wraps the torus
        r.radius = r.measure > 0.0 ? std::pow(r.measure / wm, 1.0 / c.d) : 0.0;
        const double r2 = r0 * r0 + r_law * t;
        r.radius_ref = law && r2 > 0.0 ? std::sqrt(r2) : kNaN;
        return r;
    };

    Csv run_csv(fs::path(dir) / "run.csv",
                {"step", "t", "E_total", "E_dirichlet", "E_potential", "dissipation_increment", "dissipation_sum",
                 "max_principle_slack", "inner_iters", "grad_residual"});
    const EnergyReport e0 = energy_eps(u0, eps, m.sigma(), m.well());
    const double mp0 = std::max(linf_center_distance(u0), 0.5);
    run_csv.row({"0", num(0.0), num(e0.total), num(e0.dirichlet), num(e0.potential), num(0.0), num(0.0),
                 num(mp0 - linf_center_distance(u0)), "0", num(0.0)});
    res.radius.push_back(radius_row(0, 0.0, u0));
    double dsum = 0.0;
    res.max_energy_increase = -std::numeric_limits<double>::infinity();
    res.min_dissipation_slack = std::numeric_limits<double>::infinity();
    res.min_max_principle_slack = mp0 - linf_center_distance(u0);

    const auto t0 = std::chrono::steady_clock::now();
    Trajectory tr = run(u0, cfg, m, [&](const StepRecord& r, const PeriodicField& u) {
        dsum += r.metric_increment / cfg.h;
        run_csv.row({std::to_string(r.step), num(r.time), num(r.energy_after.total), num(r.energy_after.dirichlet),
                     num(r.energy_after.potential), num(r.metric_increment / cfg.h), num(dsum),
                     num(r.max_principle_slack), std::to_string(r.inner_iters), num(r.grad_residual)});
        res.max_energy_increase = std::max(res.max_energy_increase, r.energy_after.total - r.energy_before);
        res.min_dissipation_slack = std::min(res.min_dissipation_slack, r.dissipation_slack);
        res.min_max_principle_slack = std::min(res.min_max_principle_slack, r.max_principle_slack);
        res.radius.push_back(radius_row(r.step, r.time, u));
    });
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    spdlog::info("eps={} n={}: {} steps of h={:.4g} in {:.1f}s", eps, n, tr.steps(), cfg.h, wall);

    res.steps = tr.steps();
    res.energy_initial = tr.initial_energy.total;
    res.energy_final = tr.records.empty() ? res.energy_initial : tr.records.back().energy_after.total;
    res.mp_bound = tr.mp_bound;
    if (tr.records.empty()) res.max_energy_increase = res.min_dissipation_slack = 0.0;

    {
        Csv rcsv(fs::path(dir) / "radius.csv", {"step", "t", "measure", "radius", "radius_ref"});
        for (const auto& r : res.radius)
            rcsv.row({std::to_string(r.step), num(r.t), num(r.measure), num(r.radius), num(r.radius_ref)});
    }
    if (law) {
        std::vector<RadiusRow> window;
        for (const auto& r : res.radius)
            if (r.t <= c.t_end * (1.0 + 1e-12)) window.push_back(r);
        res.fit = fit_radius(window, r_law);
    } else {
        res.fit = fit_radius(res.radius, 0.0);
    }

    // Diagnostics at the checkpoints: step 0, multiples of snapshot_every,
    // and the final step.
    std::vector<long> checkpoints;
    for (const auto& [k, u] : tr.snapshots) {
        (void)u;
        const long s = c.snapshot_every;
        if (k == 0 || k == tr.steps() || (s > 0 && k % s == 0)) checkpoints.push_back(k);
    }

    std::optional<Calibration> cal;
    if (c.diagnostics.enabled && c.calibration.enabled)
        cal = make_calibration(c, m, tr.time(tr.steps()), c.calibration.explicitly_enabled);
    std::optional<StabilitySeries> stab;
    if (cal) {
        const CalibrationReport rep = check_calibration(*cal, sampling_of(c));
        res.calibrated = true;
        res.c_fit = rep.c_fit();
        {
            std::ofstream(fs::path(dir) / "calibration_report.json") << rep.to_json() << '\n';
        }
        stab = stability_monitor(tr, *cal, res.c_fit);
        res.gronwall_holds = stab->holds;
    }

    const SmoothVectorField B = radial_field(center, c.L);
    const bool hausdorff_on = law && c.d == 2;
    res.hausdorff_max = hausdorff_on ? 0.0 : kNaN;
    std::optional<ReferenceEvolution> hausdorff_ref;
    if (hausdorff_on) {
        const double t_ext = r0 * r0 / 2.0;
        const double hz = std::min(0.999 * t_ext, std::max(tr.time(tr.steps()) * (1 + 1e-12), 1e-300));
        try {
            hausdorff_ref.emplace(m.sigma(), center, r0, hz, c.L);
        } catch (const InputError& e) {
            spdlog::warn("hausdorff series disabled: {}", e.what());
            res.hausdorff_max = kNaN;
        }
    }

    if (c.diagnostics.enabled) {
        if (c.diagnostics.interface_dump) fs::create_directories(fs::path(dir) / "interfaces");
        for (long k : checkpoints) {
            const PeriodicField& u = tr.snapshot(k);
            const double t = tr.time(k);
            DiagnosticsRow row;
            row.step = k;
            row.t = t;
            const Interface iface = extract_interface(u);
            row.equip_defect = equipartition_defect(u, eps, m.sigma(), m.well());
            row.sharp_energy = sharp_energy(iface, m.sigma());
            row.interface_length = iface.measure();
            row.eps_rel_entropy = row.rel_entropy = row.bulk_error = kNaN;
            if (cal && c.diagnostics.entropy) {
                row.eps_rel_entropy = eps_relative_entropy(u, cal->xi_sampler(t), eps, m.sigma(), m.well());
                row.rel_entropy = relative_entropy(iface, cal->xi_sampler(t), m.sigma());
                row.bulk_error = bulk_error(u, cal->theta_sampler(t));
            }
            row.velocity_l2 = row.mcf_residual = kNaN;
            std::optional<VelocityEstimate> vel;
            if (c.diagnostics.velocity && k >= 1 && tr.has_snapshot(k - 1) && tr.has_snapshot(k + 1)) {
                vel = normal_velocity(tr, k);
                row.velocity_l2 = vel->l2();
                row.mcf_residual = mcf_residual_parts(*vel, B, m.sigma(), m.mobility()).residual;
            }
            row.curvature_residual =
                c.diagnostics.curvature ? curvature_residual(u, B, eps, m.sigma(), m.well()) : kNaN;
            row.rel_entropy_cal = row.bulk_error_cal = row.vel_cross_term = row.gronwall_envelope = kNaN;
            if (stab) {
                for (const auto& s : stab->rows)
                    if (s.step == k) {
                        row.rel_entropy_cal = s.rel_entropy;
                        row.bulk_error_cal = s.bulk_error;
                        row.vel_cross_term = s.vel_cross;
                        row.gronwall_envelope = s.envelope;
                    }
            }
            row.hausdorff = kNaN;
            if (hausdorff_ref && !iface.empty()) {
                row.hausdorff = hausdorff_distance(iface, hausdorff_ref->boundary_polyline(t, 2048), center, c.L);
                res.hausdorff_max = std::max(res.hausdorff_max, row.hausdorff);
                ++res.hausdorff_checkpoints;
            }
            if (c.diagnostics.interface_dump)
                write_interface_csv((fs::path(dir) / "interfaces" / fmt::format("iface_{}.csv", k)).string(), iface,
                                    vel ? &vel->V : nullptr);
            res.diagnostics.push_back(row);
        }
        Csv dcsv(fs::path(dir) / "diagnostics.csv",
                 {"step", "t", "equip_defect", "sharp_energy", "interface_length", "eps_rel_entropy", "rel_entropy",
                  "bulk_error", "velocity_l2", "mcf_residual", "curvature_residual", "rel_entropy_cal",
                  "bulk_error_cal", "vel_cross_term", "gronwall_envelope", "hausdorff"});
        for (const auto& r : res.diagnostics)
            dcsv.row({std::to_string(r.step), num(r.t), num(r.equip_defect), num(r.sharp_energy),
                      num(r.interface_length), num(r.eps_rel_entropy), num(r.rel_entropy), num(r.bulk_error),
                      num(r.velocity_l2), num(r.mcf_residual), num(r.curvature_residual), num(r.rel_entropy_cal),
                      num(r.bulk_error_cal), num(r.vel_cross_term), num(r.gronwall_envelope), num(r.hausdorff)});
    }

    const std::string sdir = (fs::path(dir) / "snapshots").string();
    for (long k : checkpoints) write_snapshot(sdir, k, tr.snapshot(k), tr.time(k), eps);

    nlohmann::json summary = res.to_json();
    summary["config"] = c.origin;
    summary["wall_seconds"] = wall;
    std::ofstream(fs::path(dir) / "summary.json") << summary.dump(2) << '\n';
    return res;
}

namespace {

// Runs fn(i) for i in [0, n) on at most `jobs` worker threads; rethrows the
// failure of the lowest index.
void run_jobs(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn)
{
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < w; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string member_dir(const std::string& root, const RunConfig& c, std::size_t i)
{
    if (c.eps_list.size() == 1) return root;
    return (fs::path(root) / fmt::format("eps_{}_n{}", c.eps_list[i], member_grid_size(c, i))).string();
}

}  // namespace

ConvergeReport converge_sweep(const RunConfig& c, const std::string& dir, int jobs)
{
    require_run_fields(c, "converge");
    if (c.eps_list.size() < 3)
        throw InputError(fmt::format("{}: eps_list: converge needs at least 3 values, got {}", c.origin,
                                     c.eps_list.size()));
    for (std::size_t i = 1; i < c.eps_list.size(); ++i) {
        if (!(c.eps_list[i] < c.eps_list[i - 1]))
            throw InputError(fmt::format("{}: eps_list: values must be strictly decreasing", c.origin));
        // interface resolution ε/Δx may grow along the sweep but never shrink
        const double r_prev = c.eps_list[i - 1] * member_grid_size(c, i - 1);
        const double r_cur = c.eps_list[i] * member_grid_size(c, i);
        if (r_cur < r_prev * (1.0 - 1e-9))
            throw InputError(fmt::format("{}: grid: eps/dx decreases from {:.4g} to {:.4g} along the sweep", c.origin,
                                         r_prev / c.L, r_cur / c.L));
    }
    if (c.scenario.kind != ScenarioKind::wulff) throw InputError(fmt::format("{}: scenario: converge needs wulff", c.origin));

    const Model m = make_model(c);
    ConvergeReport rep;
    rep.rows.resize(c.eps_list.size());
    run_jobs(c.eps_list.size(), jobs, [&](std::size_t i) {
        RunConfig mc = c;
        const double eps = c.eps_list[i];
        const double h = SolverConfig::make(m, eps, 0.0, c.theta_h).h;
        const long ks = std::max(1L, std::lround(c.t_end / h));
        mc.eps_list = {eps};
        mc.n_list.clear();
        mc.n = member_grid_size(c, i);
        mc.t_end = static_cast<double>(ks + 1) * h;
        mc.snapshot_every = static_cast<int>(ks);
        mc.calibration.enabled = false;
        mc.diagnostics.entropy = false;
        const CaseResult cr = simulate_case(mc, 0, member_dir(dir, c, i));
        ConvergeRow row;
        row.eps = eps;
        row.n = mc.n;
        row.step = ks;
        row.t = ks * h;
        for (const auto& d : cr.diagnostics)
            if (d.step == ks) {
                row.equip_defect = d.equip_defect;
                row.mcf_residual = d.mcf_residual;
                row.curvature_residual = d.curvature_residual;
            }
        // Mean normal-velocity defect over [0, t*]: the drift of the extracted
        // radius against the law, so the fixed discretization offset of the
        // initial radius cancels.
        const RadiusRow& r0 = cr.radius.front();
        const RadiusRow& rk = cr.radius.at(static_cast<std::size_t>(ks));
        row.radius_law_error = std::abs((rk.radius - r0.radius) - (rk.radius_ref - r0.radius_ref)) / rk.t;
        rep.rows[i] = row;
    });

    const std::vector<std::pair<std::string, double ConvergeRow::*>> cols = {
        {"equip_defect", &ConvergeRow::equip_defect},
        {"mcf_residual", &ConvergeRow::mcf_residual},
        {"curvature_residual", &ConvergeRow::curvature_residual},
        {"radius_law_error", &ConvergeRow::radius_law_error}};
    for (const auto& [name, ptr] : cols) {
        bool ok = true;
        for (std::size_t i = 1; i < rep.rows.size(); ++i)
            if (!(rep.rows[i].*ptr < rep.rows[i - 1].*ptr)) ok = false;
        if (!ok) rep.failing_columns.push_back(name);
    }

    fs::create_directories(dir);
    Csv csv(fs::path(dir) / "converge.csv",
            {"eps", "n", "step", "t", "equip_defect", "mcf_residual", "curvature_residual", "radius_law_error"});
    for (const auto& r : rep.rows)
        csv.row({num(r.eps), std::to_string(r.n), std::to_string(r.step), num(r.t), num(r.equip_defect),
                 num(r.mcf_residual), num(r.curvature_residual), num(r.radius_law_error)});
    return rep;
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InputError*>(&e)) return 2;
    if (dynamic_cast<const InvariantError*>(&e)) return 4;
    if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 3;
    return 1;
}

namespace {

std::string out_dir(const GlobalOptions& g, const RunConfig& c) { return g.out.empty() ? c.output_dir : g.out; }

}  // namespace

int cmd_simulate(const GlobalOptions& g)
{
    const RunConfig c = load_config(g.config);
    require_run_fields(c, "simulate");
    const std::string root = out_dir(g, c);
    std::vector<CaseResult> results(c.eps_list.size());
    run_jobs(c.eps_list.size(), g.jobs, [&](std::size_t i) { results[i] = simulate_case(c, i, member_dir(root, c, i)); });
    int status = 0;
    for (const auto& r : results) {
        fmt::print("eps={} n={} steps={} E0={:.10g} E={:.10g} r2_slope={} hausdorff_max={} gronwall={}\n", r.eps, r.n,
                   r.steps, r.energy_initial, r.energy_final, num(r.fit.slope), num(r.hausdorff_max),
                   r.gronwall_holds ? (*r.gronwall_holds ? "holds" : "VIOLATED") : "n/a");
        if (r.gronwall_holds && !*r.gronwall_holds) {
            spdlog::error("eps={}: stability monitor: Groenwall envelope violated (see {}/diagnostics.csv)", r.eps, r.dir);
            status = 4;
        }
    }
    return status;
}

int cmd_converge(const GlobalOptions& g)
{
    const RunConfig c = load_config(g.config);
    const ConvergeReport rep = converge_sweep(c, out_dir(g, c), g.jobs);
    fmt::print("{:>12} {:>6} {:>14} {:>14} {:>18} {:>16}\n", "eps", "n", "equip_defect", "mcf_residual",
               "curvature_residual", "radius_law_error");
    for (const auto& r : rep.rows)
        fmt::print("{:>12.6g} {:>6} {:>14.6e} {:>14.6e} {:>18.6e} {:>16.6e}\n", r.eps, r.n, r.equip_defect,
                   r.mcf_residual, r.curvature_residual, r.radius_law_error);
    if (!rep.failing_columns.empty()) {
        for (const auto& col : rep.failing_columns) spdlog::error("converge: column {} is not strictly decreasing", col);
        return 4;
    }
    fmt::print("all columns strictly decreasing\n");
    return 0;
}

int cmd_calibrate_check(const GlobalOptions& g)
{
    RunConfig c = load_config(g.config);
    const Model m = make_model(c);
    const double t_last = c.t_end > 0.0 ? c.t_end : 0.0;
    if (c.calibration.horizon <= 0.0 && t_last <= 0.0) {
        const double r0 = c.scenario.r0;
        c.calibration.horizon = 0.5 * r0 * r0 / (2.0 * std::max(1, c.d - 1));
    }
    const auto cal = make_calibration(c, m, t_last, true);
    const CalibrationReport rep = check_calibration(*cal, sampling_of(c));
    const std::string dir = out_dir(g, c);
    fs::create_directories(dir);
    const std::string js = rep.to_json();
    std::ofstream(fs::path(dir) / "calibration_report.json") << js << '\n';
    fmt::print("{}\n", js);
    if (!rep.passed) {
        for (const auto& f : rep.fits)
            if (!f.ok) spdlog::error("calibration: {} failed (constant {:.6g}, max residual {:.3e})", f.name, f.constant,
                                     f.max_residual);
        return 4;
    }
    return 0;
}

int cmd_anisotropy_report(const GlobalOptions& g)
{
    const RunConfig c = load_config(g.config);
    const Anisotropy a = make_anisotropy(c.sigma, c.d);
    const auto rows = anisotropy_identities(a);
    const std::string dir = out_dir(g, c);
    fs::create_directories(dir);
    std::ofstream file(fs::path(dir) / "anisotropy_report.csv");
    auto emit = [&](const std::string& line) {
        fmt::print("{}\n", line);
        file << line << '\n';
    };
    emit("check_name,max_abs_error,samples");
    bool ok = true;
    for (const auto& r : rows) {
        emit(fmt::format("{},{},{}", r.name, num(r.max_abs_error), r.samples));
        if (!r.ok) {
            spdlog::error("anisotropy: {} = {:.3e} exceeds {:.1e}", r.name, r.max_abs_error, r.tolerance);
            ok = false;
        }
    }
    return ok ? 0 : 4;
}

}  // namespace wulffflow::cli
