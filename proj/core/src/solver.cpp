#include "wulffflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wulffflow/errors.hpp"
#include "wulffflow/parallel.hpp"

namespace wulffflow {

Model::Model(Anisotropy sigma, Mobility mobility, DoubleWell well)
    : sigma_(std::move(sigma)), mobility_(std::move(mobility)), well_(std::move(well))
{
    gw_ = std::make_shared<const GWeight>(sigma_, mobility_);
}

double Model::step_limit(double eps) const
{
    if (lambda() <= 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * eps * eps * c_g() / lambda();
}

SolverConfig SolverConfig::make(const Model& m, double eps, double t_end, double theta_h)
{
    SolverConfig c;
    c.eps = eps;
    c.theta_h = theta_h;
    c.t_end = t_end;
    c.h = theta_h * m.step_limit(eps);
    return c;
}

void validate(const SolverConfig& cfg, const Model& m)
{
    if (!(cfg.eps > 0.0)) throw ConfigError(fmt::format("solver: eps = {} must be positive", cfg.eps));
    if (!(cfg.theta_h > 0.0 && cfg.theta_h < 1.0))
        throw ConfigError(fmt::format("solver: theta_h = {} must lie in (0, 1)", cfg.theta_h));
    const double lim = m.step_limit(cfg.eps);
    if (!(cfg.h > 0.0) || !(cfg.h < lim))
        throw ConfigError(fmt::format("solver: time step h = {:.6g} violates the strong-convexity gate h < 2 eps^2 c_g / "
                                      "lambda = {:.6g}",
                                      cfg.h, lim));
    if (!(cfg.tol_grad > 0.0)) throw ConfigError("solver: tol_grad must be positive");
    if (cfg.max_inner_iters < 1) throw ConfigError("solver: max_inner_iters must be >= 1");
    if (cfg.lbfgs_memory < 1) throw ConfigError("solver: lbfgs_memory must be >= 1");
    if (!(cfg.t_end >= 0.0)) throw ConfigError("solver: t_end must be >= 0");
}

struct Stepper::Impl {
    Grid grid;
    SolverConfig cfg;
    const Model& model;
    EnergyKernel kernel;
    std::size_t N;
    double vol;
    double lap_diag;
    std::vector<double> x, g, d, xt, gt, wm, dinv, q, alpha;
    std::vector<std::vector<double>> S, Y;
    std::vector<double> rho;

    Impl(const Grid& gr, const SolverConfig& c, const Model& m)
        : grid(gr), cfg(c), model(m), kernel(gr, c.eps, m.sigma(), m.well()), N(gr.size()), vol(gr.cell_volume())
    {
        const Anisotropy& a = m.sigma();
        double trace = 0.0;
        if (a.kind() == AnisotropyKind::euclidean)
            trace = gr.dim;
        else if (a.is_quadratic())
            trace = a.matrices()[0].trace();
        else
            trace = gr.dim * a.sigma_max() * a.sigma_max();
        lap_diag = 2.0 * c.eps * trace / (gr.dx() * gr.dx());
        for (auto* v : {&x, &g, &d, &xt, &gt, &wm, &dinv, &q}) v->assign(N, 0.0);
        const auto M = static_cast<std::size_t>(c.lbfgs_memory);
        S.assign(M, std::vector<double>(N));
        Y.assign(M, std::vector<double>(N));
        rho.assign(M, 0.0);
        alpha.assign(M, 0.0);
    }

    double dot(const std::vector<double>& a, const std::vector<double>& b) const
    {
        return reproducible_sum(N, [&](std::size_t k) { return a[k] * b[k]; });
    }

    // J and ∂J/∂u at xv; returns J and fills gv; Ereport receives E alone.
    double eval(const std::vector<double>& xv, const double* up, std::vector<double>& gv, EnergyReport& rep)
    {
        rep = kernel.evaluate(xv.data(), gv.data());
        const double pen = reproducible_sum(N, [&](std::size_t k) {
            const double dk = xv[k] - up[k];
            return wm[k] * dk * dk;
        });
        for (std::size_t k = 0; k < N; ++k) gv[k] += wm[k] * (xv[k] - up[k]);
        return rep.total + 0.5 * pen;
    }

    double l2norm(const std::vector<double>& gv) const { return std::sqrt(dot(gv, gv) / vol); }

    StepResult step(const PeriodicField& u_prev)
    {
        if (u_prev.grid() != grid) throw InputError("minimize_step: grid does not match the stepper");
        if (!u_prev.all_finite()) throw InputError("minimize_step: u_prev has non-finite values");
        const double* up = u_prev.data();
        const double h = cfg.h;
        const double eps = cfg.eps;
        const DoubleWell& W = model.well();

        const PeriodicField gfield = g_field(u_prev, model.gweight());
        for (std::size_t k = 0; k < N; ++k) {
            wm[k] = vol * eps * gfield[k] / h;
            const double w2 = std::max(0.0, W.second_derivative(up[k])) / (2.0 * eps);
            dinv[k] = 1.0 / (vol * (eps * gfield[k] / h + lap_diag) + vol * w2);
        }

        std::copy(up, up + N, x.begin());
        EnergyReport rep, rep_t;
        double J = eval(x, up, g, rep);
        const double J0 = J;
        const double E0 = rep.total;
        const double r0 = l2norm(g);
        const double target = cfg.tol_grad * std::max(1.0, r0);
        double r = r0;

        const int M = cfg.lbfgs_memory;
        int stored = 0, head = 0;
        int it = 0;
        double gamma = 1.0;
        while (r > target) {
            if (it >= cfg.max_inner_iters)
                throw ConvergenceError(fmt::format("minimize_step: {} inner iterations without reaching tolerance "
                                                   "{:.3e} (residual {:.3e})",
                                                   it, target, r),
                                       r);
            ++it;
            // Two-loop recursion with H0 = γ·diag⁻¹.
            for (std::size_t k = 0; k < N; ++k) q[k] = -g[k];
            for (int j = 0; j < stored; ++j) {
                const int i = (head - 1 - j + M) % M;
                alpha[static_cast<std::size_t>(i)] = rho[static_cast<std::size_t>(i)] * dot(S[static_cast<std::size_t>(i)], q);
                const double ai = alpha[static_cast<std::size_t>(i)];
                const auto& Yi = Y[static_cast<std::size_t>(i)];
                for (std::size_t k = 0; k < N; ++k) q[k] -= ai * Yi[k];
            }
            for (std::size_t k = 0; k < N; ++k) d[k] = gamma * dinv[k] * q[k];
            for (int j = stored - 1; j >= 0; --j) {
                const int i = (head - 1 - j + M) % M;
                const auto& Si = S[static_cast<std::size_t>(i)];
                const double b = rho[static_cast<std::size_t>(i)] * dot(Y[static_cast<std::size_t>(i)], d);
                const double c = alpha[static_cast<std::size_t>(i)] - b;
                for (std::size_t k = 0; k < N; ++k) d[k] += c * Si[k];
            }
            double gd = dot(g, d);
            if (!(gd < 0.0)) {
                stored = 0;
                for (std::size_t k = 0; k < N; ++k) d[k] = -dinv[k] * g[k];
                gd = dot(g, d);
            }

            // Backtracking: sufficient decrease, or (once J differences are
            // at rounding level) the approximate-Wolfe slope test.
            double step_len = 1.0;
            bool accepted = false;
            double Jt = J;
            for (int ls = 0; ls < 40; ++ls) {
                for (std::size_t k = 0; k < N; ++k) xt[k] = x[k] + step_len * d[k];
                Jt = eval(xt, up, gt, rep_t);
                const bool armijo = Jt <= J + 1e-4 * step_len * gd;
                const bool flat = std::abs(Jt - J) <= 1e-14 * std::abs(J) && dot(gt, d) <= 0.8 * std::abs(gd);
                if (std::isfinite(Jt) && (armijo || flat)) {
                    accepted = true;
                    break;
                }
                step_len *= 0.5;
            }
            if (!accepted)
                throw ConvergenceError(
                    fmt::format("minimize_step: line search failed after {} iterations (residual {:.3e})", it, r), r);

            auto& Sn = S[static_cast<std::size_t>(head)];
            auto& Yn = Y[static_cast<std::size_t>(head)];
            for (std::size_t k = 0; k < N; ++k) {
                Sn[k] = xt[k] - x[k];
                Yn[k] = gt[k] - g[k];
            }
            const double sy = dot(Sn, Yn);
            if (sy > 1e-300) {
                const double yDy = reproducible_sum(N, [&](std::size_t k) { return Yn[k] * dinv[k] * Yn[k]; });
                rho[static_cast<std::size_t>(head)] = 1.0 / sy;
                gamma = sy / yDy;
                head = (head + 1) % M;
                stored = std::min(stored + 1, M);
            }
            x.swap(xt);
            g.swap(gt);
            J = Jt;
            rep = rep_t;
            r = l2norm(g);
        }

        if (J > J0) {
            // Only reachable when u_prev is already stationary to rounding:
            // u_prev is then the better competitor.
            std::copy(up, up + N, x.begin());
            J = eval(x, up, g, rep);
            r = l2norm(g);
        }

        StepResult out{PeriodicField(grid, std::vector<double>(x.begin(), x.end())), {}};
        StepRecord& rec = out.record;
        rec.inner_iters = it;
        rec.grad_residual = r;
        rec.grad_initial = r0;
        rec.energy_before = E0;
        rec.energy_after = rep;
        const double m = reproducible_sum(N, [&](std::size_t k) {
            const double dk = x[k] - up[k];
            return wm[k] * dk * dk;
        });
        rec.metric_increment = m * h;
        rec.dissipation = rec.metric_increment / (h * h);
        rec.linf_center_distance = linf_center_distance(out.u);
        rec.dissipation_slack = 2.0 * h * (E0 - rep.total) - rec.metric_increment;
        return out;
    }
};

Stepper::Stepper(const Grid& g, const SolverConfig& cfg, const Model& m)
{
    validate(cfg, m);
    impl_ = std::make_unique<Impl>(g, cfg, m);
}

Stepper::~Stepper() = default;

StepResult Stepper::step(const PeriodicField& u_prev) { return impl_->step(u_prev); }

StepResult minimize_step(const PeriodicField& u_prev, const SolverConfig& cfg, const Model& m)
{
    Stepper s(u_prev.grid(), cfg, m);
    return s.step(u_prev);
}

const PeriodicField& Trajectory::snapshot(long k) const
{
    auto it = snapshots.find(k);
    if (it == snapshots.end()) throw InputError(fmt::format("trajectory: snapshot at step {} was not retained", k));
    return it->second;
}

double Trajectory::dissipation_sum() const
{
    double s = 0.0;
    for (const auto& r : records) s += r.metric_increment / config.h;
    return s;
}

Trajectory run(const PeriodicField& u0, const SolverConfig& cfg, const Model& m, const StepObserver& observer)
{
    validate(cfg, m);
    if (!u0.all_finite()) throw InputError("run: u0 has non-finite values");
    Trajectory tr;
    tr.config = cfg;
    tr.model = std::make_shared<const Model>(m);
    tr.initial = u0;
    tr.initial_energy = energy_eps(u0, cfg.eps, m.sigma(), m.well());
    tr.mp_bound = std::max(linf_center_distance(u0), 0.5);
    tr.snapshots.emplace(0, u0);

    const long nsteps = static_cast<long>(std::ceil(cfg.t_end / cfg.h - 1e-9));
    const double E0 = tr.initial_energy.total;
    const double tol_e = 10.0 * cfg.tol_grad * E0;
    const double tol_d = cfg.tol_dissipation_rel * E0;
    auto keep = [&](long k) {
        if (k == nsteps) return true;
        const long s = cfg.snapshot_every;
        if (s <= 0) return false;
        const long r = k % s;
        return r == 0 || (cfg.keep_neighbours && (r == 1 || r == s - 1));
    };

    Stepper stepper(u0.grid(), cfg, m);
    PeriodicField u = u0;
    tr.records.reserve(static_cast<std::size_t>(std::max(0L, nsteps)));
    for (long k = 1; k <= nsteps; ++k) {
        StepResult res = stepper.step(u);
        StepRecord& rec = res.record;
        rec.step = k;
        rec.time = static_cast<double>(k) * cfg.h;
        rec.max_principle_slack = tr.mp_bound - rec.linf_center_distance;

        std::string failure;
        if (rec.energy_after.total > rec.energy_before + tol_e)
            failure = fmt::format("energy increased: {:.17g} -> {:.17g}", rec.energy_before, rec.energy_after.total);
        else if (rec.max_principle_slack < -cfg.tol_max_principle)
            failure = fmt::format("maximum principle violated: |u-1/2|_inf = {:.17g} > {:.17g}", rec.linf_center_distance,
                                  tr.mp_bound);
        else if (rec.dissipation_slack < -tol_d)
            failure = fmt::format("dissipation inequality violated: metric {:.6e} > 2h dE = {:.6e}", rec.metric_increment,
                                  rec.metric_increment + rec.dissipation_slack);
        if (!failure.empty()) {
            std::string where;
            if (!cfg.dump_dir.empty()) where = " (state dumped to " + write_snapshot(cfg.dump_dir, k, res.u, rec.time, cfg.eps) + ")";
            throw InvariantError(fmt::format("step {} t={:.6g}: {}; inner_iters={} grad_residual={:.3e}{}", k, rec.time,
                                             failure, rec.inner_iters, rec.grad_residual, where));
        }
        u = std::move(res.u);
        tr.records.push_back(rec);
        if (keep(k)) tr.snapshots.emplace(k, u);
        if (observer) observer(rec, u);
        spdlog::debug("step {} t={:.6g} E={:.10g} iters={} res={:.3e}", k, rec.time, rec.energy_after.total,
                      rec.inner_iters, rec.grad_residual);
    }
    return tr;
}

PeriodicField initial_wulff(const Anisotropy& a, const Profile& prof, const Vec& center, double r0, double eps,
                            const Grid& grid)
{
    if (a.dim() != grid.dim) throw InputError("initial_wulff: anisotropy and grid dimensions differ");
    if (center.size() != grid.dim || !center.allFinite()) throw InputError("initial_wulff: bad center");
    if (!(eps > 0.0)) throw InputError("initial_wulff: eps must be positive");
    if (!(r0 > 2.0 * eps)) throw InputError(fmt::format("initial_wulff: r0 = {} must exceed 2 eps = {}", r0, 2 * eps));
    for (int ax = 0; ax < grid.dim; ++ax) {
        Vec e = Vec::Zero(grid.dim);
        e(ax) = 1.0;
        const double extent = r0 * std::max(a.sigma(e), a.sigma(-e));
        if (extent + 4.0 * eps > 0.5 * grid.length)
            throw InputError(fmt::format("initial_wulff: Wulff shape of radius {} (half-width {:.4g} along axis {}) does not "
                                         "fit the torus of side {} with margin 4 eps",
                                         r0, extent, ax, grid.length));
    }
    PeriodicField u(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Vec y = minimal_image(grid.center(k), center, grid.length);
        u[k] = prof((r0 - a.polar(y)) / eps);
    }
    return u;
}

PeriodicField initial_planar(const Anisotropy& a, const Profile& prof, int axis, double center, double half_width,
                             double eps, const Grid& grid)
{
    if (a.dim() != grid.dim) throw InputError("initial_planar: anisotropy and grid dimensions differ");
    if (axis < 0 || axis >= grid.dim) throw InputError("initial_planar: axis out of range");
    if (!(eps > 0.0)) throw InputError("initial_planar: eps must be positive");
    Vec e = Vec::Zero(grid.dim);
    e(axis) = 1.0;
    const double s = a.sigma(e);
    const double width = eps * s;
    if (!(half_width > 4.0 * width) || half_width + 4.0 * width > 0.5 * grid.length)
        throw InputError(fmt::format("initial_planar: slab half-width {} does not fit with margin 4 eps sigma(nu) = {}",
                                     half_width, 4 * width));
    PeriodicField u(grid);
    const Vec c = Vec::Constant(grid.dim, center);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double y = minimal_image(grid.center(k), c, grid.length)(axis);
        u[k] = prof((half_width - std::abs(y)) / width);
    }
    return u;
}

}  // namespace wulffflow
