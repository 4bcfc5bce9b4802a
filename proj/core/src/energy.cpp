#include "wulffflow/energy.hpp"

#include <cmath>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wulffflow/errors.hpp"
#include "wulffflow/parallel.hpp"

namespace wulffflow {

namespace {

enum { kEuclid = 0, kQuadratic = 1, kGeneral = 2 };

void check_eps(double eps, const Grid& g)
{
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError(fmt::format("energy: eps = {} must be positive", eps));
    if (eps < 2.0 * g.dx())
        spdlog::warn("energy: eps = {:.4g} < 2*dx = {:.4g}; the diffuse interface is under-resolved", eps, 2.0 * g.dx());
}

}  // namespace

EnergyKernel::EnergyKernel(const Grid& g, double eps, const Anisotropy& a, const DoubleWell& w)
    : grid_(g), eps_(eps), a_(&a), w_(&w)
{
    check_eps(eps, g);
    if (a.dim() != g.dim)
        throw InputError(fmt::format("energy: anisotropy dimension {} != grid dimension {}", a.dim(), g.dim));
    for (int i = 0; i < g.dim; ++i) buf_[i].assign(g.size(), 0.0);
    if (a.kind() == AnisotropyKind::bgn && a.matrices().size() == 1)
        for (int i = 0; i < g.dim; ++i)
            for (int j = 0; j < g.dim; ++j) G_[3 * i + j] = a.matrices()[0](i, j);
    fcell_.assign(g.size(), 0.0);
    wcell_.assign(g.size(), 0.0);
}

template <int D, int Kind>
void EnergyKernel::cells(const double* u, double* grad, std::size_t b, std::size_t e)
{
    double* P[3] = {buf_[0].data(), D > 1 ? buf_[1].data() : nullptr, D > 2 ? buf_[2].data() : nullptr};
    const bool standard = w_->is_standard();
    const double gscale = 0.5 * grid_.cell_volume() / eps_;
    for (std::size_t k = b; k < e; ++k) {
        double p[3];
        for (int a = 0; a < D; ++a) p[a] = -P[a][k];
        double f;
        double df[3];
        if constexpr (Kind == kEuclid) {
            f = 0.0;
            for (int a = 0; a < D; ++a) {
                f += p[a] * p[a];
                df[a] = 2.0 * p[a];
            }
        } else if constexpr (Kind == kQuadratic) {
            f = 0.0;
            for (int i = 0; i < D; ++i) {
                double gi = 0.0;
                for (int j = 0; j < D; ++j) gi += G_[3 * i + j] * p[j];
                f += p[i] * gi;
                df[i] = 2.0 * gi;
            }
        } else {
            f = a_->f_and_df(p, df);
        }
        fcell_[k] = f;
        for (int a = 0; a < D; ++a) P[a][k] = df[a];
        const double s = u[k];
        if (standard) {
            const double t = s * (1.0 - s);
            wcell_[k] = 36.0 * t * t;
            if (grad) grad[k] = gscale * 72.0 * t * (1.0 - 2.0 * s);
        } else {
            wcell_[k] = (*w_)(s);
            if (grad) grad[k] = gscale * w_->derivative(s);
        }
    }
}

EnergyReport EnergyKernel::evaluate(const double* u, double* grad)
{
    const Grid& g = grid_;
    const int D = g.dim;
    const double inv_dx = 1.0 / g.dx();
    for (int a = 0; a < D; ++a) forward_diff_axis(g, u, buf_[a].data(), a, inv_dx);

    const int kind = a_->kind() == AnisotropyKind::euclidean ? kEuclid : (a_->is_quadratic() ? kQuadratic : kGeneral);
    parallel_blocks(g.size(), [&](std::size_t b, std::size_t e) {
#define WF_CASE(DD, KK) \
    if (D == DD && kind == KK) return cells<DD, KK>(u, grad, b, e);
        WF_CASE(1, kEuclid) WF_CASE(1, kQuadratic) WF_CASE(1, kGeneral)
        WF_CASE(2, kEuclid) WF_CASE(2, kQuadratic) WF_CASE(2, kGeneral)
        WF_CASE(3, kEuclid) WF_CASE(3, kQuadratic) WF_CASE(3, kGeneral)
#undef WF_CASE
    });
    const double vol = g.cell_volume();
    EnergyReport r;
    r.epsilon = eps_;
    // Order-independent sums keep symmetric states exactly symmetric.
    r.dirichlet = 0.5 * vol * eps_ * reproducible_sum(fcell_.size(), [&](std::size_t k) { return fcell_[k]; });
    r.potential = 0.5 * vol / eps_ * reproducible_sum(wcell_.size(), [&](std::size_t k) { return wcell_[k]; });
    r.total = r.dirichlet + r.potential;

    // ∂/∂u_k of ½Δx^d ε Σ f(−D⁺u) is ½Δx^d ε (div P)_k with P = Df(−D⁺u).
    if (grad)
        for (int a = 0; a < D; ++a) backward_diff_axis_add(g, buf_[a].data(), grad, a, 0.5 * vol * eps_ * inv_dx);
    return r;
}

EnergyReport energy_eps(const PeriodicField& u, double eps, const Anisotropy& a, const DoubleWell& w)
{
    EnergyKernel k(u.grid(), eps, a, w);
    return k.evaluate(u.data(), nullptr);
}

EnergyReport energy_gradient(const PeriodicField& u, double eps, const Anisotropy& a, const DoubleWell& w,
                             PeriodicField& grad)
{
    if (grad.grid() != u.grid()) grad = PeriodicField(u.grid());
    EnergyKernel k(u.grid(), eps, a, w);
    return k.evaluate(u.data(), grad.data());
}

GWeight::GWeight(const Anisotropy& sigma, const Mobility& mobility)
    : sigma_(sigma), mobility_(mobility), trivial_(sigma == mobility)
{
    if (sigma.dim() != mobility.dim()) throw InputError("g weight: sigma and mobility dimensions differ");
    if (trivial_) {
        c_g_ = 0.99;
        sup_g_ = 1.0;
        return;
    }
    double lo = 1.0, hi = 1.0;  // g(0) = 1
    const auto dirs = sphere_directions(sigma.dim(), 1000);
    for (int m = 0; m <= 70; ++m) {
        const double r = std::pow(10.0, -4.0 + 0.1 * m);
        for (const Vec& d : dirs) {
            const double v = (*this)(r * d);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    c_g_ = 0.99 * lo;
    sup_g_ = hi;
}

double GWeight::raw(const double* p) const
{
    if (trivial_) return 1.0;
    return (sigma_.sigma_raw(p) + 1.0) / (mobility_.sigma_raw(p) + 1.0);
}

double GWeight::operator()(const Vec& p) const
{
    if (!p.allFinite()) throw InputError("g weight: non-finite input");
    return raw(p.data());
}

double g_weight(const GWeight& gw, const Vec& p) { return gw(p); }

PeriodicField g_field(const PeriodicField& at_u, const GWeight& gw)
{
    const Grid& g = at_u.grid();
    if (gw.trivial()) return PeriodicField(g, 1.0);
    const VectorField grad = averaged_gradient(at_u);
    PeriodicField out(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        double p[3];
        for (int a = 0; a < g.dim; ++a) p[a] = -grad.comp[static_cast<std::size_t>(a)][k];
        out[k] = gw.raw(p);
    }
    return out;
}

double metric_sq(const PeriodicField& v, const PeriodicField& at_u, double eps, const GWeight& gw)
{
    if (v.grid() != at_u.grid()) throw InputError("metric_sq: grids differ");
    if (!(eps > 0.0)) throw InputError("metric_sq: eps must be positive");
    const PeriodicField gf = g_field(at_u, gw);
    const double s = blocked_sum(v.size(), [&](std::size_t b, std::size_t e) {
        double acc = 0.0;
        for (std::size_t k = b; k < e; ++k) acc += gf[k] * v[k] * v[k];
        return acc;
    });
    return v.grid().cell_volume() * eps * s;
}

}  // namespace wulffflow
