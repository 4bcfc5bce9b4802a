#include "wulffflow/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "wulffflow/errors.hpp"
#include "wulffflow/interface.hpp"
#include "wulffflow/parallel.hpp"

namespace wulffflow {

namespace {

constexpr int kSamples = 256;

double smoothstep5(double x)
{
    x = std::clamp(x, 0.0, 1.0);
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}

// ∫_0^x smoothstep5
double smoothstep5_integral(double x)
{
    return x * x * x * x * (x * (x - 3.0) + 2.5);
}

Vec unit2(double th) { return vec({std::cos(th), std::sin(th)}); }
Vec tangent2(double th) { return vec({-std::sin(th), std::cos(th)}); }

template <class F>
auto central4(const F& g, double h)
{
    return (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h);
}

double point_polyline_distance(const Vec& p, const std::vector<Vec>& poly)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec& a = poly[i];
        const Vec& b = poly[(i + 1) % poly.size()];
        const Vec ab = b - a;
        const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        best = std::min(best, (p - (a + t * ab)).norm());
    }
    return best;
}

}  // namespace

ReferenceEvolution::ReferenceEvolution(Anisotropy sigma, Vec center, double r0, double horizon, double L)
    : sigma_(std::move(sigma)), center_(std::move(center)), r0_(r0), horizon_(horizon), L_(L)
{
    const int d = sigma_.dim();
    if (d < 2) throw InputError("reference evolution: d >= 2 required");
    if (center_.size() != d) throw InputError("reference evolution: centre dimension mismatch");
    if (!(r0_ > 0.0) || !(L_ > 0.0)) throw InputError("reference evolution: r0 and L must be positive");
    if (!(horizon_ > 0.0) || !(horizon_ < extinction_time()))
        throw InputError(fmt::format("reference evolution: horizon {} must lie in (0, {}) (extinction time)", horizon_,
                                     extinction_time()));
    if (sigma_.kind() != AnisotropyKind::euclidean && d != 2)
        throw InputError("reference evolution: anisotropic Wulff shapes are supported for d = 2 only");
    for (int a = 0; a < d; ++a) {
        Vec e = Vec::Zero(d);
        e(a) = 1.0;
        if (r0_ * std::max(sigma_.sigma(e), sigma_.sigma(-e)) >= 0.5 * L_)
            throw InputError(fmt::format("reference evolution: Wulff shape of radius {} does not fit the torus", r0_));
    }
    if (d == 2) {
        for (int k = 0; k < kSamples; ++k) {
            const double th = 2.0 * std::numbers::pi * k / kSamples;
            angle_.push_back(th);
            unit_.push_back(sigma_.dsigma(unit2(th)));
        }
    }
}

double ReferenceEvolution::extinction_time() const
{
    return r0_ * r0_ / (2.0 * (dim() - 1));
}

double ReferenceEvolution::radius(double t) const
{
    const double r2 = r0_ * r0_ - 2.0 * (dim() - 1) * t;
    if (!(r2 > 0.0)) throw DomainError(fmt::format("reference evolution: t = {} is past extinction", t));
    return std::sqrt(r2);
}

bool ReferenceEvolution::inside(const Vec& x, double t) const
{
    return sigma_.polar(minimal_image(x, center_, L_)) < radius(t);
}

ReferenceEvolution::Projection ReferenceEvolution::project(const Vec& x, double t) const
{
    const double r = radius(t);
    const Vec z = minimal_image(x, center_, L_);
    Projection p;
    if (sigma_.kind() == AnisotropyKind::euclidean) {
        const double n = z.norm();
        p.normal = Vec::Zero(dim());
        if (n > 0.0)
            p.normal = z / n;
        else {
            p.normal(0) = 1.0;
            p.converged = false;
        }
        p.sdist = n - r;
        p.point = center_ + r * p.normal;
        p.curvature = (dim() - 1) / r;
        return p;
    }

    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < unit_.size(); ++k) {
        const double dk = (z - r * unit_[k]).squaredNorm();
        if (dk < best_d) {
            best_d = dk;
            best = k;
        }
    }
    double th = angle_[best];
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
        const Vec nu = unit2(th), tau = tangent2(th);
        const Vec y = r * sigma_.dsigma(nu);
        const double F = (z - y).dot(tau);
        const double Fp = -(r * tau.dot(sigma_.d2sigma(nu) * tau) + (z - y).dot(nu));
        if (!(Fp < 0.0)) break;
        const double step = std::clamp(-F / Fp, -0.2, 0.2);
        th += step;
        if (std::abs(step) < 1e-14) {
            ok = true;
            break;
        }
    }
    const Vec nu = unit2(th), tau = tangent2(th);
    const Vec y = r * sigma_.dsigma(nu);
    if (ok && (z - y).dot(tau) > 1e-12 * std::max(1.0, z.norm())) ok = false;
    if (ok) {
        p.normal = nu;
        p.sdist = (z - y).dot(nu);
        p.point = center_ + y;
        const double tdt = tau.dot(sigma_.d2sigma(nu) * tau);
        // div_Γ Dσ(ν) = (τ·D²σ τ)·dθ/ds with |y'(θ)| = r τ·D²σ τ.
        p.curvature = tdt / (r * tdt);
    } else {
        const Vec nk = unit2(angle_[best]);
        p.normal = nk;
        const double dist = std::sqrt(best_d);
        p.sdist = sigma_.polar(z) < r ? -dist : dist;
        p.point = center_ + r * unit_[best];
        p.curvature = 1.0 / r;
        p.converged = false;
    }
    return p;
}

std::vector<Vec> ReferenceEvolution::boundary_samples(double t) const
{
    const double r = radius(t);
    std::vector<Vec> out;
    for (const Vec& u : unit_) out.push_back(center_ + r * u);
    return out;
}

std::vector<Vec> ReferenceEvolution::boundary_polyline(double t, int n) const
{
    if (dim() != 2) throw InputError("boundary_polyline: d = 2 only");
    std::vector<Vec> out = wulff_boundary_points(sigma_, radius(t), n);
    for (Vec& p : out) p += center_;
    return out;
}

double ReferenceEvolution::min_curvature_radius(double t) const
{
    const double r = radius(t);
    if (sigma_.kind() == AnisotropyKind::euclidean) return r;
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4096; ++k) {
        const double th = 2.0 * std::numbers::pi * k / 4096;
        const Vec tau = tangent2(th);
        m = std::min(m, tau.dot(sigma_.d2sigma(unit2(th)) * tau));
    }
    return r * m;
}

double signed_distance(const ReferenceEvolution& ref, const Vec& x, double t, double delta)
{
    const auto p = ref.project(x, t);
    if (!p.converged) spdlog::debug("signed_distance: projection fell back to the sampled boundary");
    return std::clamp(p.sdist, -delta, delta);
}

Calibration::Calibration(const ReferenceEvolution& ref, double delta)
    : ref_(ref), delta_(delta), hx_(1e-4 * ref.r0()), ht_(1e-4 * ref.r0() * ref.r0())
{
}

double Calibration::zeta(double s) const
{
    const double a = std::abs(s) / delta_;
    if (a >= 1.0) return 0.0;
    const double eta = a <= 0.5 ? 1.0 : 1.0 - smoothstep5(2.0 * (a - 0.5));
    return (1.0 - s * s) * eta;
}

double Calibration::truncation(double s) const
{
    const double a = std::abs(s);
    const double sg = s < 0.0 ? -1.0 : 1.0;
    if (a <= 0.5 * delta_) return s;
    if (a >= 0.75 * delta_) return sg * delta_;
    // f' = (1 − S(τ)) + 1.5 S'(τ) on τ ∈ [0, 1]; integrates to 2 so f reaches δ.
    const double tau = (a - 0.5 * delta_) / (0.25 * delta_);
    return sg * (0.5 * delta_ + 0.25 * delta_ * (tau - smoothstep5_integral(tau) + 1.5 * smoothstep5(tau)));
}

double Calibration::sdist(const Vec& x, double t) const
{
    return std::clamp(ref_.project(x, t).sdist, -delta_, delta_);
}

Vec Calibration::xi(const Vec& x, double t) const
{
    const auto p = ref_.project(x, t);
    if (std::abs(p.sdist) >= delta_) return Vec::Zero(ref_.dim());
    return zeta(p.sdist) * p.normal;
}

Vec Calibration::B(const Vec& x, double t) const
{
    const auto p = ref_.project(x, t);
    if (std::abs(p.sdist) >= delta_) return Vec::Zero(ref_.dim());
    const Vec xi = zeta(p.sdist) * p.normal;
    if (xi.norm() == 0.0) return xi;
    return -ref_.sigma().sigma(xi) * p.curvature * xi;
}

double Calibration::theta(const Vec& x, double t) const
{
    return truncation(sdist(x, t));
}

Mat Calibration::jacobian_xi(const Vec& x, double t) const
{
    const int d = ref_.dim();
    Mat J(d, d);
    for (int j = 0; j < d; ++j) {
        Vec e = Vec::Zero(d);
        e(j) = 1.0;
        J.col(j) = central4([&](double h) { return Vec(xi(x + h * e, t)); }, hx_);
    }
    return J;
}

Mat Calibration::jacobian_B(const Vec& x, double t) const
{
    const int d = ref_.dim();
    Mat J(d, d);
    for (int j = 0; j < d; ++j) {
        Vec e = Vec::Zero(d);
        e(j) = 1.0;
        J.col(j) = central4([&](double h) { return Vec(B(x + h * e, t)); }, hx_);
    }
    return J;
}

Vec Calibration::grad_theta(const Vec& x, double t) const
{
    const int d = ref_.dim();
    Vec g(d);
    for (int j = 0; j < d; ++j) {
        Vec e = Vec::Zero(d);
        e(j) = 1.0;
        g(j) = central4([&](double h) { return theta(x + h * e, t); }, hx_);
    }
    return g;
}

Vec Calibration::dt_xi(const Vec& x, double t) const
{
    return central4([&](double h) { return Vec(xi(x, t + h)); }, ht_);
}

double Calibration::dt_theta(const Vec& x, double t) const
{
    return central4([&](double h) { return theta(x, t + h); }, ht_);
}

double Calibration::div_cahn_hoffman(const Vec& x, double t, const Cutoff& c) const
{
    const int d = ref_.dim();
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
        Vec e = Vec::Zero(d);
        e(j) = 1.0;
        s += central4([&](double h) { return cahn_hoffman_trunc(ref_.sigma(), c, xi(x + h * e, t))(j); }, hx_);
    }
    return s;
}

SmoothVectorField Calibration::B_field(double t) const
{
    return {[this, t](const Vec& x) { return B(x, t); }, [this, t](const Vec& x) { return jacobian_B(x, t); }};
}

VectorSampler Calibration::xi_sampler(double t) const
{
    return [this, t](const Vec& x) { return xi(x, t); };
}

ScalarSampler Calibration::theta_sampler(double t) const
{
    return [this, t](const Vec& x) { return theta(x, t); };
}

Calibration build_calibration(const ReferenceEvolution& ref, double delta)
{
    const double T = ref.horizon();
    if (!(delta > 0.0)) delta = 0.2 * ref.radius(T);
    // r(t) decreases, so the final time has the tightest reach.
    const double reach = ref.min_curvature_radius(T);
    if (!(delta < reach))
        throw InputError(fmt::format("build_calibration: delta = {} reaches the smallest radius of curvature {}", delta,
                                     reach));
    if (!(delta < 1.0)) throw InputError("build_calibration: delta must be < 1 so that zeta(s) = 1 - s^2 stays positive");
    return Calibration(ref, delta);
}

double CalibrationReport::c_fit() const
{
    double c = 0.0;
    for (int k = 0; k < 4; ++k) c = std::max(c, fits[static_cast<std::size_t>(k)].constant);
    return c;
}

std::string CalibrationReport::to_json() const
{
    using nlohmann::json;
    auto one = [](const InequalityFit& f) {
        json j;
        j["name"] = f.name;
        j["constant"] = std::isfinite(f.constant) ? json(f.constant) : json(nullptr);
        j["max_residual"] = std::isfinite(f.max_residual) ? json(f.max_residual) : json(nullptr);
        std::vector<double> w(f.where.data(), f.where.data() + f.where.size());
        j["argmax_x"] = w;
        j["argmax_t"] = f.when;
        if (!std::isnan(f.core_constant)) j["core_constant"] = f.core_constant;
        j["ok"] = f.ok;
        return j;
    };
    json j;
    j["delta"] = delta;
    j["samples"] = samples;
    j["passed"] = passed;
    j["c_fit"] = c_fit();
    j["compat_on_boundary"] = compat_on_boundary;
    json arr = json::array();
    for (const auto& f : fits) arr.push_back(one(f));
    j["inequalities"] = arr;
    j["lemma_upper"] = one(lemma_upper);
    j["lemma_transport"] = one(lemma_transport);
    return j.dump(2);
}

namespace {

struct Sample {
    Vec x;
    double t = 0.0;
    double dist = 0.0;
    int side = 0;  // −1 inside, +1 outside, 0 on the boundary
    Vec normal;    // boundary samples only
    bool tube = false;
};

struct Accum {
    double value;
    Vec where;
    double when = 0.0;
    double resid = 0.0;
};

}  // namespace

CalibrationReport check_calibration(const Calibration& cal, const CalibrationSampling& sampling)
{
    const ReferenceEvolution& ref = cal.reference();
    const int d = ref.dim();
    const double delta = cal.delta();
    std::vector<double> times = sampling.times;
    if (times.empty())
        for (int i = 0; i < 5; ++i) times.push_back(0.9 * ref.horizon() * i / 4.0);
    for (double t : times)
        if (t < 0.0 || t > ref.horizon())
            throw InputError(fmt::format("check_calibration: time {} outside [0, {}]", t, ref.horizon()));

    std::vector<Sample> samples;
    const auto dirs = sphere_directions(d, d == 2 ? sampling.n_angles : sampling.n_angles * sampling.n_angles / 4);
    for (double t : times) {
        const double r = ref.radius(t);
        for (const Vec& nu : dirs) {
            const Vec y = ref.center() + r * ref.sigma().dsigma(nu);
            samples.push_back({y, t, 0.0, 0, nu, true});
            for (int j = 0; j < sampling.n_layers; ++j) {
                const double s = delta * (-1.2 + 2.4 * (j + 0.5) / sampling.n_layers);
                samples.push_back({Vec(y + s * nu), t, std::abs(s), s < 0.0 ? -1 : 1, Vec(), true});
            }
        }
        // coarse bulk grid for the coercivity conditions
        std::vector<Vec> poly;
        if (d == 2 && ref.sigma().kind() != AnisotropyKind::euclidean) poly = ref.boundary_polyline(t, 4096);
        const int nb = sampling.n_bulk;
        const Grid bulk(d, nb, ref.length());
        for (std::size_t k = 0; k < bulk.size(); ++k) {
            const Vec x = bulk.center(k);
            double dist;
            if (ref.sigma().kind() == AnisotropyKind::euclidean)
                dist = std::abs(minimal_image(x, ref.center(), ref.length()).norm() - r);
            else {
                // Exact projection inside the tube, where gap/dist² is sensitive
                // to chord error; the polyline only far from the boundary.
                const auto p = ref.project(x, t);
                dist = p.converged && std::abs(p.sdist) <= delta
                           ? std::abs(p.sdist)
                           : point_polyline_distance(ref.center() + minimal_image(x, ref.center(), ref.length()), poly);
            }
            samples.push_back({x, t, dist, ref.inside(x, t) ? -1 : 1, Vec(), false});
        }
    }

    const double excl = 1e-3 * delta;
    const double inf = std::numeric_limits<double>::infinity();
    // cal1..8, lemma upper, lemma transport, boundary R4, (spare), cal1..4 on the core tube
    constexpr int kFits = 16;
    std::mutex mu;
    auto init = [&]() {
        std::array<Accum, kFits> a;
        for (int k = 0; k < kFits; ++k) {
            const bool is_min = k >= 5 && k <= 7;
            a[static_cast<std::size_t>(k)] = {is_min ? inf : 0.0, Vec::Zero(d), 0.0, 0.0};
        }
        return a;
    };
    std::vector<std::array<Accum, kFits>> per_block((samples.size() + kBlock - 1) / kBlock);
    auto upd_max = [](Accum& a, double v, const Sample& s, double resid) {
        if (!(v <= a.value)) {  // NaN propagates as a violation
            a.value = v;
            a.where = s.x;
            a.when = s.t;
            a.resid = resid;
        }
    };
    auto upd_min = [](Accum& a, double v, const Sample& s, double resid) {
        if (!(v >= a.value)) {
            a.value = v;
            a.where = s.x;
            a.when = s.t;
            a.resid = resid;
        }
    };

    parallel_blocks(samples.size(), [&](std::size_t b, std::size_t e) {
        auto acc = init();
        for (std::size_t i = b; i < e; ++i) {
            const Sample& s = samples[i];
            const Vec xi = cal.xi(s.x, s.t);
            const double nxi = xi.norm();
            const double th = cal.theta(s.x, s.t);
            if (s.side == 0) {
                const double dev = (xi - s.normal).norm();
                upd_max(acc[4], dev, s, dev);
            }
            if (s.tube) {
                const Vec B = cal.B(s.x, s.t);
                const Mat Jxi = cal.jacobian_xi(s.x, s.t);
                const Mat JB = cal.jacobian_B(s.x, s.t);
                const Vec dxi = cal.dt_xi(s.x, s.t);
                const Vec transport = dxi + Jxi * B;
                const double R1 = (transport + JB.transpose() * xi).norm();
                const double R2 = std::abs(xi.dot(transport));
                const double R3 = std::abs(cal.dt_theta(s.x, s.t) + B.dot(cal.grad_theta(s.x, s.t)));
                const double mu = nxi > 0.0 ? ref.sigma().sigma(xi) : 0.0;
                const double R4 = std::abs(B.dot(xi) + mu * cal.div_cahn_hoffman(s.x, s.t));
                const double L3 = std::abs(xi.dot(JB * xi));
                if (s.side == 0) {
                    upd_max(acc[10], R4, s, R4);
                } else if (s.dist >= excl) {
                    upd_max(acc[0], R1 / s.dist, s, R1);
                    upd_max(acc[1], R2 / (s.dist * s.dist), s, R2);
                    upd_max(acc[2], R3 / s.dist, s, R3);
                    upd_max(acc[3], R4 / s.dist, s, R4);
                    upd_max(acc[9], L3 / s.dist, s, L3);
                    if (s.dist <= 0.5 * delta) {
                        upd_max(acc[12], R1 / s.dist, s, R1);
                        upd_max(acc[13], R2 / (s.dist * s.dist), s, R2);
                        upd_max(acc[14], R3 / s.dist, s, R3);
                        upd_max(acc[15], R4 / s.dist, s, R4);
                    }
                }
            }
            if (s.side != 0 && s.dist >= excl) {
                const double gap = 1.0 - nxi;
                upd_min(acc[5], gap / (s.dist * s.dist), s, gap);
                upd_max(acc[8], gap / (s.dist * s.dist), s, gap);
                if (s.side > 0)
                    upd_min(acc[6], th / s.dist, s, th);
                else
                    upd_min(acc[7], -th / s.dist, s, th);
            }
        }
        std::lock_guard<std::mutex> lock(mu);
        per_block[b / kBlock] = acc;
    });
    // combine in block order so the argmax is deterministic
    auto total = init();
    for (const auto& blk : per_block)
        for (int k = 0; k < kFits; ++k) {
            const bool is_min = k >= 5 && k <= 7;
            const Accum& a = blk[static_cast<std::size_t>(k)];
            Sample s{a.where, a.when, 0.0, 0, Vec(), false};
            if (is_min)
                upd_min(total[static_cast<std::size_t>(k)], a.value, s, a.resid);
            else
                upd_max(total[static_cast<std::size_t>(k)], a.value, s, a.resid);
        }

    CalibrationReport rep;
    rep.delta = delta;
    rep.samples = static_cast<long>(samples.size());
    static const char* names[8] = {"cal1_evolution_xi", "cal2_evolution_length", "cal3_evolution_theta",
                                   "cal4_compatibility", "cal5_normal_on_boundary", "cal6_length_deficit",
                                   "cal7_theta_outside", "cal8_theta_inside"};
    for (int k = 0; k < 8; ++k) {
        const Accum& a = total[static_cast<std::size_t>(k)];
        InequalityFit& f = rep.fits[static_cast<std::size_t>(k)];
        f.name = names[k];
        f.constant = a.value;
        f.max_residual = a.resid;
        f.where = a.where;
        f.when = a.when;
        if (k < 4) f.core_constant = total[static_cast<std::size_t>(12 + k)].value;
        if (k < 4)
            f.ok = std::isfinite(a.value);
        else if (k == 4)
            f.ok = std::isfinite(a.value) && a.value <= 1e-6;
        else
            f.ok = std::isfinite(a.value) && a.value > 0.0;
    }
    auto extra = [&](int k, const char* name) {
        const Accum& a = total[static_cast<std::size_t>(k)];
        InequalityFit f;
        f.name = name;
        f.constant = a.value;
        f.max_residual = a.resid;
        f.where = a.where;
        f.when = a.when;
        f.ok = std::isfinite(a.value);
        return f;
    };
    rep.lemma_upper = extra(8, "length_deficit_upper");
    rep.lemma_transport = extra(9, "transport_of_B");
    rep.compat_on_boundary = total[10].value;
    rep.passed = rep.lemma_upper.ok && rep.lemma_transport.ok;
    for (const auto& f : rep.fits) rep.passed = rep.passed && f.ok;
    return rep;
}

StabilitySeries stability_monitor(const Trajectory& traj, const Calibration& cal, double c_fit)
{
    const ReferenceEvolution& ref = cal.reference();
    const Anisotropy& sigma = traj.model->sigma();
    const Mobility& mobility = traj.model->mobility();
    if (traj.snapshots.empty()) throw InputError("stability_monitor: trajectory has no snapshots");
    if (traj.snapshots.begin()->first != 0) throw InputError("stability_monitor: step 0 must be retained");
    const double t_last = traj.time(traj.snapshots.rbegin()->first);
    if (t_last > ref.horizon())
        throw InputError(fmt::format("stability_monitor: trajectory time {} exceeds the calibration horizon {}", t_last,
                                     ref.horizon()));
    const double mu_max = mobility.sigma_max();

    StabilitySeries out;
    out.c_fit = c_fit;
    for (const auto& [k, u] : traj.snapshots) {
        const double t = traj.time(k);
        StabilityRow row;
        row.step = k;
        row.time = t;
        const Interface iface = extract_interface(u);
        row.rel_entropy = relative_entropy(iface, cal.xi_sampler(t), sigma);
        row.bulk_error = bulk_error(u, cal.theta_sampler(t), [&](const Vec& x) { return ref.inside(x, t); });
        row.vel_cross = std::numeric_limits<double>::quiet_NaN();
        if (k >= 1 && traj.has_snapshot(k - 1) && traj.has_snapshot(k + 1)) {
            const VelocityEstimate v = normal_velocity(traj, k);
            std::vector<double> parts;
            for (std::size_t i = 0; i < v.V.size(); ++i) {
                if (!v.valid[i]) continue;
                const Facet& f = v.iface.facets[i];
                const double diff = v.V[i] - cal.B(f.midpoint, t).dot(cal.xi(f.midpoint, t));
                parts.push_back(diff * diff * f.weight);
            }
            row.vel_cross = pairwise_sum(parts) / (4.0 * mu_max);
        }
        if (k == 0) {
            const double dx = u.grid().dx();
            out.offset = (dx + traj.config.eps) * (dx + traj.config.eps) * sharp_energy(iface, sigma);
        }
        out.rows.push_back(row);
    }
    const double e0 = out.rows.front().bulk_error + out.rows.front().rel_entropy + out.offset;
    out.holds = true;
    for (auto& row : out.rows) {
        row.envelope = e0 * std::exp(c_fit * row.time);
        if (!(row.bulk_error + row.rel_entropy <= row.envelope)) out.holds = false;
    }
    return out;
}

}  // namespace wulffflow
