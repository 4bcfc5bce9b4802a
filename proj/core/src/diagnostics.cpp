#include "wulffflow/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "wulffflow/errors.hpp"
#include "wulffflow/parallel.hpp"

namespace wulffflow {

namespace {

Vec gradient_at(const VectorField& g, std::size_t k)
{
    Vec v(g.grid.dim);
    for (int a = 0; a < g.grid.dim; ++a) v(a) = g.comp[static_cast<std::size_t>(a)][k];
    return v;
}

double frobenius(const Mat& A, const Mat& B)
{
    return (A.array() * B.array()).sum();
}

}  // namespace

SmoothVectorField constant_field(const Vec& b)
{
    const auto d = b.size();
    return {[b](const Vec&) { return b; }, [d](const Vec&) { return Mat(Mat::Zero(d, d)); }};
}

SmoothVectorField radial_field(const Vec& center, double L)
{
    const auto d = center.size();
    return {[center, L](const Vec& x) { return minimal_image(x, center, L); },
            [d](const Vec&) { return Mat(Mat::Identity(d, d)); }};
}

double equipartition_defect(const PeriodicField& u, double eps, const Anisotropy& a, const DoubleWell& w)
{
    const Grid& g = u.grid();
    const VectorField grad = cell_gradient(u);
    const double s = blocked_sum(g.size(), [&](std::size_t b, std::size_t e) {
        double acc = 0.0;
        double p[3], df[3];
        for (std::size_t k = b; k < e; ++k) {
            for (int ax = 0; ax < g.dim; ++ax) p[ax] = -grad.comp[static_cast<std::size_t>(ax)][k];
            const double f = a.f_and_df(p, df);
            acc += std::abs(0.5 * eps * f - 0.5 * w(u[k]) / eps);
        }
        return acc;
    });
    return g.cell_volume() * s;
}

double sharp_energy(const Interface& iface, const Anisotropy& a)
{
    std::vector<double> parts(iface.facets.size());
    for (std::size_t i = 0; i < parts.size(); ++i)
        parts[i] = a.sigma(iface.facets[i].normal) * iface.facets[i].weight;
    return pairwise_sum(parts);
}

double VelocityEstimate::l2() const
{
    std::vector<double> parts;
    for (std::size_t i = 0; i < V.size(); ++i)
        if (valid[i]) parts.push_back(V[i] * V[i] * iface.facets[i].weight);
    return std::sqrt(pairwise_sum(parts));
}

VelocityEstimate normal_velocity(const Trajectory& traj, long k)
{
    if (k < 1 || k + 1 > traj.steps())
        throw InputError(fmt::format("normal_velocity: step {} needs neighbours inside [0, {}]", k, traj.steps()));
    const PeriodicField& um = traj.snapshot(k - 1);
    const PeriodicField& u0 = traj.snapshot(k);
    const PeriodicField& up = traj.snapshot(k + 1);
    const DoubleWell& w = traj.model->well();
    const Grid& g = u0.grid();

    auto phi_of = [&](const PeriodicField& u) {
        PeriodicField out(g);
        parallel_blocks(g.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) out[i] = w.phi(u[i]);
        });
        return out;
    };
    const PeriodicField pm = phi_of(um), pp = phi_of(up);
    // |∇(φ∘u_k)| = √W(u_k)|∇u_k| per cell; the chain rule keeps the steep
    // φ∘u profile out of the difference stencil.
    const VectorField grad = cell_gradient(u0);
    PeriodicField gphi(g);
    parallel_blocks(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) gphi[i] = w.sqrt_w(u0[i]) * gradient_at(grad, i).norm();
    });

    VelocityEstimate est;
    est.iface = extract_interface(u0);
    const std::size_t nf = est.iface.facets.size();
    est.V.assign(nf, std::numeric_limits<double>::quiet_NaN());
    est.valid.assign(nf, 0);
    const double h = traj.config.h;
    for (std::size_t i = 0; i < nf; ++i) {
        const Vec& x = est.iface.facets[i].midpoint;
        const double gn = sample_linear(gphi, x);
        if (!(gn >= 1e-12)) {
            ++est.excluded;
            continue;
        }
        est.V[i] = (sample_linear(pp, x) - sample_linear(pm, x)) / (2.0 * h * gn);
        est.valid[i] = 1;
    }
    return est;
}

double eps_relative_entropy(const PeriodicField& u, const VectorSampler& xi, double eps, const Anisotropy& a,
                            const DoubleWell& w, const Cutoff& c)
{
    (void)eps;  // the integrand is ε-free once written in terms of ∇u
    const Grid& g = u.grid();
    const VectorField grad = cell_gradient(u);
    const double s = blocked_sum(g.size(), [&](std::size_t b, std::size_t e) {
        double acc = 0.0;
        for (std::size_t k = b; k < e; ++k) {
            const double sw = w.sqrt_w(u[k]);
            const Vec gu = gradient_at(grad, k);
            const Vec x = xi(g.center(k));
            const double nx = x.norm();
            if (nx > 1.0 + 1e-9)
                throw InputError(fmt::format("eps_relative_entropy: |xi| = {:.12g} > 1 at cell {}", nx, k));
            if (sw == 0.0) continue;
            const double gn = gu.norm();
            if (gn == 0.0) continue;
            acc += (a.sigma(-gu) + cahn_hoffman_trunc(a, c, x).dot(gu)) * sw;
        }
        return acc;
    });
    return g.cell_volume() * s;
}

double relative_entropy(const Interface& iface, const VectorSampler& xi, const Anisotropy& a, const Cutoff& c)
{
    std::vector<double> parts(iface.facets.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Facet& f = iface.facets[i];
        const Vec x = xi(f.midpoint);
        if (x.norm() > 1.0 + 1e-9)
            throw InputError(fmt::format("relative_entropy: |xi| = {:.12g} > 1 at a facet", x.norm()));
        const Vec xc = x.norm() > 1.0 ? Vec(x / x.norm()) : x;
        parts[i] = dziuk_gap(a, c, f.normal, xc) * f.weight;
    }
    return pairwise_sum(parts);
}

double tilt_excess(const Interface& iface, const VectorSampler& xi)
{
    std::vector<double> parts(iface.facets.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Facet& f = iface.facets[i];
        parts[i] = (xi(f.midpoint) - f.normal).squaredNorm() * f.weight;
    }
    return pairwise_sum(parts);
}

double bulk_error(const PeriodicField& u, const ScalarSampler& theta, const std::function<bool(const Vec&)>& ref_inside)
{
    const Grid& g = u.grid();
    const double s = blocked_sum(g.size(), [&](std::size_t b, std::size_t e) {
        double acc = 0.0;
        for (std::size_t k = b; k < e; ++k) {
            const Vec x = g.center(k);
            const bool in_a = u[k] >= 0.5;
            if (in_a != ref_inside(x)) acc += std::abs(theta(x));
        }
        return acc;
    });
    return g.cell_volume() * s;
}

double bulk_error(const PeriodicField& u, const ScalarSampler& theta)
{
    return bulk_error(u, theta, [&](const Vec& x) { return theta(x) < 0.0; });
}

Mat StressField::at(std::size_t k) const
{
    const int d = grid.dim;
    Mat T(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) T(i, j) = data[k * static_cast<std::size_t>(d * d) + static_cast<std::size_t>(i * d + j)];
    return T;
}

double StressField::trace(std::size_t k) const
{
    const int d = grid.dim;
    double t = 0.0;
    for (int i = 0; i < d; ++i) t += data[k * static_cast<std::size_t>(d * d) + static_cast<std::size_t>(i * d + i)];
    return t;
}

StressField stress_tensor(const PeriodicField& u, double eps, const Anisotropy& a, const DoubleWell& w)
{
    const Grid& g = u.grid();
    const int d = g.dim;
    const VectorField grad = cell_gradient(u);
    StressField T{g, std::vector<double>(g.size() * static_cast<std::size_t>(d * d), 0.0)};
    parallel_blocks(g.size(), [&](std::size_t b, std::size_t e) {
        double gu[3], p[3], df[3];
        for (std::size_t k = b; k < e; ++k) {
            for (int ax = 0; ax < d; ++ax) {
                gu[ax] = grad.comp[static_cast<std::size_t>(ax)][k];
                p[ax] = -gu[ax];
            }
            const double f = a.f_and_df(p, df);
            const double iso = 0.5 * (eps * f + w(u[k]) / eps);
            double* t = T.data.data() + k * static_cast<std::size_t>(d * d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) t[i * d + j] = (i == j ? iso : 0.0) + eps * gu[i] * 0.5 * df[j];
        }
    });
    return T;
}

double sharp_curvature_pairing(const Interface& iface, const SmoothVectorField& B, const Anisotropy& a)
{
    std::vector<double> parts(iface.facets.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Facet& f = iface.facets[i];
        const auto d = f.normal.size();
        const Mat S = a.sigma(f.normal) * Mat::Identity(d, d) - f.normal * a.dsigma(f.normal).transpose();
        parts[i] = frobenius(B.jacobian(f.midpoint), S) * f.weight;
    }
    return pairwise_sum(parts);
}

double diffuse_curvature_pairing(const StressField& T, const SmoothVectorField& B)
{
    const Grid& g = T.grid;
    const double s = blocked_sum(g.size(), [&](std::size_t b, std::size_t e) {
        double acc = 0.0;
        for (std::size_t k = b; k < e; ++k) acc += frobenius(B.jacobian(g.center(k)), T.at(k));
        return acc;
    });
    return g.cell_volume() * s;
}

CurvatureResidual curvature_residual_parts(const PeriodicField& u, const SmoothVectorField& B, double eps,
                                           const Anisotropy& a, const DoubleWell& w)
{
    CurvatureResidual r;
    r.diffuse = diffuse_curvature_pairing(stress_tensor(u, eps, a, w), B);
    r.sharp = sharp_curvature_pairing(extract_interface(u), B, a);
    r.residual = std::abs(r.diffuse - r.sharp);
    return r;
}

double curvature_residual(const PeriodicField& u, const SmoothVectorField& B, double eps, const Anisotropy& a,
                          const DoubleWell& w)
{
    return curvature_residual_parts(u, B, eps, a, w).residual;
}

McfResidual mcf_residual_parts(const VelocityEstimate& vel, const SmoothVectorField& B, const Anisotropy& sigma,
                               const Mobility& mobility)
{
    std::vector<double> vt, ct;
    for (std::size_t i = 0; i < vel.V.size(); ++i) {
        if (!vel.valid[i]) continue;
        const Facet& f = vel.iface.facets[i];
        vt.push_back(vel.V[i] * B.value(f.midpoint).dot(f.normal) / mobility.sigma(f.normal) * f.weight);
        const auto d = f.normal.size();
        const Mat S = sigma.sigma(f.normal) * Mat::Identity(d, d) - f.normal * sigma.dsigma(f.normal).transpose();
        ct.push_back(frobenius(B.jacobian(f.midpoint), S) * f.weight);
    }
    McfResidual r;
    r.velocity_term = pairwise_sum(vt);
    r.curvature_term = pairwise_sum(ct);
    r.residual = std::abs(r.velocity_term + r.curvature_term);
    return r;
}

double mcf_residual(const Trajectory& traj, long k, const SmoothVectorField& B, const Mobility& mobility)
{
    return mcf_residual_parts(normal_velocity(traj, k), B, traj.model->sigma(), mobility).residual;
}

void write_interface_csv(const std::string& path, const Interface& iface, const std::vector<double>* V)
{
    std::ofstream out(path);
    if (!out) throw InputError(fmt::format("cannot write {}", path));
    static const char* axes[3] = {"x", "y", "z"};
    std::string header;
    for (int a = 0; a < iface.dim; ++a) header += fmt::format("{}{},", axes[a], "");
    for (int a = 0; a < iface.dim; ++a) header += fmt::format("n{},", axes[a]);
    header += "weight";
    if (V) header += ",V";
    out << header << '\n';
    for (std::size_t i = 0; i < iface.facets.size(); ++i) {
        const Facet& f = iface.facets[i];
        std::string row;
        for (int a = 0; a < iface.dim; ++a) row += fmt::format("{:.17g},", f.midpoint(a));
        for (int a = 0; a < iface.dim; ++a) row += fmt::format("{:.17g},", f.normal(a));
        row += fmt::format("{:.17g}", f.weight);
        if (V) row += fmt::format(",{:.17g}", (*V)[i]);
        out << row << '\n';
    }
}

}  // namespace wulffflow
