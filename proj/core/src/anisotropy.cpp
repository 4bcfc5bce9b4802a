#include "wulffflow/anisotropy.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <random>

#include "wulffflow/errors.hpp"

namespace wulffflow {

namespace {

void require_finite(const Vec& p, const char* what)
{
    if (!p.allFinite()) throw InputError(fmt::format("{}: non-finite input component", what));
}

void require_dim(const Anisotropy& a, const Vec& p, const char* what)
{
    if (p.size() != a.dim())
        throw InputError(fmt::format("{}: vector has dimension {}, anisotropy has {}", what, p.size(), a.dim()));
}

}  // namespace

std::vector<Vec> sphere_directions(int dim, int n)
{
    std::vector<Vec> out;
    if (dim == 1) {
        out.push_back(vec({1.0}));
        out.push_back(vec({-1.0}));
        return out;
    }
    out.reserve(static_cast<std::size_t>(n));
    if (dim == 2) {
        for (int k = 0; k < n; ++k) {
            const double t = 2.0 * std::numbers::pi * k / n;
            out.push_back(vec({std::cos(t), std::sin(t)}));
        }
        return out;
    }
    // Fibonacci lattice
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
        const double z = 1.0 - (2.0 * k + 1.0) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * k;
        out.push_back(vec({r * std::cos(phi), r * std::sin(phi), z}));
    }
    return out;
}

Anisotropy Anisotropy::euclidean(int dim)
{
    if (dim < 1 || dim > 3) throw InputError(fmt::format("anisotropy: dimension {} not in {{1,2,3}}", dim));
    Anisotropy a;
    a.kind_ = AnisotropyKind::euclidean;
    a.dim_ = dim;
    a.q_ = 2.0;
    a.finish();
    return a;
}

Anisotropy Anisotropy::bgn(double q, std::vector<Mat> matrices)
{
    if (!std::isfinite(q) || q < 1.0) throw InputError(fmt::format("bgn anisotropy: exponent q = {} must be >= 1", q));
    if (matrices.empty()) throw InputError("bgn anisotropy: at least one matrix required");
    const int d = static_cast<int>(matrices.front().rows());
    if (d < 1 || d > 3) throw InputError(fmt::format("bgn anisotropy: dimension {} not in {{1,2,3}}", d));
    for (std::size_t l = 0; l < matrices.size(); ++l) {
        const Mat& G = matrices[l];
        if (G.rows() != d || G.cols() != d)
            throw InputError(fmt::format("bgn anisotropy: matrix {} is {}x{}, expected {}x{}", l, G.rows(), G.cols(), d, d));
        if (!G.allFinite()) throw InputError(fmt::format("bgn anisotropy: matrix {} has non-finite entries", l));
        if ((G - G.transpose()).norm() > 1e-12 * std::max(1.0, G.norm()))
            throw InputError(fmt::format("bgn anisotropy: matrix {} is not symmetric", l));
        Eigen::SelfAdjointEigenSolver<Mat> es(G);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw InputError(fmt::format("bgn anisotropy: matrix {} is not positive definite (min eigenvalue {})", l,
                                         es.eigenvalues().minCoeff()));
    }
    Anisotropy a;
    a.kind_ = AnisotropyKind::bgn;
    a.dim_ = d;
    a.q_ = q;
    a.G_ = std::move(matrices);
    if (a.G_.size() == 1) a.Ginv_ = a.G_[0].inverse();
    a.finish();
    return a;
}

void Anisotropy::finish()
{
    // Uniform convexity of σ²: D²(σ²) = 2(Dσ⊗Dσ + σD²σ).
    double lam = std::numeric_limits<double>::infinity();
    for (const Vec& p : sphere_directions(dim_, 1000)) {
        const Vec ds = dsigma(p);
        const Mat H = 2.0 * (ds * ds.transpose() + sigma(p) * d2sigma(p));
        Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
        lam = std::min(lam, es.eigenvalues().minCoeff());
    }
    convexity_ = lam;
    if (!(lam > 1e-8))
        throw InputError(fmt::format("anisotropy {}: sigma^2 not uniformly convex (min eigenvalue {:.3e})", describe(), lam));

    sigma_min_ = dsigma_min_ = std::numeric_limits<double>::infinity();
    sigma_max_ = dsigma_max_ = 0.0;
    for (const Vec& p : sphere_directions(dim_, 10000)) {
        const double s = sigma(p);
        const double g = dsigma(p).norm();
        sigma_min_ = std::min(sigma_min_, s);
        sigma_max_ = std::max(sigma_max_, s);
        dsigma_min_ = std::min(dsigma_min_, g);
        dsigma_max_ = std::max(dsigma_max_, g);
    }
}

double Anisotropy::sigma_raw(const double* p) const
{
    if (kind_ == AnisotropyKind::euclidean) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += p[i] * p[i];
        return std::sqrt(s);
    }
    double sl[8];
    double m = 0.0;
    const std::size_t L = G_.size();
    for (std::size_t l = 0; l < L; ++l) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) s += p[i] * G_[l](i, j) * p[j];
        const double v = std::sqrt(std::max(0.0, s));
        if (l < 8) sl[l] = v;
        m = std::max(m, v);
    }
    if (L == 1) return m;
    if (m == 0.0) return 0.0;
    double S = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        double v;
        if (l < 8) {
            v = sl[l];
        } else {
            double s = 0.0;
            for (int i = 0; i < dim_; ++i)
                for (int j = 0; j < dim_; ++j) s += p[i] * G_[l](i, j) * p[j];
            v = std::sqrt(std::max(0.0, s));
        }
        S += std::pow(v / m, q_);
    }
    return m * std::pow(S, 1.0 / q_);
}

double Anisotropy::sigma(const Vec& p) const
{
    require_dim(*this, p, "sigma");
    require_finite(p, "sigma");
    return sigma_raw(p.data());
}

Vec Anisotropy::dsigma(const Vec& p) const
{
    require_dim(*this, p, "dsigma");
    require_finite(p, "dsigma");
    const double np = p.norm();
    if (np == 0.0) throw DomainError("dsigma: undefined at p = 0");
    if (kind_ == AnisotropyKind::euclidean) return p / np;
    if (G_.size() == 1) {
        const Vec Gp = G_[0] * p;
        return Gp / std::sqrt(p.dot(Gp));
    }
    const double s = sigma_raw(p.data());
    Vec out = Vec::Zero(dim_);
    for (const Mat& G : G_) {
        const Vec Gp = G * p;
        const double sl = std::sqrt(p.dot(Gp));
        out += std::pow(sl / s, q_ - 1.0) * Gp / sl;
    }
    return out;
}

Mat Anisotropy::d2sigma(const Vec& p) const
{
    require_dim(*this, p, "d2sigma");
    require_finite(p, "d2sigma");
    const double np = p.norm();
    if (np == 0.0) throw DomainError("d2sigma: undefined at p = 0");
    const Mat I = Mat::Identity(dim_, dim_);
    if (kind_ == AnisotropyKind::euclidean) {
        const Vec e = p / np;
        return (I - e * e.transpose()) / np;
    }
    const double s = sigma_raw(p.data());
    Mat H = Mat::Zero(dim_, dim_);
    Vec ds = Vec::Zero(dim_);
    for (const Mat& G : G_) {
        const Vec Gp = G * p;
        const double sl = std::sqrt(p.dot(Gp));
        const Vec dl = Gp / sl;
        const Mat Hl = (G - dl * dl.transpose()) / sl;
        const double w = std::pow(sl / s, q_ - 1.0);
        H += w * ((q_ - 1.0) / sl * dl * dl.transpose() + Hl);
        ds += w * dl;
    }
    H -= (q_ - 1.0) / s * ds * ds.transpose();
    return 0.5 * (H + H.transpose());
}

double Anisotropy::f_and_df(const double* p, double* df) const
{
    if (kind_ == AnisotropyKind::euclidean) {
        double f = 0.0;
        for (int i = 0; i < dim_; ++i) {
            f += p[i] * p[i];
            df[i] = 2.0 * p[i];
        }
        return f;
    }
    if (G_.size() == 1) {
        const Mat& G = G_[0];
        double f = 0.0;
        for (int i = 0; i < dim_; ++i) {
            double gi = 0.0;
            for (int j = 0; j < dim_; ++j) gi += G(i, j) * p[j];
            f += p[i] * gi;
            df[i] = 2.0 * gi;
        }
        return f;
    }
    double np2 = 0.0;
    for (int i = 0; i < dim_; ++i) np2 += p[i] * p[i];
    const double s = sigma_raw(p);
    if (np2 < 1e-28) {
        for (int i = 0; i < dim_; ++i) df[i] = 0.0;
        return s * s;
    }
    double ds[3] = {0.0, 0.0, 0.0};
    for (const Mat& G : G_) {
        double gp[3] = {0.0, 0.0, 0.0};
        double sl2 = 0.0;
        for (int i = 0; i < dim_; ++i) {
            for (int j = 0; j < dim_; ++j) gp[i] += G(i, j) * p[j];
            sl2 += p[i] * gp[i];
        }
        const double sl = std::sqrt(sl2);
        const double w = std::pow(sl / s, q_ - 1.0) / sl;
        for (int i = 0; i < dim_; ++i) ds[i] += w * gp[i];
    }
    for (int i = 0; i < dim_; ++i) df[i] = 2.0 * s * ds[i];
    return s * s;
}

double Anisotropy::polar(const Vec& q) const
{
    require_dim(*this, q, "polar");
    require_finite(q, "polar");
    if (q.isZero(0.0)) return 0.0;
    if (kind_ == AnisotropyKind::euclidean) return q.norm();
    if (G_.size() == 1) return std::sqrt(q.dot(Ginv_ * q));
    return polar_ascent(q);
}

// ½σ°(q)² = sup_p (p·q − ½σ(p)²); the objective is strongly concave, so a
// damped Newton ascent converges from any start. At the maximizer
// q = σ(p*)Dσ(p*) and σ°(q) = σ(p*).
double Anisotropy::polar_ascent(const Vec& q) const
{
    constexpr int kCap = 500;
    constexpr double kTol = 1e-10;
    const double nq = q.norm();
    auto objective = [&](const Vec& p) { const double s = sigma_raw(p.data()); return p.dot(q) - 0.5 * s * s; };

    std::mt19937_64 rng(0x5EEDC0DEULL);
    std::normal_distribution<double> gauss;
    double best_residual = std::numeric_limits<double>::infinity();
    for (int start = 0; start <= 16; ++start) {
        Vec p(dim_);
        if (start == 0) {
            p = q / sigma_max_;
        } else {
            for (int i = 0; i < dim_; ++i) p(i) = gauss(rng);
            p *= nq / (sigma_max_ * p.norm());
        }
        for (int it = 0; it < kCap; ++it) {
            const double s = sigma_raw(p.data());
            const Vec ds = dsigma(p);
            const Vec g = q - s * ds;
            const double res = g.norm() / nq;
            best_residual = std::min(best_residual, res);
            if (res <= kTol) return s;
            const Mat H = ds * ds.transpose() + s * d2sigma(p);
            const Vec step = H.ldlt().solve(g);
            const double phi0 = objective(p);
            double t = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
                const Vec trial = p + t * step;
                if (trial.norm() == 0.0) continue;
                const double phi1 = objective(trial);
                const double res1 = (q - sigma_raw(trial.data()) * dsigma(trial)).norm() / nq;
                if (phi1 >= phi0 + 1e-4 * t * g.dot(step) || res1 < res) {
                    p = trial;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
    }
    throw NumericError(fmt::format("polar: ascent did not converge (residual {:.3e})", best_residual));
}

std::string Anisotropy::describe() const
{
    if (kind_ == AnisotropyKind::euclidean) return fmt::format("euclidean(d={})", dim_);
    return fmt::format("bgn(q={}, L={}, d={})", q_, G_.size(), dim_);
}

bool Anisotropy::operator==(const Anisotropy& o) const
{
    if (kind_ != o.kind_ || dim_ != o.dim_) return false;
    if (kind_ == AnisotropyKind::euclidean) return true;
    if (q_ != o.q_ || G_.size() != o.G_.size()) return false;
    for (std::size_t l = 0; l < G_.size(); ++l)
        if (G_[l] != o.G_[l]) return false;
    return true;
}

double Cutoff::operator()(double r) const
{
    if (r <= 0.25) return 0.0;
    if (r >= 0.5) return 1.0;
    const double t = (r - 0.25) * 4.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double Cutoff::derivative(double r) const
{
    if (r <= 0.25 || r >= 0.5) return 0.0;
    const double t = (r - 0.25) * 4.0;
    return 120.0 * t * t * (1.0 - t) * (1.0 - t);
}

Vec cahn_hoffman_trunc(const Anisotropy& a, const Cutoff& c, const Vec& xi)
{
    const double r = xi.norm();
    if (r <= 0.25) return Vec::Zero(xi.size());
    return r * c(r) * a.dsigma(xi);
}

double dziuk_gap(const Anisotropy& a, const Cutoff& c, const Vec& p, const Vec& pp)
{
    if (std::abs(p.norm() - 1.0) > 1e-9) throw InputError(fmt::format("dziuk_gap: |p| = {} is not 1", p.norm()));
    if (pp.norm() > 1.0 + 1e-12) throw InputError(fmt::format("dziuk_gap: |pp| = {} exceeds 1", pp.norm()));
    return a.sigma(p) - cahn_hoffman_trunc(a, c, pp).dot(p);
}

DziukConstants fit_dziuk_constants(const Anisotropy& a, const Cutoff& c, int n_samples, unsigned long long seed)
{
    if (n_samples < 1000) throw InputError(fmt::format("fit_dziuk_constants: n_samples = {} < 1000", n_samples));
    const int d = a.dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto random_unit = [&] {
        Vec v(d);
        do {
            for (int i = 0; i < d; ++i) v(i) = gauss(rng);
        } while (v.norm() < 1e-12);
        return Vec(v / v.norm());
    };

    DziukConstants out;
    out.c_sigma = std::numeric_limits<double>::infinity();
    out.C_sigma = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const Vec p = random_unit();
        Vec pp(d);
        switch (i % 4) {
        case 0: pp = random_unit() * std::pow(unif(rng), 1.0 / d); break;
        case 1: pp = random_unit(); break;
        case 2: {
            pp = p + std::pow(10.0, -3.0 + 3.0 * unif(rng)) * random_unit();
            if (pp.norm() > 1.0) pp /= pp.norm();
            break;
        }
        default: {
            Vec dir = p + std::pow(10.0, -3.0 + 3.0 * unif(rng)) * random_unit();
            pp = dir / dir.norm() * (0.25 + 0.75 * unif(rng));
        }
        }
        const double gap = dziuk_gap(a, c, p, pp);
        const double dist2 = (p - pp).squaredNorm();
        if (dist2 > 1e-6) out.c_sigma = std::min(out.c_sigma, gap / dist2);
        const double den = dist2 + (1.0 - pp.norm());
        if (den > 1e-12) out.C_sigma = std::max(out.C_sigma, gap / den);
    }
    if (!std::isfinite(out.c_sigma) || out.c_sigma <= 0.0)
        throw InvariantError(fmt::format("fit_dziuk_constants: c_sigma = {} is not positive ({} not admissible)",
                                         out.c_sigma, a.describe()));
    if (!std::isfinite(out.C_sigma) || out.C_sigma <= 0.0)
        throw InvariantError(fmt::format("fit_dziuk_constants: C_sigma = {} is not positive and finite", out.C_sigma));
    return out;
}

bool wulff_contains(const Anisotropy& a, const Vec& x, double r)
{
    if (!(r > 0.0)) throw InputError("wulff_contains: radius must be positive");
    return a.polar(x) <= r;
}

std::vector<Vec> wulff_boundary_points(const Anisotropy& a, double r, int n)
{
    if (a.dim() != 2) throw InputError("wulff_boundary_points: only d = 2 is supported");
    if (!(r > 0.0)) throw InputError("wulff_boundary_points: radius must be positive");
    if (n < 3) throw InputError("wulff_boundary_points: need at least 3 points");
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(n));
    for (const Vec& nu : sphere_directions(2, n)) out.push_back(r * a.dsigma(nu));
    return out;
}

}  // namespace wulffflow
