#include "wulffflow/identities.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wulffflow/errors.hpp"

namespace wulffflow {

namespace {

struct Rng {
    explicit Rng(unsigned long long seed) : gen(seed) {}
    std::mt19937_64 gen;
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif{0.0, 1.0};

    Vec unit(int d)
    {
        Vec v(d);
        do {
            for (int i = 0; i < d; ++i) v(i) = gauss(gen);
        } while (v.norm() < 1e-12);
        return v / v.norm();
    }
};

IdentityCheck finish(std::string name, double err, long n, double tol)
{
    return {std::move(name), err, n, tol, err <= tol};
}

// Rotates unit v towards w (orthogonal to v) by angle t.
Vec rotate(const Vec& v, const Vec& w, double t) { return std::cos(t) * v + std::sin(t) * w; }

}  // namespace

double double_polar(const Anisotropy& a, const Vec& q)
{
    const int d = a.dim();
    if (q.size() != d) throw InputError("double_polar: dimension mismatch");
    if (q.isZero(0.0)) return 0.0;
    if (d == 1) return std::max(q(0) / a.polar(vec({1.0})), -q(0) / a.polar(vec({-1.0})));
    auto value = [&](const Vec& eta) { return q.dot(eta) / a.polar(eta); };

    const auto dirs = sphere_directions(d, d == 2 ? 1024 : 2000);
    Vec best = dirs.front();
    double fbest = value(best);
    for (const auto& e : dirs) {
        const double f = value(e);
        if (f > fbest) {
            fbest = f;
            best = e;
        }
    }
    // Pattern search over the tangent directions of the sphere.
    double step = d == 2 ? 2.0 * 3.141592653589793 / 1024 : 0.1;
    while (step > 1e-9) {
        bool improved = false;
        Mat basis(d, d);
        basis.setIdentity();
        for (int i = 0; i < d; ++i) {
            Vec w = basis.col(i) - basis.col(i).dot(best) * best;
            if (w.norm() < 1e-6) continue;
            w /= w.norm();
            for (double s : {step, -step}) {
                Vec trial = rotate(best, w, s);
                trial /= trial.norm();
                const double f = value(trial);
                if (f > fbest) {
                    fbest = f;
                    best = trial;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return fbest;
}

std::vector<IdentityCheck> anisotropy_identities(const Anisotropy& a, unsigned long long seed)
{
    const int d = a.dim();
    Rng rng(seed);
    std::vector<IdentityCheck> out;

    {  // |σ(λp) − λσ(p)| / (λσ(p))
        double err = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Vec p = rng.unit(d) * (0.1 + 10.0 * rng.unif(rng.gen));
            const double lam = 10.0 * (1.0 - rng.unif(rng.gen));
            const double ref = lam * a.sigma(p);
            err = std::max(err, std::abs(a.sigma(Vec(lam * p)) - ref) / ref);
        }
        out.push_back(finish("homogeneity_rel", err, 100, 1e-12));
    }
    {  // |p·Dσ(p) − σ(p)|
        double err = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Vec p = rng.unit(d) * (0.1 + 3.0 * rng.unif(rng.gen));
            err = std::max(err, std::abs(p.dot(a.dsigma(p)) - a.sigma(p)));
        }
        out.push_back(finish("euler_identity", err, 100, 1e-10));
    }
    {  // |σ°(Dσ(p)) − 1|
        double err = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Vec p = rng.unit(d) * (0.1 + 3.0 * rng.unif(rng.gen));
            err = std::max(err, std::abs(a.polar(a.dsigma(p)) - 1.0));
        }
        out.push_back(finish("polar_of_dsigma", err, 100, 1e-9));
    }
    {  // |σ°°(q) − σ(q)|
        double err = 0.0;
        for (int i = 0; i < 50; ++i) {
            const Vec q = rng.unit(d) * (0.5 + rng.unif(rng.gen));
            err = std::max(err, std::abs(double_polar(a, q) - a.sigma(q)));
        }
        out.push_back(finish("double_polar", err, 50, 1e-5));
    }
    {  // analytic vs five-point central differences at unit points; the
       // 4th-order stencil lets the step be large enough that round-off
       // stays near 1e-13
        constexpr double h = 1e-3;
        auto central4 = [](auto&& f, double step) {
            return (8.0 * (f(step) - f(-step)) - (f(2.0 * step) - f(-2.0 * step))) / (12.0 * step);
        };
        double eg = 0.0, eh = 0.0;
        for (int i = 0; i < 50; ++i) {
            const Vec p = rng.unit(d);
            const Vec g = a.dsigma(p);
            const Mat H = a.d2sigma(p);
            for (int j = 0; j < d; ++j) {
                Vec e = Vec::Zero(d);
                e(j) = 1.0;
                const double fd = central4([&](double s) { return a.sigma(Vec(p + s * e)); }, h);
                eg = std::max(eg, std::abs(fd - g(j)));
                const Vec col = central4([&](double s) { return Vec(a.dsigma(Vec(p + s * e))); }, h);
                eh = std::max(eh, (col - H.col(j)).cwiseAbs().maxCoeff());
            }
        }
        out.push_back(finish("gradient_fd", eg, 50, 1e-6));
        out.push_back(finish("hessian_fd", eh, 50, 1e-5));
    }
    {  // |D²σ(p)p| / |D²σ(p)|
        double err = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Vec p = rng.unit(d) * (0.1 + 3.0 * rng.unif(rng.gen));
            const Mat H = a.d2sigma(p);
            const double scale = std::max(H.norm(), 1e-300);
            err = std::max(err, (H * p).norm() / scale);
        }
        out.push_back(finish("hessian_radial_null", err, 100, 1e-10));
    }
    {  // σ(B) − B·Dσ(B) ≤ 1e-6σ(B); B·η ≤ σ(B) for σ°(η) ≤ 1
        double e1 = 0.0, e2 = 0.0;
        for (int i = 0; i < 20; ++i) {
            const Vec B = rng.unit(d) * (0.1 + 3.0 * rng.unif(rng.gen));
            e1 = std::max(e1, std::abs(a.sigma(B) - B.dot(a.dsigma(B))) / a.sigma(B));
        }
        for (int i = 0; i < 100; ++i) {
            const Vec B = rng.unit(d) * (0.1 + 3.0 * rng.unif(rng.gen));
            Vec eta = rng.unit(d);
            eta *= rng.unif(rng.gen) / a.polar(eta);
            e2 = std::max(e2, std::max(0.0, B.dot(eta) - a.sigma(B)));
        }
        out.push_back(finish("duality_sup_attained_rel", e1, 20, 1e-6));
        out.push_back(finish("duality_sup_bound", e2, 100, 1e-12));
    }
    // c|p − pp|² ≤ gap ≤ C(|p − pp|² + 1 − |pp|): constants fitted on one
    // sample, checked with a factor-2 margin on a fresh one.
    {
        const Cutoff cut;
        constexpr int n = 4000;
        double err = 0.0;
        try {
            const auto k = fit_dziuk_constants(a, cut, n, seed);
            Rng r2(seed + 1);
            for (int i = 0; i < 1000; ++i) {
                const Vec p = r2.unit(d);
                const Vec pp = r2.unit(d) * std::pow(r2.unif(r2.gen), 1.0 / d);
                const double gap = dziuk_gap(a, cut, p, pp);
                const double d2 = (p - pp).squaredNorm();
                // lower bound is fitted on |p − pp|² > 1e-6 only
                if (d2 > 1e-6) err = std::max(err, 0.5 * k.c_sigma * d2 - gap);
                err = std::max(err, gap - 2.0 * k.C_sigma * (d2 + 1.0 - pp.norm()));
            }
            out.push_back(finish("dziuk_sandwich", std::max(0.0, err), n + 1000, 1e-12));
        } catch (const InvariantError&) {
            out.push_back({"dziuk_sandwich", std::numeric_limits<double>::infinity(), n, 1e-12, false});
        }
    }
    return out;
}

}  // namespace wulffflow
