#pragma once

#include <array>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/diagnostics.hpp"
#include "wulffflow/solver.hpp"

namespace wulffflow {

// Exact shrinking Wulff shape 𝒜(t) = c + r(t)W_σ, r(t) = √(r0² − 2(d−1)t),
// for μ = σ on the torus [0, L)^d. Anisotropic shapes need d = 2.
class ReferenceEvolution {
public:
    // Throws InputError unless 0 < horizon < r0²/(2(d−1)) and the shape
    // fits in the torus.
    ReferenceEvolution(Anisotropy sigma, Vec center, double r0, double horizon, double L = 1.0);

    const Anisotropy& sigma() const { return sigma_; }
    const Vec& center() const { return center_; }
    double r0() const { return r0_; }
    double horizon() const { return horizon_; }
    double length() const { return L_; }
    int dim() const { return sigma_.dim(); }
    double extinction_time() const;
    double radius(double t) const;
    bool inside(const Vec& x, double t) const;

    struct Projection {
        double sdist = 0.0;  // unclamped, negative inside
        Vec normal;          // outer unit normal at the projected point = ∇sdist
        Vec point;           // projected point (minimal image about the centre, shifted back)
        double curvature = 0.0;  // div_Γ Dσ(ν) at the projected point
        bool converged = true;
    };
    // Closest point on r(t)∂W_σ: closed form for σ = |·|, otherwise Newton on
    // the parametrization r Dσ(ν(θ)) started from the nearest of 256 samples.
    Projection project(const Vec& x, double t) const;

    // r(t) Dσ(ν_k) + c for the 256 sampling directions (d = 2).
    std::vector<Vec> boundary_samples(double t) const;
    // Reference boundary as a closed polyline with n vertices (d = 2).
    std::vector<Vec> boundary_polyline(double t, int n) const;
    // Smallest radius of curvature of r(t)∂W_σ.
    double min_curvature_radius(double t) const;

private:
    Anisotropy sigma_;
    Vec center_;
    double r0_, horizon_, L_;
    std::vector<double> angle_;
    std::vector<Vec> unit_;  // Dσ(ν_k)
};

// Euclidean signed distance to ∂𝒜(t), clamped to ±δ outside the tube.
double signed_distance(const ReferenceEvolution& ref, const Vec& x, double t, double delta);

class Calibration {
public:
    Calibration(const ReferenceEvolution& ref, double delta);

    const ReferenceEvolution& reference() const { return ref_; }
    double delta() const { return delta_; }

    double zeta(double s) const;
    double truncation(double s) const;  // f

    double sdist(const Vec& x, double t) const;
    Vec xi(const Vec& x, double t) const;
    Vec B(const Vec& x, double t) const;
    double theta(const Vec& x, double t) const;

    // 4th-order central differences, spatial step 1e-4·r0, temporal 1e-4·r0².
    Mat jacobian_xi(const Vec& x, double t) const;
    Mat jacobian_B(const Vec& x, double t) const;
    Vec grad_theta(const Vec& x, double t) const;
    Vec dt_xi(const Vec& x, double t) const;
    double dt_theta(const Vec& x, double t) const;
    // div(|ξ|ψ(|ξ|)Dσ(ξ))
    double div_cahn_hoffman(const Vec& x, double t, const Cutoff& c = {}) const;

    SmoothVectorField B_field(double t) const;
    VectorSampler xi_sampler(double t) const;
    ScalarSampler theta_sampler(double t) const;

private:
    ReferenceEvolution ref_;
    double delta_;
    double hx_, ht_;
};

// δ defaults to 0.2·r(T) when delta <= 0. Throws InputError when δ reaches
// the smallest radius of curvature over [0, T].
Calibration build_calibration(const ReferenceEvolution& ref, double delta = 0.0);

struct CalibrationSampling {
    std::vector<double> times;  // empty: 5 equispaced times in [0, 0.9T]
    int n_angles = 128;
    int n_layers = 24;  // normal offsets in (−1.2δ, 1.2δ)
    int n_bulk = 40;    // coarse grid per axis over the torus
};

struct InequalityFit {
    std::string name;
    double constant = 0.0;
    // cal1..cal4: the same fit restricted to |sdist| <= δ/2, where ζ = 1 − s²
    // (outside it the cutoff's ζ' ~ 1/δ dominates the constant).
    double core_constant = std::numeric_limits<double>::quiet_NaN();
    double max_residual = 0.0;
    Vec where;
    double when = 0.0;
    bool ok = false;
};

struct CalibrationReport {
    // cal1..cal4: fitted C; cal5: max |ξ − ν| on the boundary; cal6..cal8:
    // fitted c.
    std::array<InequalityFit, 8> fits;
    InequalityFit lemma_upper;      // 1 − |ξ| ≤ C dist²
    InequalityFit lemma_transport;  // |ξ·(ξ·∇)B| ≤ C dist
    double compat_on_boundary = 0.0;  // max R4 at dist 0
    double delta = 0.0;
    long samples = 0;
    bool passed = false;

    // max(C1..C4)
    double c_fit() const;
    std::string to_json() const;
};

CalibrationReport check_calibration(const Calibration& cal, const CalibrationSampling& sampling = {});

struct StabilityRow {
    long step = 0;
    double time = 0.0;
    double rel_entropy = 0.0;
    double bulk_error = 0.0;
    double vel_cross = 0.0;  // NaN where no velocity is available
    double envelope = 0.0;
};

struct StabilitySeries {
    std::vector<StabilityRow> rows;
    double offset = 0.0;  // a(Δx, ε)
    double c_fit = 0.0;
    bool holds = false;
};

// Relative entropy, bulk error and velocity cross term at every retained
// snapshot, with the envelope (E_bulk(0) + E_rel(0) + a)·exp(C_fit·t) and
// a = (Δx + ε)²·sharp_energy(0).
StabilitySeries stability_monitor(const Trajectory& traj, const Calibration& cal, double c_fit);

}  // namespace wulffflow
