#pragma once

#include <string>
#include <vector>

#include "wulffflow/types.hpp"

namespace wulffflow {

enum class AnisotropyKind { euclidean, bgn };

// Positively 1-homogeneous, uniformly convex surface tension
//   euclidean:  σ(p) = |p|
//   bgn:        σ(p) = (Σ_l σ_l(p)^q)^{1/q},  σ_l(p) = sqrt(p·G_l p)
// Immutable once constructed; construction rejects non-SPD matrices and
// anisotropies whose σ² fails a sampled uniform-convexity gate.
class Anisotropy {
public:
    static Anisotropy euclidean(int dim);
    static Anisotropy bgn(double q, std::vector<Mat> matrices);

    int dim() const { return dim_; }
    AnisotropyKind kind() const { return kind_; }
    double q() const { return q_; }
    const std::vector<Mat>& matrices() const { return G_; }

    // σ = sqrt(p·Gp) for some SPD G (euclidean or a single BGN ellipsoid).
    bool is_quadratic() const { return kind_ == AnisotropyKind::euclidean || G_.size() == 1; }

    double sigma(const Vec& p) const;
    Vec dsigma(const Vec& p) const;
    Mat d2sigma(const Vec& p) const;
    double polar(const Vec& q) const;

    // f = σ² and Df = 2σDσ on raw arrays of length dim(); Df(0) = 0.
    // No validation: this is the inner loop of the energy.
    double f_and_df(const double* p, double* df) const;
    double sigma_raw(const double* p) const;

    // Extrema over the unit sphere, cached from 10^4 sampled directions.
    double sigma_min() const { return sigma_min_; }
    double sigma_max() const { return sigma_max_; }
    double dsigma_min() const { return dsigma_min_; }
    double dsigma_max() const { return dsigma_max_; }
    // Smallest eigenvalue of D²(σ²) seen by the admission gate.
    double convexity() const { return convexity_; }

    std::string describe() const;

    bool operator==(const Anisotropy& o) const;
    bool operator!=(const Anisotropy& o) const { return !(*this == o); }

private:
    Anisotropy() = default;
    void finish();
    double polar_ascent(const Vec& q) const;

    AnisotropyKind kind_ = AnisotropyKind::euclidean;
    int dim_ = 0;
    double q_ = 2.0;
    std::vector<Mat> G_;
    Mat Ginv_;  // single-ellipsoid case only
    double sigma_min_ = 1, sigma_max_ = 1, dsigma_min_ = 1, dsigma_max_ = 1, convexity_ = 2;
};

// Any admissible surface tension can act as a mobility.
using Mobility = Anisotropy;

// Cutoff ψ: 0 on [0,1/4], 1 on [1/2,∞), quintic smoothstep in between.
struct Cutoff {
    double operator()(double r) const;
    double derivative(double r) const;
};

// F(ξ) = |ξ|ψ(|ξ|)Dσ(ξ), with F(0) = 0.
Vec cahn_hoffman_trunc(const Anisotropy& a, const Cutoff& c, const Vec& xi);

// σ(p) − F(pp)·p for unit p and |pp| <= 1.
double dziuk_gap(const Anisotropy& a, const Cutoff& c, const Vec& p, const Vec& pp);

struct DziukConstants {
    double c_sigma = 0;
    double C_sigma = 0;
};

DziukConstants fit_dziuk_constants(const Anisotropy& a, const Cutoff& c, int n_samples,
                                   unsigned long long seed = 20240611ULL);

bool wulff_contains(const Anisotropy& a, const Vec& x, double r);
// r·Dσ(ν_k) for ν_k = (cos 2πk/n, sin 2πk/n); d = 2 only.
std::vector<Vec> wulff_boundary_points(const Anisotropy& a, double r, int n);

// Deterministic direction sets used by the sampled gates.
std::vector<Vec> sphere_directions(int dim, int n);

}  // namespace wulffflow
