#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/field.hpp"
#include "wulffflow/interface.hpp"
#include "wulffflow/potential.hpp"
#include "wulffflow/solver.hpp"

namespace wulffflow {

using ScalarSampler = std::function<double(const Vec&)>;
using VectorSampler = std::function<Vec(const Vec&)>;

// Vector field with its Jacobian, J(i, j) = ∂_j B_i.
struct SmoothVectorField {
    VectorSampler value;
    std::function<Mat(const Vec&)> jacobian;
};

SmoothVectorField constant_field(const Vec& b);
// B(x) = x − c in minimal-image coordinates (∇B = I).
SmoothVectorField radial_field(const Vec& center, double L);

// Δxᵈ Σ |εf(−∇u)/2 − W(u)/(2ε)| with the 4th-order centred cell gradient.
double equipartition_defect(const PeriodicField& u, double eps, const Anisotropy& a, const DoubleWell& w);

// Σ σ(ν)·weight.
double sharp_energy(const Interface& iface, const Anisotropy& a);

struct VelocityEstimate {
    Interface iface;             // interface of step k
    std::vector<double> V;       // per facet; NaN where excluded
    std::vector<char> valid;
    long excluded = 0;

    // (Σ V²·weight)^{1/2} over valid facets.
    double l2() const;
};

// V = (φ(u_{k+1}) − φ(u_{k−1}))/(2h|∇(φ∘u_k)|) at the facet midpoints of
// the step-k interface. Needs snapshots k−1, k, k+1.
VelocityEstimate normal_velocity(const Trajectory& traj, long k);

// ∫(σ(−∇u) + F(ξ)·∇u)√W(u). Throws InputError if |ξ| > 1 + 1e-9.
double eps_relative_entropy(const PeriodicField& u, const VectorSampler& xi, double eps, const Anisotropy& a,
                            const DoubleWell& w, const Cutoff& c = {});

// Σ (σ(ν) − F(ξ)·ν)·weight.
double relative_entropy(const Interface& iface, const VectorSampler& xi, const Anisotropy& a, const Cutoff& c = {});
// Σ |ξ − ν|²·weight.
double tilt_excess(const Interface& iface, const VectorSampler& xi);

// Δxᵈ Σ |ϑ|·|χ_A − χ_ref| with χ_A = [u ≥ 1/2] at cell centres.
double bulk_error(const PeriodicField& u, const ScalarSampler& theta, const std::function<bool(const Vec&)>& ref_inside);
// As above with χ_ref = [ϑ < 0].
double bulk_error(const PeriodicField& u, const ScalarSampler& theta);

// T_ε = ½(εf + W/ε)I + ε∇u ⊗ ½Df(−∇u) per cell, row-major d×d blocks.
struct StressField {
    Grid grid;
    std::vector<double> data;

    Mat at(std::size_t k) const;
    double trace(std::size_t k) const;
};

StressField stress_tensor(const PeriodicField& u, double eps, const Anisotropy& a, const DoubleWell& w);

// Σ ∇B : (σ(ν)I − ν⊗Dσ(ν))·weight.
double sharp_curvature_pairing(const Interface& iface, const SmoothVectorField& B, const Anisotropy& a);
// Δxᵈ Σ ∇B : T_ε.
double diffuse_curvature_pairing(const StressField& T, const SmoothVectorField& B);

struct CurvatureResidual {
    double diffuse = 0.0;
    double sharp = 0.0;
    double residual = 0.0;
};

CurvatureResidual curvature_residual_parts(const PeriodicField& u, const SmoothVectorField& B, double eps,
                                           const Anisotropy& a, const DoubleWell& w);
double curvature_residual(const PeriodicField& u, const SmoothVectorField& B, double eps, const Anisotropy& a,
                          const DoubleWell& w);

struct McfResidual {
    double velocity_term = 0.0;   // Σ V(B·ν)/μ(ν)·weight
    double curvature_term = 0.0;  // Σ ∇B:(σI − ν⊗Dσ)·weight
    double residual = 0.0;
};

McfResidual mcf_residual_parts(const VelocityEstimate& vel, const SmoothVectorField& B, const Anisotropy& sigma,
                               const Mobility& mobility);
double mcf_residual(const Trajectory& traj, long k, const SmoothVectorField& B, const Mobility& mobility);

// Per-facet dump: midpoint coordinates, normal, weight and (optionally) V.
void write_interface_csv(const std::string& path, const Interface& iface, const std::vector<double>* V = nullptr);

}  // namespace wulffflow
