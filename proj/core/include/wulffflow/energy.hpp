#pragma once

#include <vector>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/field.hpp"
#include "wulffflow/potential.hpp"

namespace wulffflow {

struct EnergyReport {
    double dirichlet = 0.0;  // ½∫ε f(−∇u), f = σ²
    double potential = 0.0;  // ½∫W(u)/ε
    double total = 0.0;
    double epsilon = 0.0;
};

// E_ε[u] with f at forward-difference (staggered) samples and W at cell
// centres. Warns when eps < 2Δx.
EnergyReport energy_eps(const PeriodicField& u, double eps, const Anisotropy& a, const DoubleWell& w);

// Reusable evaluator of E_ε and its exact discrete gradient ∂E/∂u_k
// (a coefficient derivative; divide by Δx^d for the L² gradient).
class EnergyKernel {
public:
    EnergyKernel(const Grid& g, double eps, const Anisotropy& a, const DoubleWell& w);
    EnergyReport evaluate(const double* u, double* grad);
    const Grid& grid() const { return grid_; }
    double eps() const { return eps_; }

private:
    template <int D, int Kind>
    void cells(const double* u, double* grad, std::size_t b, std::size_t e);

    Grid grid_;
    double eps_;
    const Anisotropy* a_;
    const DoubleWell* w_;
    double G_[9] = {0};
    std::vector<double> buf_[3];
    std::vector<double> fcell_, wcell_;  // per-cell f(−D⁺u) and W(u)
};

// Convenience wrapper: fills grad with ∂E/∂u_k.
EnergyReport energy_gradient(const PeriodicField& u, double eps, const Anisotropy& a, const DoubleWell& w,
                             PeriodicField& grad);

// Mobility weight g(p) = (σ(p)+1)/(μ(p)+1) with its sampled lower bound c_g.
class GWeight {
public:
    GWeight(const Anisotropy& sigma, const Mobility& mobility);

    double operator()(const Vec& p) const;
    double raw(const double* p) const;
    double c_g() const { return c_g_; }
    double sup_g() const { return sup_g_; }
    bool trivial() const { return trivial_; }
    const Anisotropy& sigma() const { return sigma_; }
    const Mobility& mobility() const { return mobility_; }

private:
    Anisotropy sigma_;
    Mobility mobility_;
    bool trivial_;
    double c_g_ = 1.0, sup_g_ = 1.0;
};

double g_weight(const GWeight& gw, const Vec& p);

// g(−∇u) at cell centres; the gradient is the average of the two adjacent
// forward differences.
PeriodicField g_field(const PeriodicField& at_u, const GWeight& gw);

// Δx^d Σ ε g(−∇at_u) v².
double metric_sq(const PeriodicField& v, const PeriodicField& at_u, double eps, const GWeight& gw);

}  // namespace wulffflow
