#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/energy.hpp"
#include "wulffflow/field.hpp"
#include "wulffflow/potential.hpp"

namespace wulffflow {

// σ, μ, W and the derived mobility weight; cheap to copy.
class Model {
public:
    Model(Anisotropy sigma, Mobility mobility, DoubleWell well);

    const Anisotropy& sigma() const { return sigma_; }
    const Mobility& mobility() const { return mobility_; }
    const DoubleWell& well() const { return well_; }
    const GWeight& gweight() const { return *gw_; }
    double c_g() const { return gw_->c_g(); }
    double lambda() const { return well_.lambda(); }
    // Strong-convexity threshold 2ε²c_g/λ for the time step.
    double step_limit(double eps) const;

private:
    Anisotropy sigma_;
    Mobility mobility_;
    DoubleWell well_;
    std::shared_ptr<const GWeight> gw_;
};

struct SolverConfig {
    double eps = 1.0 / 64.0;
    double h = 0.0;
    double theta_h = 0.5;
    double tol_grad = 1e-9;
    int max_inner_iters = 10000;
    double t_end = 0.0;
    int lbfgs_memory = 8;

    // Snapshot retention for run(): steps divisible by snapshot_every (and,
    // with keep_neighbours, the steps on either side so velocities can be
    // formed). Step 0 and the final step are always kept.
    int snapshot_every = 0;
    bool keep_neighbours = true;

    // Invariant tolerances checked by run().
    double tol_max_principle = 1e-8;
    double tol_dissipation_rel = 1e-10;
    // Where run() dumps the offending state on an invariant failure.
    std::string dump_dir;

    // h = theta_h·2ε²c_g/λ.
    static SolverConfig make(const Model& m, double eps, double t_end, double theta_h = 0.5);
};

// Throws ConfigError unless 0 < theta_h < 1, h > 0 and h < 2ε²c_g/λ.
void validate(const SolverConfig& cfg, const Model& m);

struct StepRecord {
    long step = 0;
    double time = 0.0;
    int inner_iters = 0;
    double grad_residual = 0.0;  // ‖∇J(u_next)‖ (discrete L²)
    double grad_initial = 0.0;   // ‖∇J(u_prev)‖
    double energy_before = 0.0;
    EnergyReport energy_after;
    double metric_increment = 0.0;  // ‖u_n − u_{n−1}‖²_{u_{n−1}}
    double dissipation = 0.0;       // metric_increment / h²
    double linf_center_distance = 0.0;
    double max_principle_slack = 0.0;
    double dissipation_slack = 0.0;  // 2h(E_{n−1} − E_n) − metric_increment
};

struct StepResult {
    PeriodicField u;
    StepRecord record;
};

// One minimizing-movements step: argmin E_ε[u] + (1/2h)‖u − u_prev‖²_{u_prev}
// by preconditioned L-BFGS, warm-started at u_prev.
class Stepper {
public:
    Stepper(const Grid& g, const SolverConfig& cfg, const Model& m);
    ~Stepper();
    Stepper(const Stepper&) = delete;
    Stepper& operator=(const Stepper&) = delete;

    StepResult step(const PeriodicField& u_prev);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

StepResult minimize_step(const PeriodicField& u_prev, const SolverConfig& cfg, const Model& m);

struct Trajectory {
    SolverConfig config;
    std::shared_ptr<const Model> model;
    PeriodicField initial;
    EnergyReport initial_energy;
    double mp_bound = 0.5;  // max(‖u0 − 1/2‖_∞, 1/2)
    std::vector<StepRecord> records;
    std::map<long, PeriodicField> snapshots;

    long steps() const { return static_cast<long>(records.size()); }
    double time(long k) const { return static_cast<double>(k) * config.h; }
    bool has_snapshot(long k) const { return snapshots.count(k) != 0; }
    const PeriodicField& snapshot(long k) const;
    double dissipation_sum() const;
};

using StepObserver = std::function<void(const StepRecord&, const PeriodicField&)>;

// Runs until t_end, asserting energy monotonicity, the maximum principle and
// the per-step dissipation inequality after every step.
Trajectory run(const PeriodicField& u0, const SolverConfig& cfg, const Model& m, const StepObserver& observer = {});

// Θ((r0 − σ°(x − c))/ε).
PeriodicField initial_wulff(const Anisotropy& a, const Profile& prof, const Vec& center, double r0, double eps,
                            const Grid& grid);

// Slab {|x_axis − c| < w} with two planar interfaces of normal ±e_axis:
// Θ((w − |x_axis − c|)/(εσ(e_axis))).
PeriodicField initial_planar(const Anisotropy& a, const Profile& prof, int axis, double center, double half_width,
                             double eps, const Grid& grid);

}  // namespace wulffflow
