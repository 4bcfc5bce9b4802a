#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace wulffflow::cli {

struct GlobalOptions {
    std::string config;
    int jobs = 1;
    std::string out;  // overrides output_dir
    bool verbose = false;
};

// Least-squares fit of r² against t.
struct RadiusFit {
    double slope = 0.0;
    double intercept = 0.0;
    double expected_slope = 0.0;  // −2(d−1) for μ = σ, 0 when no law applies
    double rel_error = 0.0;       // |slope − expected| / |expected|
    double exponent = 0.0;        // fitted p in r ∝ (t_ext − t)^p
    long points = 0;
};

struct DiagnosticsRow {
    long step = 0;
    double t = 0.0;
    double equip_defect = 0.0;
    double sharp_energy = 0.0;
    double interface_length = 0.0;
    double eps_rel_entropy = 0.0;
    double rel_entropy = 0.0;
    double bulk_error = 0.0;
    double velocity_l2 = 0.0;
    double mcf_residual = 0.0;
    double curvature_residual = 0.0;
    double rel_entropy_cal = 0.0;
    double bulk_error_cal = 0.0;
    double vel_cross_term = 0.0;
    double gronwall_envelope = 0.0;
    double hausdorff = 0.0;
};

struct RadiusRow {
    long step = 0;
    double t = 0.0;
    double measure = 0.0;     // enclosed area/volume of the extracted interface
    double radius = 0.0;      // (measure/|W_σ|)^{1/d}
    double radius_ref = 0.0;  // √(r0² − 2(d−1)t), NaN past extinction or without a law
};

struct CaseResult {
    std::string dir;
    double eps = 0.0;
    int n = 0;
    double h = 0.0;
    long steps = 0;
    double energy_initial = 0.0;
    double energy_final = 0.0;
    double max_energy_increase = 0.0;     // max_n (E_n − E_{n−1})
    double min_dissipation_slack = 0.0;   // min_n 2hΔE − ‖δu‖²
    double min_max_principle_slack = 0.0;
    double mp_bound = 0.0;
    RadiusFit fit;
    std::vector<RadiusRow> radius;
    std::vector<DiagnosticsRow> diagnostics;
    double hausdorff_max = 0.0;  // NaN when not applicable
    int hausdorff_checkpoints = 0;
    bool calibrated = false;
    double c_fit = 0.0;
    std::optional<bool> gronwall_holds;
    nlohmann::json to_json() const;
};

// Grid size used for member i of eps_list: n_list[i] when given, otherwise
// n scaled so that ε/Δx stays at its value for the first member.
int member_grid_size(const RunConfig& c, std::size_t i);

// Runs member i of eps_list and writes run.csv, diagnostics.csv,
// radius.csv, snapshots/ and summary.json into `dir`.
CaseResult simulate_case(const RunConfig& c, std::size_t i, const std::string& dir);

struct ConvergeRow {
    double eps = 0.0;
    int n = 0;
    long step = 0;
    double t = 0.0;
    double equip_defect = 0.0;
    double mcf_residual = 0.0;
    double curvature_residual = 0.0;
    double radius_law_error = 0.0;  // |Δr − Δr_law|/t* over [0, t*]
};

struct ConvergeReport {
    std::vector<ConvergeRow> rows;
    std::vector<std::string> failing_columns;  // empty: every column strictly decreasing
};

// ε-refinement sweep: every member is run to the step nearest t_end and the
// diagnostics are evaluated there. Writes converge.csv into `dir`.
ConvergeReport converge_sweep(const RunConfig& c, const std::string& dir, int jobs);

int cmd_simulate(const GlobalOptions& g);
int cmd_converge(const GlobalOptions& g);
int cmd_calibrate_check(const GlobalOptions& g);
int cmd_anisotropy_report(const GlobalOptions& g);

// 0 ok, 2 config, 3 numeric/convergence, 4 invariant, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace wulffflow::cli
