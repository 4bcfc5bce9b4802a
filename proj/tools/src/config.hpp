#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/potential.hpp"
#include "wulffflow/types.hpp"

namespace wulffflow::cli {

struct AnisotropySpec {
    std::string kind = "euclidean";
    double q = 2.0;
    std::vector<std::vector<double>> matrices;  // row-major d×d
};

struct WellSpec {
    std::string name = "standard36";
    std::vector<double> coefficients;  // ascending, when name == "polynomial"
};

enum class ScenarioKind { wulff, planar, snapshot, constant };

struct Scenario {
    ScenarioKind kind = ScenarioKind::wulff;
    std::vector<double> center;  // wulff
    double r0 = 0.3;
    int axis = 0;  // planar
    double plane_center = 0.5;
    double half_width = 0.25;
    std::string path;    // snapshot
    double value = 0.0;  // constant
};

struct DiagnosticsToggles {
    bool enabled = true;
    bool velocity = true;
    bool curvature = true;
    bool entropy = true;
    bool interface_dump = false;
};

struct CalibrationSpec {
    bool enabled = true;              // used whenever the reference flow exists
    bool explicitly_enabled = false;  // requested in the config: refusal is an error
    double delta = 0.0;    // 0: 0.2·r(T)
    double horizon = 0.0;  // 0: t_end (or half the extinction time without a run)
    int n_angles = 128;
    int n_layers = 24;
    int n_bulk = 40;
    std::vector<double> times;
};

struct RunConfig {
    std::string origin;
    AnisotropySpec sigma;
    std::optional<AnisotropySpec> mobility;  // empty: same as sigma
    WellSpec well;
    Scenario scenario;
    int d = 2;
    int n = 256;
    std::vector<int> n_list;  // converge: one grid size per eps
    double L = 1.0;
    std::vector<double> eps_list;
    double theta_h = 0.5;
    double t_end = 0.0;
    int snapshot_every = 0;
    std::string output_dir = "out";
    DiagnosticsToggles diagnostics;
    CalibrationSpec calibration;
    double tol_grad = 1e-9;
    int max_inner_iters = 10000;
    int lbfgs_memory = 8;
};

// Throws ConfigError("<origin>:<line>:<col>: <key>: <message>") on schema
// violations.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

Anisotropy make_anisotropy(const AnisotropySpec& spec, int d);
DoubleWell make_well(const WellSpec& spec);

}  // namespace wulffflow::cli
