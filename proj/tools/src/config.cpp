#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "wulffflow/errors.hpp"

namespace wulffflow::cli {

namespace {

class Schema {
public:
    explicit Schema(std::string origin) : origin_(std::move(origin)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& key, const std::string& msg) const
    {
        const YAML::Mark m = at.Mark();
        if (m.is_null()) throw ConfigError(fmt::format("{}: {}: {}", origin_, key, msg));
        throw ConfigError(fmt::format("{}:{}:{}: {}: {}", origin_, m.line + 1, m.column + 1, key, msg));
    }

    void require_map(const YAML::Node& n, const std::string& key) const
    {
        if (!n.IsMap()) fail(n, key, "expected a mapping");
    }

    void allow_keys(const YAML::Node& n, const std::string& key, const std::set<std::string>& allowed) const
    {
        for (const auto& kv : n) {
            const auto k = kv.first.as<std::string>();
            if (!allowed.count(k)) {
                std::string list;
                for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
                fail(kv.first, key.empty() ? k : key + "." + k, fmt::format("unknown key (allowed: {})", list));
            }
        }
    }

    template <class T>
    T scalar(const YAML::Node& n, const std::string& key) const
    {
        if (!n.IsScalar()) fail(n, key, "expected a scalar");
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, key, fmt::format("cannot convert '{}'", n.Scalar()));
        }
    }

    std::vector<double> reals(const YAML::Node& n, const std::string& key) const
    {
        if (!n.IsSequence()) fail(n, key, "expected a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < n.size(); ++i) out.push_back(scalar<double>(n[i], fmt::format("{}[{}]", key, i)));
        return out;
    }

private:
    std::string origin_;
};

AnisotropySpec parse_anisotropy(const Schema& s, const YAML::Node& n, const std::string& key)
{
    AnisotropySpec a;
    if (n.IsScalar()) {
        a.kind = s.scalar<std::string>(n, key);
        if (a.kind != "euclidean") s.fail(n, key, "only 'euclidean' may be given as a bare string");
        return a;
    }
    s.require_map(n, key);
    s.allow_keys(n, key, {"kind", "q", "matrices"});
    if (!n["kind"]) s.fail(n, key + ".kind", "missing");
    a.kind = s.scalar<std::string>(n["kind"], key + ".kind");
    if (a.kind == "euclidean") return a;
    if (a.kind != "bgn") s.fail(n["kind"], key + ".kind", "expected 'euclidean' or 'bgn'");
    if (n["q"]) a.q = s.scalar<double>(n["q"], key + ".q");
    if (!n["matrices"] || !n["matrices"].IsSequence() || n["matrices"].size() == 0)
        s.fail(n, key + ".matrices", "bgn needs a non-empty list of matrices");
    const YAML::Node& ms = n["matrices"];
    for (std::size_t l = 0; l < ms.size(); ++l) {
        const std::string mk = fmt::format("{}.matrices[{}]", key, l);
        const YAML::Node& m = ms[l];
        if (!m.IsSequence()) s.fail(m, mk, "expected a row-major list");
        std::vector<double> flat;
        if (m.size() > 0 && m[0].IsSequence()) {
            for (std::size_t i = 0; i < m.size(); ++i) {
                const auto row = s.reals(m[i], fmt::format("{}[{}]", mk, i));
                flat.insert(flat.end(), row.begin(), row.end());
            }
        } else {
            flat = s.reals(m, mk);
        }
        a.matrices.push_back(flat);
    }
    return a;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(fmt::format("{}:{}:{}: syntax error: {}", origin, e.mark.line + 1, e.mark.column + 1, e.msg));
    }
    const Schema s(origin);
    if (!root.IsMap()) throw ConfigError(fmt::format("{}: top level must be a mapping", origin));
    s.allow_keys(root, "",
                 {"anisotropy", "mobility", "well", "scenario", "grid", "eps", "eps_list", "theta_h", "t_end",
                  "snapshot_every", "output_dir", "diagnostics", "calibration", "solver"});

    RunConfig c;
    c.origin = origin;
    if (root["anisotropy"]) c.sigma = parse_anisotropy(s, root["anisotropy"], "anisotropy");
    if (root["mobility"]) {
        const YAML::Node& m = root["mobility"];
        if (m.IsScalar() && m.Scalar() == "same-as-sigma")
            c.mobility.reset();
        else
            c.mobility = parse_anisotropy(s, m, "mobility");
    }
    if (root["well"]) {
        const YAML::Node& w = root["well"];
        if (w.IsScalar()) {
            c.well.name = s.scalar<std::string>(w, "well");
            if (c.well.name != "standard36") s.fail(w, "well", "unknown well (expected 'standard36')");
        } else {
            s.require_map(w, "well");
            s.allow_keys(w, "well", {"coefficients"});
            c.well.name = "polynomial";
            if (!w["coefficients"]) s.fail(w, "well.coefficients", "missing");
            c.well.coefficients = s.reals(w["coefficients"], "well.coefficients");
        }
    }

    if (root["grid"]) {
        const YAML::Node& g = root["grid"];
        s.require_map(g, "grid");
        s.allow_keys(g, "grid", {"d", "n", "L", "n_list"});
        if (g["d"]) c.d = s.scalar<int>(g["d"], "grid.d");
        if (g["n"]) c.n = s.scalar<int>(g["n"], "grid.n");
        if (g["L"]) c.L = s.scalar<double>(g["L"], "grid.L");
        if (g["n_list"]) {
            for (double v : s.reals(g["n_list"], "grid.n_list")) c.n_list.push_back(static_cast<int>(v));
        }
        if (c.d < 1 || c.d > 3) s.fail(g["d"], "grid.d", "must be 1, 2 or 3");
        if (c.n < 4) s.fail(g["n"] ? g["n"] : g, "grid.n", "must be >= 4");
        if (!(c.L > 0.0)) s.fail(g["L"], "grid.L", "must be positive");
    }

    if (root["scenario"]) {
        const YAML::Node& sc = root["scenario"];
        s.require_map(sc, "scenario");
        s.allow_keys(sc, "scenario", {"wulff", "planar", "snapshot", "constant"});
        if (sc.size() != 1) s.fail(sc, "scenario", "exactly one of wulff, planar, snapshot, constant");
        const auto kind = sc.begin()->first.as<std::string>();
        const YAML::Node& b = sc.begin()->second;
        const std::string key = "scenario." + kind;
        s.require_map(b, key);
        if (kind == "wulff") {
            s.allow_keys(b, key, {"center", "r0"});
            c.scenario.kind = ScenarioKind::wulff;
            if (b["center"]) c.scenario.center = s.reals(b["center"], key + ".center");
            if (b["r0"]) c.scenario.r0 = s.scalar<double>(b["r0"], key + ".r0");
            if (!(c.scenario.r0 > 0.0)) s.fail(b["r0"], key + ".r0", "must be positive");
        } else if (kind == "planar") {
            s.allow_keys(b, key, {"normal", "center", "half_width"});
            c.scenario.kind = ScenarioKind::planar;
            if (b["normal"]) {
                const YAML::Node& nn = b["normal"];
                if (nn.IsScalar()) {
                    c.scenario.axis = s.scalar<int>(nn, key + ".normal");
                } else {
                    const auto v = s.reals(nn, key + ".normal");
                    int nonzero = 0;
                    for (std::size_t i = 0; i < v.size(); ++i)
                        if (v[i] != 0.0) {
                            ++nonzero;
                            c.scenario.axis = static_cast<int>(i);
                        }
                    if (nonzero != 1) s.fail(nn, key + ".normal", "must be a coordinate axis");
                }
            }
            if (b["center"]) c.scenario.plane_center = s.scalar<double>(b["center"], key + ".center");
            if (b["half_width"]) c.scenario.half_width = s.scalar<double>(b["half_width"], key + ".half_width");
        } else if (kind == "snapshot") {
            s.allow_keys(b, key, {"path"});
            c.scenario.kind = ScenarioKind::snapshot;
            if (!b["path"]) s.fail(b, key + ".path", "missing");
            c.scenario.path = s.scalar<std::string>(b["path"], key + ".path");
        } else {
            s.allow_keys(b, key, {"value"});
            c.scenario.kind = ScenarioKind::constant;
            if (b["value"]) c.scenario.value = s.scalar<double>(b["value"], key + ".value");
        }
    }
    if (c.scenario.kind == ScenarioKind::wulff) {
        if (c.scenario.center.empty()) c.scenario.center.assign(static_cast<std::size_t>(c.d), 0.5 * c.L);
        if (static_cast<int>(c.scenario.center.size()) != c.d)
            s.fail(root["scenario"], "scenario.wulff.center", fmt::format("needs {} coordinates", c.d));
    }
    if (c.scenario.kind == ScenarioKind::planar && (c.scenario.axis < 0 || c.scenario.axis >= c.d))
        s.fail(root["scenario"], "scenario.planar.normal", "axis out of range");

    if (root["eps"] && root["eps_list"]) s.fail(root["eps_list"], "eps_list", "give either eps or eps_list");
    if (root["eps"]) c.eps_list = {s.scalar<double>(root["eps"], "eps")};
    if (root["eps_list"]) c.eps_list = s.reals(root["eps_list"], "eps_list");
    for (double e : c.eps_list)
        if (!(e > 0.0)) s.fail(root["eps"] ? root["eps"] : root["eps_list"], "eps", "must be positive");
    if (!c.n_list.empty() && c.n_list.size() != c.eps_list.size())
        s.fail(root["grid"]["n_list"], "grid.n_list", "needs one entry per eps");

    if (root["theta_h"]) c.theta_h = s.scalar<double>(root["theta_h"], "theta_h");
    if (!(c.theta_h > 0.0 && c.theta_h < 1.0)) s.fail(root["theta_h"], "theta_h", "must lie in (0, 1)");
    if (root["t_end"]) c.t_end = s.scalar<double>(root["t_end"], "t_end");
    if (!(c.t_end >= 0.0)) s.fail(root["t_end"], "t_end", "must be >= 0");
    if (root["snapshot_every"]) c.snapshot_every = s.scalar<int>(root["snapshot_every"], "snapshot_every");
    if (c.snapshot_every < 0) s.fail(root["snapshot_every"], "snapshot_every", "must be >= 0");
    if (root["output_dir"]) c.output_dir = s.scalar<std::string>(root["output_dir"], "output_dir");

    if (root["diagnostics"]) {
        const YAML::Node& d = root["diagnostics"];
        if (d.IsScalar()) {
            c.diagnostics.enabled = s.scalar<bool>(d, "diagnostics");
        } else {
            s.require_map(d, "diagnostics");
            s.allow_keys(d, "diagnostics", {"enabled", "velocity", "curvature", "entropy", "interface_dump"});
            if (d["enabled"]) c.diagnostics.enabled = s.scalar<bool>(d["enabled"], "diagnostics.enabled");
            if (d["velocity"]) c.diagnostics.velocity = s.scalar<bool>(d["velocity"], "diagnostics.velocity");
            if (d["curvature"]) c.diagnostics.curvature = s.scalar<bool>(d["curvature"], "diagnostics.curvature");
            if (d["entropy"]) c.diagnostics.entropy = s.scalar<bool>(d["entropy"], "diagnostics.entropy");
            if (d["interface_dump"])
                c.diagnostics.interface_dump = s.scalar<bool>(d["interface_dump"], "diagnostics.interface_dump");
        }
    }
    if (root["calibration"]) {
        const YAML::Node& k = root["calibration"];
        if (k.IsScalar()) {
            c.calibration.enabled = c.calibration.explicitly_enabled = s.scalar<bool>(k, "calibration");
        } else {
            s.require_map(k, "calibration");
            s.allow_keys(k, "calibration", {"enabled", "delta", "horizon", "n_angles", "n_layers", "n_bulk", "times"});
            c.calibration.enabled = k["enabled"] ? s.scalar<bool>(k["enabled"], "calibration.enabled") : true;
            c.calibration.explicitly_enabled = c.calibration.enabled;
            if (k["delta"]) c.calibration.delta = s.scalar<double>(k["delta"], "calibration.delta");
            if (k["horizon"]) c.calibration.horizon = s.scalar<double>(k["horizon"], "calibration.horizon");
            if (k["n_angles"]) c.calibration.n_angles = s.scalar<int>(k["n_angles"], "calibration.n_angles");
            if (k["n_layers"]) c.calibration.n_layers = s.scalar<int>(k["n_layers"], "calibration.n_layers");
            if (k["n_bulk"]) c.calibration.n_bulk = s.scalar<int>(k["n_bulk"], "calibration.n_bulk");
            if (k["times"]) c.calibration.times = s.reals(k["times"], "calibration.times");
        }
    }
    if (root["solver"]) {
        const YAML::Node& so = root["solver"];
        s.require_map(so, "solver");
        s.allow_keys(so, "solver", {"tol_grad", "max_inner_iters", "lbfgs_memory"});
        if (so["tol_grad"]) c.tol_grad = s.scalar<double>(so["tol_grad"], "solver.tol_grad");
        if (so["max_inner_iters"]) c.max_inner_iters = s.scalar<int>(so["max_inner_iters"], "solver.max_inner_iters");
        if (so["lbfgs_memory"]) c.lbfgs_memory = s.scalar<int>(so["lbfgs_memory"], "solver.lbfgs_memory");
    }

    // Semantic checks that need the full picture, reported at the owning key.
    try {
        make_anisotropy(c.sigma, c.d);
        if (c.mobility) make_anisotropy(*c.mobility, c.d);
    } catch (const Error& e) {
        s.fail(root["anisotropy"], "anisotropy", e.what());
    }
    try {
        make_well(c.well);
    } catch (const Error& e) {
        s.fail(root["well"], "well", e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

Anisotropy make_anisotropy(const AnisotropySpec& spec, int d)
{
    if (spec.kind == "euclidean") return Anisotropy::euclidean(d);
    std::vector<Mat> ms;
    for (const auto& flat : spec.matrices) {
        if (static_cast<int>(flat.size()) != d * d)
            throw InputError(fmt::format("matrix has {} entries, expected {} for d = {}", flat.size(), d * d, d));
        Mat G(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) G(i, j) = flat[static_cast<std::size_t>(i * d + j)];
        ms.push_back(G);
    }
    return Anisotropy::bgn(spec.q, std::move(ms));
}

DoubleWell make_well(const WellSpec& spec)
{
    if (spec.name == "standard36") return standard_well();
    return DoubleWell::from_coefficients(spec.coefficients);
}

}  // namespace wulffflow::cli
