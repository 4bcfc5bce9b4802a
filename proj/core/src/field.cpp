#include "wulffflow/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <nlohmann/json.hpp>

#include "wulffflow/errors.hpp"
#include "wulffflow/parallel.hpp"

namespace wulffflow {

Grid::Grid(int d, int n_, double L) : dim(d), n(n_), length(L)
{
    if (d < 1 || d > 3) throw InputError(fmt::format("grid: dimension {} not in {{1,2,3}}", d));
    if (n_ < 2) throw InputError(fmt::format("grid: n = {} must be >= 2", n_));
    if (!(L > 0.0) || !std::isfinite(L)) throw InputError("grid: side length must be positive");
}

double Grid::cell_volume() const { return std::pow(dx(), dim); }

std::size_t Grid::size() const
{
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
    return s;
}

std::size_t Grid::stride(int axis) const
{
    std::size_t s = 1;
    for (int a = dim - 1; a > axis; --a) s *= static_cast<std::size_t>(n);
    return s;
}

std::array<int, 3> Grid::index(std::size_t k) const
{
    std::array<int, 3> idx{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
        idx[static_cast<std::size_t>(a)] = static_cast<int>(k % static_cast<std::size_t>(n));
        k /= static_cast<std::size_t>(n);
    }
    return idx;
}

std::size_t Grid::flat(const std::array<int, 3>& idx) const
{
    std::size_t k = 0;
    for (int a = 0; a < dim; ++a) {
        int i = idx[static_cast<std::size_t>(a)] % n;
        if (i < 0) i += n;
        k = k * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
    }
    return k;
}

Vec Grid::center(std::size_t k) const
{
    const auto idx = index(k);
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x(a) = (idx[static_cast<std::size_t>(a)] + 0.5) * dx();
    return x;
}

PeriodicField::PeriodicField(const Grid& g, double value) : grid_(g), data_(g.size(), value) {}

PeriodicField::PeriodicField(const Grid& g, std::vector<double> data) : grid_(g), data_(std::move(data))
{
    if (data_.size() != g.size())
        throw InputError(fmt::format("field: data length {} != n^d = {}", data_.size(), g.size()));
}

bool PeriodicField::all_finite() const
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

VectorField::VectorField(const Grid& g) : grid(g), comp(static_cast<std::size_t>(g.dim), PeriodicField(g)) {}

void forward_diff_axis(const Grid& g, const double* u, double* out, int axis, double scale)
{
    const std::size_t n = static_cast<std::size_t>(g.n);
    const std::size_t inner = g.stride(axis);
    const std::size_t outer = g.size() / (n * inner);
    for (std::size_t o = 0; o < outer; ++o) {
        const std::size_t base = o * n * inner;
        if (inner == 1) {
            const double* a = u + base;
            double* r = out + base;
            for (std::size_t i = 0; i + 1 < n; ++i) r[i] = (a[i + 1] - a[i]) * scale;
            r[n - 1] = (a[0] - a[n - 1]) * scale;
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ip = (i + 1 == n) ? 0 : i + 1;
            const double* a0 = u + base + i * inner;
            const double* a1 = u + base + ip * inner;
            double* r = out + base + i * inner;
            for (std::size_t j = 0; j < inner; ++j) r[j] = (a1[j] - a0[j]) * scale;
        }
    }
}

void backward_diff_axis_add(const Grid& g, const double* P, double* out, int axis, double scale)
{
    const std::size_t n = static_cast<std::size_t>(g.n);
    const std::size_t inner = g.stride(axis);
    const std::size_t outer = g.size() / (n * inner);
    for (std::size_t o = 0; o < outer; ++o) {
        const std::size_t base = o * n * inner;
        if (inner == 1) {
            const double* a = P + base;
            double* r = out + base;
            r[0] += (a[0] - a[n - 1]) * scale;
            for (std::size_t i = 1; i < n; ++i) r[i] += (a[i] - a[i - 1]) * scale;
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t im = (i == 0) ? n - 1 : i - 1;
            const double* a0 = P + base + i * inner;
            const double* a1 = P + base + im * inner;
            double* r = out + base + i * inner;
            for (std::size_t j = 0; j < inner; ++j) r[j] += (a0[j] - a1[j]) * scale;
        }
    }
}

VectorField forward_gradient(const PeriodicField& u)
{
    const Grid& g = u.grid();
    VectorField out(g);
    for (int a = 0; a < g.dim; ++a)
        forward_diff_axis(g, u.data(), out.comp[static_cast<std::size_t>(a)].data(), a, 1.0 / g.dx());
    return out;
}

PeriodicField neg_adjoint_divergence(const VectorField& F)
{
    const Grid& g = F.grid;
    if (static_cast<int>(F.comp.size()) != g.dim) throw InputError("divergence: component count != dimension");
    for (const auto& c : F.comp)
        if (c.grid() != g) throw InputError("divergence: component grids are not congruent");
    PeriodicField out(g);
    for (int a = 0; a < g.dim; ++a)
        backward_diff_axis_add(g, F.comp[static_cast<std::size_t>(a)].data(), out.data(), a, 1.0 / g.dx());
    return out;
}

double integrate(const PeriodicField& u)
{
    const double* d = u.data();
    const double s = blocked_sum(u.size(), [&](std::size_t b, std::size_t e) { return pairwise_sum(d + b, e - b); });
    return u.grid().cell_volume() * s;
}

double linf_center_distance(const PeriodicField& u)
{
    double m = 0.0;
    for (double v : u.values()) m = std::max(m, std::abs(v - 0.5));
    return m;
}

namespace {

// Index of the neighbour m cells away along `axis`.
inline std::size_t neighbour(const Grid& g, std::size_t k, int axis, int m)
{
    const std::size_t s = g.stride(axis);
    const long n = g.n;
    const long i = static_cast<long>((k / s) % static_cast<std::size_t>(n));
    long j = (i + m) % n;
    if (j < 0) j += n;
    return static_cast<std::size_t>(static_cast<long>(k) + (j - i) * static_cast<long>(s));
}

}  // namespace

VectorField cell_gradient(const PeriodicField& u)
{
    const Grid& g = u.grid();
    VectorField out(g);
    const double c = 1.0 / (12.0 * g.dx());
    for (int a = 0; a < g.dim; ++a) {
        double* r = out.comp[static_cast<std::size_t>(a)].data();
        parallel_blocks(g.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k)
                r[k] = c * (-u[neighbour(g, k, a, 2)] + 8.0 * u[neighbour(g, k, a, 1)] - 8.0 * u[neighbour(g, k, a, -1)] +
                            u[neighbour(g, k, a, -2)]);
        });
    }
    return out;
}

VectorField averaged_gradient(const PeriodicField& u)
{
    const Grid& g = u.grid();
    VectorField out(g);
    const double c = 0.5 / g.dx();
    for (int a = 0; a < g.dim; ++a) {
        double* r = out.comp[static_cast<std::size_t>(a)].data();
        for (std::size_t k = 0; k < g.size(); ++k) r[k] = c * (u[neighbour(g, k, a, 1)] - u[neighbour(g, k, a, -1)]);
    }
    return out;
}

double sample_linear(const Grid& g, const double* data, const Vec& x)
{
    const double h = g.dx();
    int i0[3] = {0, 0, 0};
    double t[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim; ++a) {
        const double s = x(a) / h - 0.5;
        const double f = std::floor(s);
        t[a] = s - f;
        long i = static_cast<long>(f) % g.n;
        if (i < 0) i += g.n;
        i0[a] = static_cast<int>(i);
    }
    double v = 0.0;
    const int corners = 1 << g.dim;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::array<int, 3> idx{0, 0, 0};
        for (int a = 0; a < g.dim; ++a) {
            const int bit = (c >> a) & 1;
            w *= bit ? t[a] : 1.0 - t[a];
            idx[static_cast<std::size_t>(a)] = (i0[a] + bit) % g.n;
        }
        if (w != 0.0) v += w * data[g.flat(idx)];
    }
    return v;
}

Vec minimal_image(const Vec& x, const Vec& c, double L)
{
    Vec d = x - c;
    for (Eigen::Index a = 0; a < d.size(); ++a) d(a) -= L * std::round(d(a) / L);
    return d;
}

PeriodicField shift(const PeriodicField& u, const std::array<int, 3>& by)
{
    const Grid& g = u.grid();
    PeriodicField out(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        auto idx = g.index(k);
        for (int a = 0; a < g.dim; ++a) idx[static_cast<std::size_t>(a)] += by[static_cast<std::size_t>(a)];
        out[g.flat(idx)] = u[k];
    }
    return out;
}

namespace {

std::uint64_t to_little(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    return r;
}

}  // namespace

std::string write_snapshot(const std::string& dir, long step, const PeriodicField& u, double time, double eps)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path bin = fs::path(dir) / fmt::format("snap_{}.f64", step);
    const fs::path side = fs::path(dir) / fmt::format("snap_{}.json", step);
    {
        std::ofstream os(bin, std::ios::binary);
        if (!os) throw InputError(fmt::format("cannot write snapshot {}", bin.string()));
        std::vector<std::uint64_t> buf(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) buf[k] = to_little(std::bit_cast<std::uint64_t>(u[k]));
        os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 8));
    }
    nlohmann::json j = {{"dims", u.grid().dim}, {"n", u.grid().n},   {"L", u.grid().length},
                        {"time", time},         {"epsilon", eps},    {"step", step}};
    std::ofstream js(side);
    js << j.dump(2) << "\n";
    return bin.string();
}

PeriodicField read_snapshot(const std::string& path, SnapshotMeta* meta)
{
    namespace fs = std::filesystem;
    fs::path p(path);
    fs::path bin = p, side = p;
    bin.replace_extension(".f64");
    side.replace_extension(".json");
    std::ifstream js(side);
    if (!js) throw InputError(fmt::format("snapshot sidecar {} not found", side.string()));
    nlohmann::json j;
    try {
        js >> j;
    } catch (const std::exception& e) {
        throw InputError(fmt::format("snapshot sidecar {}: {}", side.string(), e.what()));
    }
    SnapshotMeta m;
    try {
        m.dims = j.at("dims").get<int>();
        m.n = j.at("n").get<int>();
        m.L = j.at("L").get<double>();
        m.time = j.value("time", 0.0);
        m.epsilon = j.value("epsilon", 0.0);
        m.step = j.value("step", 0L);
    } catch (const std::exception& e) {
        throw InputError(fmt::format("snapshot sidecar {}: {}", side.string(), e.what()));
    }
    Grid g(m.dims, m.n, m.L);
    std::ifstream is(bin, std::ios::binary);
    if (!is) throw InputError(fmt::format("snapshot data {} not found", bin.string()));
    std::vector<std::uint64_t> buf(g.size());
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 8));
    if (is.gcount() != static_cast<std::streamsize>(buf.size() * 8))
        throw InputError(fmt::format("snapshot {} is truncated", bin.string()));
    std::vector<double> data(g.size());
    for (std::size_t k = 0; k < data.size(); ++k) data[k] = std::bit_cast<double>(to_little(buf[k]));
    PeriodicField u(g, std::move(data));
    if (!u.all_finite()) throw InputError(fmt::format("snapshot {} contains non-finite values", bin.string()));
    if (meta) *meta = m;
    return u;
}

}  // namespace wulffflow
