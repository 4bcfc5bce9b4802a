#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "wulffflow/types.hpp"

namespace wulffflow {

// Uniform cell-centred grid on the torus [0,L)^d, row-major with the last
// axis fastest. Cell k with multi-index (i_0..i_{d-1}) sits at (i_a + 1/2)Δx.
struct Grid {
    int dim = 2;
    int n = 64;
    double length = 1.0;

    Grid() = default;
    Grid(int d, int n_, double L = 1.0);

    double dx() const { return length / n; }
    double cell_volume() const;
    std::size_t size() const;
    std::size_t stride(int axis) const;
    std::array<int, 3> index(std::size_t k) const;
    std::size_t flat(const std::array<int, 3>& idx) const;
    Vec center(std::size_t k) const;

    bool operator==(const Grid& o) const { return dim == o.dim && n == o.n && length == o.length; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

class PeriodicField {
public:
    PeriodicField() = default;
    explicit PeriodicField(const Grid& g, double value = 0.0);
    PeriodicField(const Grid& g, std::vector<double> data);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return data_.size(); }
    double& operator[](std::size_t k) { return data_[k]; }
    double operator[](std::size_t k) const { return data_[k]; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool all_finite() const;

private:
    Grid grid_;
    std::vector<double> data_;
};

// d components on the forward-difference (staggered) positions: component
// a at cell k lives at x_k + Δx/2 e_a.
struct VectorField {
    Grid grid;
    std::vector<PeriodicField> comp;

    VectorField() = default;
    explicit VectorField(const Grid& g);
};

VectorField forward_gradient(const PeriodicField& u);
// Exact negative adjoint of forward_gradient: Σ∇u·F = −Σ u·divF.
PeriodicField neg_adjoint_divergence(const VectorField& F);

double integrate(const PeriodicField& u);
double linf_center_distance(const PeriodicField& u);

// Raw kernels on flat arrays (used by the energy).
void forward_diff_axis(const Grid& g, const double* u, double* out, int axis, double scale);
// out[k] += scale·(P[k] − P[k − e_a])
void backward_diff_axis_add(const Grid& g, const double* P, double* out, int axis, double scale);

// Cell-centred gradient by 4th-order centred differences.
VectorField cell_gradient(const PeriodicField& u);
// Cell-centred gradient by averaging the two adjacent forward differences
// (the 2nd-order centred difference).
VectorField averaged_gradient(const PeriodicField& u);

// Periodic multilinear interpolation of cell-centred data at position x.
double sample_linear(const Grid& g, const double* data, const Vec& x);
inline double sample_linear(const PeriodicField& u, const Vec& x) { return sample_linear(u.grid(), u.data(), x); }

// x − c reduced to the periodic cell (−L/2, L/2]^d.
Vec minimal_image(const Vec& x, const Vec& c, double L);

// Periodic translation by whole cells.
PeriodicField shift(const PeriodicField& u, const std::array<int, 3>& by);

struct SnapshotMeta {
    int dims = 0;
    int n = 0;
    double L = 1.0;
    double time = 0.0;
    double epsilon = 0.0;
    long step = 0;
};

// Writes <dir>/snap_<step>.f64 (little-endian f64, row-major) and the JSON
// sidecar <dir>/snap_<step>.json. Returns the .f64 path.
std::string write_snapshot(const std::string& dir, long step, const PeriodicField& u, double time, double eps);
// Accepts either file of the pair.
PeriodicField read_snapshot(const std::string& path, SnapshotMeta* meta = nullptr);

}  // namespace wulffflow
