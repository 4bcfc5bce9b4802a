#include "wulffflow/interface.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Geometry>
#include <fmt/format.h>

#include "wulffflow/errors.hpp"

namespace wulffflow {

namespace {

Vec interpolated_normal(const Grid& g, const VectorField& grad, const Vec& x, const Vec& fallback)
{
    Vec n(g.dim);
    for (int a = 0; a < g.dim; ++a) n(a) = -sample_linear(grad.comp[static_cast<std::size_t>(a)], x);
    const double len = n.norm();
    if (len > 1e-12 && std::isfinite(len)) return n / len;
    return fallback;
}

Vec lerp_crossing(const Vec& pa, const Vec& pb, double fa, double fb)
{
    const double t = fa / (fa - fb);
    return pa + t * (pb - pa);
}

void extract_1d(const PeriodicField& u, const VectorField& grad, Interface& out)
{
    const Grid& g = u.grid();
    const double h = g.dx();
    for (int i = 0; i < g.n; ++i) {
        const int ip = (i + 1) % g.n;
        const double fa = u[static_cast<std::size_t>(i)] - 0.5, fb = u[static_cast<std::size_t>(ip)] - 0.5;
        const bool ia = fa >= 0.0, ib = fb >= 0.0;
        if (ia == ib) continue;
        const Vec pa = vec({(i + 0.5) * h}), pb = vec({(i + 1.5) * h});
        Facet f;
        f.midpoint = lerp_crossing(pa, pb, fa, fb);
        f.normal = interpolated_normal(g, grad, f.midpoint, vec({ia ? 1.0 : -1.0}));
        f.weight = 1.0;
        out.facets.push_back(f);
    }
}

void extract_2d(const PeriodicField& u, const VectorField& grad, Interface& out)
{
    const Grid& g = u.grid();
    const double h = g.dx();
    const int n = g.n;
    struct Crossing {
        Vec p;
        bool in_to_out;
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int ci[4] = {i, i + 1, i + 1, i};
            const int cj[4] = {j, j, j + 1, j + 1};
            double f[4];
            bool in[4];
            Vec p[4];
            int count_in = 0;
            for (int c = 0; c < 4; ++c) {
                f[c] = u[g.flat({ci[c] % n, cj[c] % n, 0})] - 0.5;
                in[c] = f[c] >= 0.0;
                count_in += in[c];
                p[c] = vec({(ci[c] + 0.5) * h, (cj[c] + 0.5) * h});
            }
            if (count_in == 0 || count_in == 4) continue;
            Crossing cr[4];
            int m = 0;
            for (int e = 0; e < 4; ++e) {
                const int a = e, b = (e + 1) % 4;
                if (in[a] == in[b]) continue;
                cr[m++] = {lerp_crossing(p[a], p[b], f[a], f[b]), in[a]};
            }
            auto emit = [&](const Vec& A, const Vec& B) {
                const Vec d = B - A;
                const double len = d.norm();
                if (!(len > 1e-14 * h)) return;
                Facet fc;
                fc.midpoint = 0.5 * (A + B);
                fc.weight = len;
                fc.normal = interpolated_normal(g, grad, fc.midpoint, vec({d(1) / len, -d(0) / len}));
                out.facets.push_back(fc);
                out.segments.push_back({A, B});
            };
            if (m == 2) {
                if (cr[0].in_to_out)
                    emit(cr[0].p, cr[1].p);
                else
                    emit(cr[1].p, cr[0].p);
                continue;
            }
            // Saddle: the centre value decides whether the phase-1 corners connect.
            const bool joined = 0.25 * (f[0] + f[1] + f[2] + f[3]) >= 0.0;
            for (int k = 0; k < 4; ++k) {
                if (!cr[k].in_to_out) continue;
                const int partner = joined ? (k + 1) % 4 : (k + 3) % 4;
                emit(cr[k].p, cr[partner].p);
            }
        }
    }
}

void extract_3d(const PeriodicField& u, const VectorField& grad, Interface& out)
{
    const Grid& g = u.grid();
    const double h = g.dx();
    const int n = g.n;
    static const int tets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7}, {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double f[8];
                Vec p[8];
                int count_in = 0;
                for (int c = 0; c < 8; ++c) {
                    const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
                    f[c] = u[g.flat({(i + di) % n, (j + dj) % n, (k + dk) % n})] - 0.5;
                    count_in += f[c] >= 0.0;
                    p[c] = vec({(i + di + 0.5) * h, (j + dj + 0.5) * h, (k + dk + 0.5) * h});
                }
                if (count_in == 0 || count_in == 8) continue;
                for (const auto& t : tets) {
                    std::vector<int> ins, outs;
                    for (int v : t) (f[v] >= 0.0 ? ins : outs).push_back(v);
                    if (ins.empty() || outs.empty()) continue;
                    Vec cin = Vec::Zero(3), cout = Vec::Zero(3);
                    for (int v : ins) cin += p[v] / static_cast<double>(ins.size());
                    for (int v : outs) cout += p[v] / static_cast<double>(outs.size());
                    auto X = [&](int a, int b) { return lerp_crossing(p[a], p[b], f[a], f[b]); };
                    std::vector<std::array<Vec, 3>> tris;
                    if (ins.size() == 1)
                        tris.push_back({X(ins[0], outs[0]), X(ins[0], outs[1]), X(ins[0], outs[2])});
                    else if (outs.size() == 1)
                        tris.push_back({X(ins[0], outs[0]), X(ins[1], outs[0]), X(ins[2], outs[0])});
                    else {
                        const Vec q0 = X(ins[0], outs[0]), q1 = X(ins[0], outs[1]), q2 = X(ins[1], outs[1]),
                                  q3 = X(ins[1], outs[0]);
                        tris.push_back({q0, q1, q2});
                        tris.push_back({q0, q2, q3});
                    }
                    for (auto& tri : tris) {
                        Eigen::Vector3d e1 = (tri[1] - tri[0]), e2 = (tri[2] - tri[0]);
                        Eigen::Vector3d nrm = e1.cross(e2);
                        const double area = 0.5 * nrm.norm();
                        if (!(area > 1e-14 * h * h)) continue;
                        if (nrm.dot(Eigen::Vector3d(cout - cin)) < 0.0) {
                            std::swap(tri[1], tri[2]);
                            nrm = -nrm;
                        }
                        Facet fc;
                        fc.midpoint = (tri[0] + tri[1] + tri[2]) / 3.0;
                        fc.weight = area;
                        Vec geo = Vec(nrm / nrm.norm());
                        fc.normal = interpolated_normal(g, grad, fc.midpoint, geo);
                        out.facets.push_back(fc);
                        out.triangles.push_back(tri);
                    }
                }
            }
}

double point_segment_distance(const Vec& p, const Vec& a, const Vec& b)
{
    const Vec ab = b - a;
    const double l2 = ab.squaredNorm();
    double t = l2 > 0.0 ? (p - a).dot(ab) / l2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

}  // namespace

double Interface::measure() const
{
    double s = 0.0;
    for (const auto& f : facets) s += f.weight;
    return s;
}

Interface extract_interface(const PeriodicField& u)
{
    Interface out;
    out.dim = u.grid().dim;
    const VectorField grad = averaged_gradient(u);
    switch (out.dim) {
    case 1: extract_1d(u, grad, out); break;
    case 2: extract_2d(u, grad, out); break;
    default: extract_3d(u, grad, out); break;
    }
    return out;
}

double enclosed_measure(const Interface& iface, const Vec& center, double L)
{
    if (iface.dim == 2) {
        double s = 0.0;
        for (const auto& seg : iface.segments) {
            const Vec a = minimal_image(seg[0], center, L);
            const Vec b = a + (seg[1] - seg[0]);
            s += 0.5 * (a(0) * b(1) - a(1) * b(0));
        }
        return s;
    }
    if (iface.dim == 3) {
        double s = 0.0;
        for (const auto& tri : iface.triangles) {
            const Eigen::Vector3d a = minimal_image(tri[0], center, L);
            const Eigen::Vector3d b = a + Eigen::Vector3d(tri[1] - tri[0]);
            const Eigen::Vector3d c = a + Eigen::Vector3d(tri[2] - tri[0]);
            s += a.dot(b.cross(c)) / 6.0;
        }
        return s;
    }
    throw InputError("enclosed_measure: d = 1 has no enclosed measure");
}

double hausdorff_distance(const Interface& iface, const std::vector<Vec>& reference, const Vec& center, double L)
{
    if (iface.dim != 2) throw InputError("hausdorff_distance: only d = 2 is supported");
    if (iface.segments.empty() || reference.size() < 2) return std::numeric_limits<double>::infinity();
    std::vector<std::array<Vec, 2>> segs;
    segs.reserve(iface.segments.size());
    for (const auto& s : iface.segments) {
        const Vec a = minimal_image(s[0], center, L);
        segs.push_back({a, Vec(a + (s[1] - s[0]))});
    }
    std::vector<Vec> ref;
    ref.reserve(reference.size());
    for (const auto& r : reference) ref.push_back(minimal_image(r, center, L));

    double d_ab = 0.0;
    for (const auto& s : segs)
        for (const Vec& p : {s[0], s[1]}) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < ref.size(); ++i)
                best = std::min(best, point_segment_distance(p, ref[i], ref[(i + 1) % ref.size()]));
            d_ab = std::max(d_ab, best);
        }
    double d_ba = 0.0;
    for (const Vec& p : ref) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : segs) best = std::min(best, point_segment_distance(p, s[0], s[1]));
        d_ba = std::max(d_ba, best);
    }
    return std::max(d_ab, d_ba);
}

}  // namespace wulffflow
