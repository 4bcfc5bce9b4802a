#pragma once

#include <array>
#include <vector>

#include "wulffflow/field.hpp"

namespace wulffflow {

struct Facet {
    Vec midpoint;
    Vec normal;  // outer unit normal of the phase-1 region {u >= 1/2}
    double weight = 0.0;  // length (d=2), area (d=3), 1 (d=1)
};

// Discrete u = 1/2 level set. Positions are unwrapped: facets in the last
// layer of cells may lie just beyond L.
struct Interface {
    int dim = 2;
    std::vector<Facet> facets;
    std::vector<std::array<Vec, 2>> segments;   // d=2, phase 1 on the left
    std::vector<std::array<Vec, 3>> triangles;  // d=3, counter-clockwise seen from outside

    bool empty() const { return facets.empty(); }
    double measure() const;
};

// Marching squares (d=2), marching tetrahedra (d=3) or edge crossings (d=1)
// on u − 1/2 with linear edge interpolation. Normals are the normalized,
// multilinearly interpolated −∇u at facet midpoints.
Interface extract_interface(const PeriodicField& u);

// Signed area (d=2) or volume (d=3) enclosed by the interface, measured in
// minimal-image coordinates around `center`; positive for phase 1.
double enclosed_measure(const Interface& iface, const Vec& center, double L);

// Symmetric Hausdorff distance (d=2) between the extracted polyline and a
// closed reference polyline, both taken in minimal-image coordinates about
// `center`.
double hausdorff_distance(const Interface& iface, const std::vector<Vec>& reference, const Vec& center, double L);

}  // namespace wulffflow
