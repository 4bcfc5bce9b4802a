#pragma once

#include <string>
#include <vector>

#include "wulffflow/anisotropy.hpp"

namespace wulffflow {

// One row of the anisotropy identity table. `max_abs_error` is the largest
// observed violation in the normalization named by `check`; `ok` compares it
// with `tolerance`.
struct IdentityCheck {
    std::string name;
    double max_abs_error = 0.0;
    long samples = 0;
    double tolerance = 0.0;
    bool ok = false;
};

// Homogeneity, Euler identity, polar duality (both σ°(Dσ(p)) = 1 and the
// numerical double polar), analytic-vs-finite-difference Dσ and D²σ, radial
// null space of D²σ, the duality supremum and the Dziuk sandwich. Seeded, so
// the table is reproducible.
std::vector<IdentityCheck> anisotropy_identities(const Anisotropy& a, unsigned long long seed = 20240611ULL);

// sup{q·η : σ°(η) ≤ 1} by direction sampling and pattern search.
double double_polar(const Anisotropy& a, const Vec& q);

}  // namespace wulffflow
