#pragma once

#include <string>
#include <vector>

namespace wulffflow {

// Polynomial double well with wells at 0 and 1.
class DoubleWell {
public:
    // Coefficients in ascending powers; validated against the admissibility
    // assumptions (zeros at 0 and 1, positivity, W''>0 at the wells,
    // monotone outside [0,1]).
    static DoubleWell from_coefficients(std::vector<double> ascending);

    double operator()(double s) const;
    double derivative(double s) const;
    double second_derivative(double s) const;
    double sqrt_w(double s) const;

    // φ(z) = ∫_0^z √W for z in [0,1], constant outside.
    double phi(double z) const;

    // λ-convexity constant: max(0, −inf W'').
    double lambda() const { return lambda_; }
    double c0() const { return c0_; }
    bool is_standard() const { return standard_; }
    const std::vector<double>& coefficients() const { return coef_; }

private:
    DoubleWell() = default;
    std::vector<double> coef_, d1_, d2_;
    std::vector<double> quot_;  // W = s²(1−s)²·quot_
    double lambda_ = 0.0;
    double c0_ = 0.0;
    bool standard_ = false;
    std::vector<double> phi_table_;  // nodes of φ on [0,1] for non-standard wells
};

// W(s) = 36 s²(1−s)²: c0 = 1, λ = 36.
DoubleWell standard_well();

// ∫_0^1 √W by adaptive Gauss–Kronrod quadrature (absolute tolerance 1e-10).
double c0_of(const DoubleWell& w);

// Optimal 1-D profile Θ' = √W(Θ), Θ(0) = 1/2, tabulated on [−10, 10].
class Profile {
public:
    explicit Profile(const DoubleWell& w);

    double operator()(double z) const;
    double derivative(double z) const;

    double z_min() const { return -kRange; }
    double z_max() const { return kRange; }
    double step() const { return kStep; }
    const std::vector<double>& nodes() const { return z_; }
    const std::vector<double>& values() const { return v_; }
    const std::vector<double>& slopes() const { return dv_; }

    void write_csv(const std::string& path, int stride = 10) const;

    static constexpr double kRange = 10.0;
    static constexpr double kStep = 1e-3;

private:
    std::vector<double> z_, v_, dv_;
};

Profile profile(const DoubleWell& w);

}  // namespace wulffflow
