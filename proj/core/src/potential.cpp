#include "wulffflow/potential.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fmt/format.h>
#include <fstream>

#include "wulffflow/errors.hpp"

namespace wulffflow {

namespace {

double horner(const std::vector<double>& c, double s)
{
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
    return v;
}

std::vector<double> differentiate(const std::vector<double>& c)
{
    std::vector<double> d;
    for (std::size_t i = 1; i < c.size(); ++i) d.push_back(static_cast<double>(i) * c[i]);
    if (d.empty()) d.push_back(0.0);
    return d;
}

// Real roots of a polynomial (ascending coefficients) via companion matrix.
std::vector<double> real_roots(std::vector<double> c)
{
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    const int m = static_cast<int>(c.size()) - 1;
    std::vector<double> out;
    if (m < 1) return out;
    if (m == 1) {
        out.push_back(-c[0] / c[1]);
        return out;
    }
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < m; ++i) C(i, m - 1) = -c[static_cast<std::size_t>(i)] / c.back();
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    for (int i = 0; i < m; ++i) {
        const auto z = es.eigenvalues()(i);
        if (std::abs(z.imag()) <= 1e-9 * std::max(1.0, std::abs(z.real()))) out.push_back(z.real());
    }
    return out;
}

// Quotient q and remainder r of c = s²(1−s)²·q + r, ascending coefficients.
std::pair<std::vector<double>, std::vector<double>> divide_by_wells(std::vector<double> c)
{
    const std::vector<double> d = {0.0, 0.0, 1.0, -2.0, 1.0};
    std::vector<double> q(c.size() - 4, 0.0);
    for (std::size_t k = q.size(); k-- > 0;) {
        q[k] = c[k + 4];
        for (std::size_t j = 0; j < d.size(); ++j) c[k + j] -= q[k] * d[j];
    }
    c.resize(4);
    return {q, c};
}

constexpr int kPhiNodes = 4096;

}  // namespace

DoubleWell DoubleWell::from_coefficients(std::vector<double> c)
{
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    for (double x : c)
        if (!std::isfinite(x)) throw InputError("double well: non-finite coefficient");
    const int deg = static_cast<int>(c.size()) - 1;
    if (deg < 4 || deg % 2 != 0 || c.back() <= 0.0)
        throw InputError("double well: W must be a polynomial of even degree >= 4 with positive leading coefficient");

    DoubleWell w;
    w.coef_ = c;
    w.d1_ = differentiate(c);
    w.d2_ = differentiate(w.d1_);

    const double scale = std::max(1.0, std::abs(c.back()));
    if (std::abs(horner(c, 0.0)) > 1e-12 * scale || std::abs(horner(c, 1.0)) > 1e-12 * scale)
        throw InputError("double well: W(0) and W(1) must vanish");
    // A nonnegative W with zeros at 0 and 1 has double zeros there; W is
    // evaluated as s²(1−s)²q(s) so that it keeps full relative accuracy next
    // to the wells (the expanded form cancels to ~1e-15 absolute).
    auto [q, rem] = divide_by_wells(c);
    for (double r : rem)
        if (std::abs(r) > 1e-12 * scale)
            throw InputError("double well: W must vanish to second order at 0 and 1 (W' = 0 at the wells)");
    w.quot_ = std::move(q);
    for (int i = 0; i <= 5000; ++i) {
        const double s = -2.0 + 5.0 * i / 5000.0;
        if (std::abs(s) < 1e-9 || std::abs(s - 1.0) < 1e-9) continue;
        if (!(w(s) > 0.0)) throw InputError(fmt::format("double well: W({}) = {} is not positive", s, w(s)));
        if (s < 0.0 && w.derivative(s) > 0.0) throw InputError("double well: W' must be <= 0 for s <= 0");
        if (s > 1.0 && w.derivative(s) < 0.0) throw InputError("double well: W' must be >= 0 for s >= 1");
    }
    if (!(w.second_derivative(0.0) > 0.0) || !(w.second_derivative(1.0) > 0.0))
        throw InputError("double well: W'' must be positive at both wells");

    // inf W'' over the reals: W'' has even degree and positive leading
    // coefficient, so the infimum is attained at a root of W'''.
    double min2 = std::numeric_limits<double>::infinity();
    for (double r : real_roots(differentiate(w.d2_))) min2 = std::min(min2, w.second_derivative(r));
    if (!std::isfinite(min2)) min2 = w.second_derivative(0.0);
    w.lambda_ = std::max(0.0, -min2);

    const std::vector<double> std36 = {0.0, 0.0, 36.0, -72.0, 36.0};
    w.standard_ = (c == std36);
    w.c0_ = w.standard_ ? 1.0 : c0_of(w);

    if (!w.standard_) {
        // Trapezoid-free tabulation: integrate √W exactly enough on fine cells.
        w.phi_table_.resize(kPhiNodes + 1);
        w.phi_table_[0] = 0.0;
        for (int i = 0; i < kPhiNodes; ++i) {
            const double a = static_cast<double>(i) / kPhiNodes, b = static_cast<double>(i + 1) / kPhiNodes;
            w.phi_table_[static_cast<std::size_t>(i) + 1] =
                w.phi_table_[static_cast<std::size_t>(i)] +
                boost::math::quadrature::gauss_kronrod<double, 15>::integrate([&](double s) { return w.sqrt_w(s); }, a, b, 0);
        }
    }
    return w;
}

double DoubleWell::operator()(double s) const
{
    const double b = s * (1.0 - s);
    return b * b * horner(quot_, s);
}
double DoubleWell::derivative(double s) const { return horner(d1_, s); }
double DoubleWell::second_derivative(double s) const { return horner(d2_, s); }
double DoubleWell::sqrt_w(double s) const { return std::abs(s * (1.0 - s)) * std::sqrt(std::max(0.0, horner(quot_, s))); }

double DoubleWell::phi(double z) const
{
    const double s = std::clamp(z, 0.0, 1.0);
    if (standard_) return s * s * (3.0 - 2.0 * s);
    // Cubic Hermite between table nodes with slopes √W.
    const double x = s * kPhiNodes;
    const int i = std::min(kPhiNodes - 1, static_cast<int>(x));
    const double t = x - i, hh = 1.0 / kPhiNodes;
    const double a = static_cast<double>(i) / kPhiNodes;
    const double p0 = phi_table_[static_cast<std::size_t>(i)], p1 = phi_table_[static_cast<std::size_t>(i) + 1];
    const double m0 = sqrt_w(a) * hh, m1 = sqrt_w(a + hh) * hh;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * m1;
}

DoubleWell standard_well() { return DoubleWell::from_coefficients({0.0, 0.0, 36.0, -72.0, 36.0}); }

double c0_of(const DoubleWell& w)
{
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double s) { return w.sqrt_w(s); }, 0.0, 1.0, 20, 1e-14, &err);
    if (!(err <= 1e-10) || !std::isfinite(v))
        throw NumericError(fmt::format("c0_of: quadrature did not reach 1e-10 (error estimate {:.3e})", err));
    return v;
}

Profile::Profile(const DoubleWell& w)
{
    const int m = static_cast<int>(std::lround(kRange / kStep));
    const std::size_t N = 2 * static_cast<std::size_t>(m) + 1;
    z_.resize(N);
    v_.resize(N);
    dv_.resize(N);
    auto rhs = [&](double th) { return w.sqrt_w(th); };
    auto rk4 = [&](double y, double hh) {
        const double k1 = rhs(y);
        const double k2 = rhs(y + 0.5 * hh * k1);
        const double k3 = rhs(y + 0.5 * hh * k2);
        const double k4 = rhs(y + hh * k3);
        return y + hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    };
    const std::size_t mid = static_cast<std::size_t>(m);
    v_[mid] = 0.5;
    for (std::size_t i = mid; i + 1 < N; ++i) v_[i + 1] = std::clamp(rk4(v_[i], kStep), v_[i], 1.0);
    for (std::size_t i = mid; i > 0; --i) v_[i - 1] = std::clamp(rk4(v_[i], -kStep), 0.0, v_[i]);
    for (std::size_t i = 0; i < N; ++i) {
        z_[i] = (static_cast<double>(i) - m) * kStep;
        dv_[i] = w.sqrt_w(v_[i]);
    }
}

double Profile::operator()(double z) const
{
    if (!(z > z_.front())) return v_.front();
    if (!(z < z_.back())) return v_.back();
    const double x = (z - z_.front()) / kStep;
    const std::size_t i = std::min(z_.size() - 2, static_cast<std::size_t>(x));
    const double t = x - static_cast<double>(i);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * v_[i] + (t3 - 2 * t2 + t) * kStep * dv_[i] + (-2 * t3 + 3 * t2) * v_[i + 1] +
           (t3 - t2) * kStep * dv_[i + 1];
}

double Profile::derivative(double z) const
{
    if (!(z > z_.front()) || !(z < z_.back())) return 0.0;
    const double x = (z - z_.front()) / kStep;
    const std::size_t i = std::min(z_.size() - 2, static_cast<std::size_t>(x));
    const double t = x - static_cast<double>(i);
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * v_[i] + (-6 * t2 + 6 * t) * v_[i + 1]) / kStep + (3 * t2 - 4 * t + 1) * dv_[i] +
           (3 * t2 - 2 * t) * dv_[i + 1];
}

void Profile::write_csv(const std::string& path, int stride) const
{
    std::ofstream os(path);
    if (!os) throw InputError(fmt::format("cannot open {} for writing", path));
    os << "z,theta\n";
    for (std::size_t i = 0; i < z_.size(); i += static_cast<std::size_t>(std::max(1, stride)))
        os << fmt::format("{:.6f},{:.17g}\n", z_[i], v_[i]);
}

Profile profile(const DoubleWell& w) { return Profile(w); }

}  // namespace wulffflow
