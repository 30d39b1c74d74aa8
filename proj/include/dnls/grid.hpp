#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dnls/model.hpp"

namespace dnls {

using cplx = std::complex<double>;
using RealField = std::vector<double>;

// Half-line grid [0,L] with N intervals, nodes x_j = j*dx.  Node 0 carries the
// Robin condition u'(0+) = -(gamma/2) u(0) (even reduction of the delta jump),
// node N homogeneous Dirichlet.  L must be large enough that exp(-sqrt(omega)*L)
// is below the truncation tolerance.
struct HalfLineGrid {
    double L = 0.0;
    std::size_t N = 0;
    double dx = 0.0;
    double robin = 0.0;   // -gamma/2
    ModelParams params{};

    std::size_t nodes() const { return N + 1; }
    double x(std::size_t j) const { return dx * static_cast<double>(j); }
    // trapezoid weight of node j (half-line)
    double w(std::size_t j) const { return (j == 0 || j == N) ? dx / 2.0 : dx; }

    bool same(const HalfLineGrid& o) const {
        return N == o.N && L == o.L && params.gamma == o.params.gamma &&
               params.omega == o.params.omega && params.p == o.params.p;
    }
};

inline constexpr double kTruncationTol = 1e-10;

inline HalfLineGrid make_grid(const ModelParams& params, double L, std::size_t N) {
    params.validate();
    if (!(L > 0.0))
        throw std::invalid_argument("L must be positive");
    if (N < 16)
        throw std::invalid_argument("N must be at least 16");
    if (std::exp(-std::sqrt(params.omega) * L) >= kTruncationTol)
        throw std::invalid_argument("domain too small: exp(-sqrt(omega)*L) exceeds truncation tolerance");
    HalfLineGrid g;
    g.L = L;
    g.N = N;
    g.dx = L / static_cast<double>(N);
    g.robin = params.robin_coeff();
    g.params = params;
    return g;
}

// Even complex field sampled at the grid nodes.  Represents its even extension
// to the full line: full-line integrals are twice the half-line trapezoid.
struct EvenField {
    std::vector<cplx> v;

    EvenField() = default;
    explicit EvenField(std::size_t n) : v(n, cplx(0.0, 0.0)) {}
    explicit EvenField(std::vector<cplx> vals) : v(std::move(vals)) {}
    explicit EvenField(const RealField& re) : v(re.size()) {
        for (std::size_t j = 0; j < re.size(); ++j) v[j] = cplx(re[j], 0.0);
    }

    std::size_t size() const { return v.size(); }
    cplx& operator[](std::size_t j) { return v[j]; }
    const cplx& operator[](std::size_t j) const { return v[j]; }

    RealField real() const {
        RealField r(v.size());
        for (std::size_t j = 0; j < v.size(); ++j) r[j] = v[j].real();
        return r;
    }
    RealField imag() const {
        RealField r(v.size());
        for (std::size_t j = 0; j < v.size(); ++j) r[j] = v[j].imag();
        return r;
    }
};

inline void check_field(const HalfLineGrid& g, const EvenField& u) {
    if (u.size() != g.nodes())
        throw std::invalid_argument("field/grid size mismatch");
}

// Full-line integral of an even integrand: twice the half-line trapezoid value.
// Exact for piecewise-linear integrands, second-order for smooth ones.
inline double integrate(const HalfLineGrid& g, const RealField& f) {
    if (f.size() != g.nodes())
        throw std::invalid_argument("field/grid size mismatch");
    double s = 0.5 * f.front() + 0.5 * f.back();
    for (std::size_t j = 1; j < g.N; ++j) s += f[j];
    return 2.0 * g.dx * s;
}

template <class F>
double integrate_fn(const HalfLineGrid& g, F&& fn) {
    double s = 0.5 * fn(std::size_t{0}) + 0.5 * fn(g.N);
    for (std::size_t j = 1; j < g.N; ++j) s += fn(j);
    return 2.0 * g.dx * s;
}

// Derivative samples: centered differences in the interior, the Robin relation
// at node 0, one-sided at node N (where fields are below truncation anyway).
inline std::vector<cplx> derivative(const HalfLineGrid& g, const EvenField& u) {
    check_field(g, u);
    const std::size_t n = g.nodes();
    std::vector<cplx> d(n);
    d[0] = -(g.params.gamma / 2.0) * u[0];
    for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (u[j + 1] - u[j - 1]) / (2.0 * g.dx);
    d[n - 1] = (u[n - 1] - u[n - 2]) / g.dx;
    return d;
}

inline RealField derivative(const HalfLineGrid& g, const RealField& u) {
    const std::size_t n = u.size();
    RealField d(n);
    d[0] = -(g.params.gamma / 2.0) * u[0];
    for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (u[j + 1] - u[j - 1]) / (2.0 * g.dx);
    d[n - 1] = (u[n - 1] - u[n - 2]) / g.dx;
    return d;
}

// (u,v)_{Hdot^1_gamma} = Re int u' conj(v') - gamma Re{u(0) conj(v(0))};
// with the omega weight this is (u,v)_{H^1_{omega,gamma}}.
inline double h1_gamma_quadratic(const HalfLineGrid& g, const EvenField& u,
                                 const EvenField& v, bool omega_weight = false) {
    check_field(g, u);
    check_field(g, v);
    if (u.size() != v.size())
        throw std::invalid_argument("field/grid size mismatch");
    auto du = derivative(g, u);
    auto dv = derivative(g, v);
    double s = integrate_fn(g, [&](std::size_t j) {
        return (du[j] * std::conj(dv[j])).real();
    });
    s -= g.params.gamma * (u[0] * std::conj(v[0])).real();
    if (omega_weight) {
        s += g.params.omega * integrate_fn(g, [&](std::size_t j) {
            return (u[j] * std::conj(v[j])).real();
        });
    }
    return s;
}

inline double h1_gamma_norm2(const HalfLineGrid& g, const EvenField& u,
                             bool omega_weight = false) {
    return h1_gamma_quadratic(g, u, u, omega_weight);
}

inline double l2_norm2(const HalfLineGrid& g, const EvenField& u) {
    check_field(g, u);
    return integrate_fn(g, [&](std::size_t j) { return std::norm(u[j]); });
}

inline double h1_norm(const HalfLineGrid& g, const EvenField& u) {
    auto du = derivative(g, u);
    double s = integrate_fn(g, [&](std::size_t j) { return std::norm(du[j]); });
    return std::sqrt(s + l2_norm2(g, u));
}

inline double sup_abs(const EvenField& u) {
    double m = 0.0;
    for (const auto& z : u.v) m = std::max(m, std::abs(z));
    return m;
}

// Discrete Delta_gamma: interior three-point stencil, ghost-eliminated Robin
// row at node 0, Dirichlet at node N.  (Delta_gamma u)_0 = 2(u1-u0)/dx^2 + (gamma/dx) u0.
template <class T>
std::vector<T> apply_lap_gamma(const HalfLineGrid& g, const std::vector<T>& u) {
    const std::size_t n = u.size();
    const double dx2 = g.dx * g.dx;
    std::vector<T> out(n);
    out[0] = 2.0 * (u[1] - u[0]) / dx2 + (g.params.gamma / g.dx) * u[0];
    for (std::size_t j = 1; j + 1 < n; ++j)
        out[j] = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / dx2;
    out[n - 1] = (u[n - 2] - 2.0 * u[n - 1]) / dx2;
    return out;
}

} // namespace dnls
