#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "dnls/grid.hpp"
#include "dnls/ground_state.hpp"
#include "dnls/spline.hpp"

namespace dnls {

struct FunctionalReport {
    double mass = 0.0;
    double energy = 0.0;
    double action = 0.0;   // E + omega/2 M
    double k_gamma = 0.0;  // virial functional K_gamma = K^{1/2,1}
    double nehari = 0.0;   // I_{omega,gamma} = K^{1,0}
    double mu = 0.0;       // ||Q||^2_{Hdot1g} - ||u||^2_{Hdot1g}
};

namespace detail {
struct QuadBits {
    double grad2, q02, mass, lp1;
};
inline QuadBits quad_bits(const HalfLineGrid& g, const EvenField& u, double p) {
    check_field(g, u);
    auto du = derivative(g, u);
    QuadBits b;
    b.grad2 = integrate_fn(g, [&](std::size_t j) { return std::norm(du[j]); });
    b.q02 = std::norm(u[0]);
    b.mass = integrate_fn(g, [&](std::size_t j) { return std::norm(u[j]); });
    b.lp1 = integrate_fn(g, [&](std::size_t j) {
        return std::pow(std::norm(u[j]), (p + 1.0) / 2.0);
    });
    return b;
}
inline double kab_of(const QuadBits& b, const ModelParams& mp, double al, double be) {
    return (2.0 * al + be) / 2.0 * b.grad2 - al * mp.gamma * b.q02 +
           mp.omega * (2.0 * al - be) / 2.0 * b.mass -
           ((mp.p + 1.0) * al - be) / (mp.p + 1.0) * b.lp1;
}
inline double tab_of(const QuadBits& b, const ModelParams& mp, double al, double be) {
    const double p = mp.p, den = (p + 1.0) * al - be;
    if (den == 0.0) throw std::invalid_argument("T^{a,b} undefined: (p+1)a = b");
    return ((p - 1.0) * al - 2.0 * be) / (2.0 * den) * b.grad2 -
           mp.gamma * (p * al - be) / (2.0 * den) * b.q02 +
           (p - 1.0) * al / (2.0 * den) * mp.omega * b.mass;
}
} // namespace detail

inline double k_alpha_beta(const HalfLineGrid& g, const EvenField& u,
                           const ModelParams& mp, double al, double be) {
    return detail::kab_of(detail::quad_bits(g, u, mp.p), mp, al, be);
}

inline double t_alpha_beta(const HalfLineGrid& g, const EvenField& u,
                           const ModelParams& mp, double al, double be) {
    return detail::tab_of(detail::quad_bits(g, u, mp.p), mp, al, be);
}

// scalar route on the ground state (Euler-Maclaurin-corrected integrals)
inline double k_alpha_beta(const GroundState& gs, double al, double be) {
    detail::QuadBits b{gs.grad2, gs.q0 * gs.q0, gs.mass, gs.lp1};
    return detail::kab_of(b, gs.params, al, be);
}
inline double t_alpha_beta(const GroundState& gs, double al, double be) {
    detail::QuadBits b{gs.grad2, gs.q0 * gs.q0, gs.mass, gs.lp1};
    return detail::tab_of(b, gs.params, al, be);
}

inline double k_gamma(const HalfLineGrid& g, const EvenField& u, const ModelParams& mp) {
    return k_alpha_beta(g, u, mp, 0.5, 1.0);
}

inline FunctionalReport report(const HalfLineGrid& g, const EvenField& u,
                               const GroundState& gs) {
    const ModelParams& mp = gs.params;
    auto b = detail::quad_bits(g, u, mp.p);
    FunctionalReport r;
    r.mass = b.mass;
    const double h1g = b.grad2 - mp.gamma * b.q02;
    r.energy = 0.5 * h1g - b.lp1 / (mp.p + 1.0);
    r.action = r.energy + mp.omega / 2.0 * r.mass;
    r.k_gamma = detail::kab_of(b, mp, 0.5, 1.0);
    r.nehari = detail::kab_of(b, mp, 1.0, 0.0);
    r.mu = gs.h1g - h1g;
    return r;
}

inline FunctionalReport report(const HalfLineGrid& g, const EvenField& u,
                               const ModelParams& mp) {
    return report(g, u, ground_state(mp, g));
}

// Lemma-2.8-style decomposition: for u on the (ME) manifold and 0 < c < (p-5)/4,
// K_gamma(u) - c mu(u) = K^{1/2 - 2c/(p-1), 1}(u).  Returns both sides.
struct KMuSides {
    double lhs, rhs;
};
inline KMuSides k_mu_decomposition(const HalfLineGrid& g, const EvenField& u,
                                   const GroundState& gs, double c) {
    const ModelParams& mp = gs.params;
    if (!(c > 0.0 && c < (mp.p - 5.0) / 4.0))
        throw std::invalid_argument("c outside (0,(p-5)/4)");
    auto r = report(g, u, gs);
    const double me_tol = 1e-8;
    if (std::abs(r.mass - gs.mass) > me_tol * gs.mass ||
        std::abs(r.energy - gs.energy) > me_tol * std::max(1.0, std::abs(gs.energy)))
        throw std::invalid_argument("not on threshold manifold");
    KMuSides s;
    s.lhs = r.k_gamma - c * r.mu;
    s.rhs = k_alpha_beta(g, u, mp, 0.5 - 2.0 * c / (mp.p - 1.0), 1.0);
    return s;
}

// ---------------------------------------------------------------------------
// localized virial machinery

// Even C^2 cutoff: phi(x) = x^2 on |x|<=1, quintic-smoothstep blend down to 0
// at |x|=2.  phi'''' exists piecewise and is evaluated analytically.
namespace cutoff {
inline double smooth(double t) { return ((6.0 * t - 15.0) * t + 10.0) * t * t * t; }
inline double dsmooth(double t) { return ((30.0 * t - 60.0) * t + 30.0) * t * t; }
inline double d2smooth(double t) { return ((120.0 * t - 180.0) * t + 60.0) * t; }
inline double d3smooth(double t) { return (360.0 * t - 360.0) * t + 60.0; }
inline double d4smooth(double t) { return 720.0 * t - 360.0; }

inline double phi(double x) {
    x = std::abs(x);
    if (x <= 1.0) return x * x;
    if (x >= 2.0) return 0.0;
    return x * x * (1.0 - smooth(x - 1.0));
}
inline double dphi(double x) {
    const double s = (x < 0.0) ? -1.0 : 1.0;
    x = std::abs(x);
    if (x <= 1.0) return s * 2.0 * x;
    if (x >= 2.0) return 0.0;
    const double t = x - 1.0;
    return s * (2.0 * x * (1.0 - smooth(t)) - x * x * dsmooth(t));
}
inline double d2phi(double x) {
    x = std::abs(x);
    if (x <= 1.0) return 2.0;
    if (x >= 2.0) return 0.0;
    const double t = x - 1.0;
    return 2.0 * (1.0 - smooth(t)) - 4.0 * x * dsmooth(t) - x * x * d2smooth(t);
}
inline double d4phi(double x) {
    x = std::abs(x);
    if (x <= 1.0 || x >= 2.0) return 0.0;
    const double t = x - 1.0;
    return -12.0 * d2smooth(t) - 8.0 * x * d3smooth(t) - x * x * d4smooth(t);
}
} // namespace cutoff

struct VirialReport {
    double R = 0.0;
    double J_R = 0.0;   // localized variance
    double dJ_R = 0.0;  // its time derivative (momentum-type integral)
    double F_R = 0.0;   // second time derivative
    double A_R = 0.0;   // F_R - 8 K_gamma, from its own definition
};

inline VirialReport localized_virial(const HalfLineGrid& g, const EvenField& u,
                                     const ModelParams& mp, double R) {
    check_field(g, u);
    if (!(2.0 * R < g.L)) throw std::invalid_argument("cutoff exceeds domain");
    const double p = mp.p;
    auto du = derivative(g, u);
    VirialReport v;
    v.R = R;
    v.J_R = R * R * integrate_fn(g, [&](std::size_t j) {
        return cutoff::phi(g.x(j) / R) * std::norm(u[j]);
    });
    v.dJ_R = 2.0 * R * integrate_fn(g, [&](std::size_t j) {
        return cutoff::dphi(g.x(j) / R) * (std::conj(u[j]) * du[j]).imag();
    });
    double i_d2_grad = 0.0, i_d2_lp = 0.0, i_d4 = 0.0;
    double a_d2_grad = 0.0, a_d2_lp = 0.0;
    i_d2_grad = integrate_fn(g, [&](std::size_t j) {
        return cutoff::d2phi(g.x(j) / R) * std::norm(du[j]);
    });
    i_d2_lp = integrate_fn(g, [&](std::size_t j) {
        return cutoff::d2phi(g.x(j) / R) * std::pow(std::norm(u[j]), (p + 1.0) / 2.0);
    });
    i_d4 = integrate_fn(g, [&](std::size_t j) {
        return cutoff::d4phi(g.x(j) / R) * std::norm(u[j]);
    });
    a_d2_grad = integrate_fn(g, [&](std::size_t j) {
        return (cutoff::d2phi(g.x(j) / R) - 2.0) * std::norm(du[j]);
    });
    a_d2_lp = integrate_fn(g, [&](std::size_t j) {
        return (cutoff::d2phi(g.x(j) / R) - 2.0) * std::pow(std::norm(u[j]), (p + 1.0) / 2.0);
    });
    v.F_R = 4.0 * i_d2_grad - 4.0 * mp.gamma * std::norm(u[0]) -
            2.0 * (p - 1.0) / (p + 1.0) * i_d2_lp - i_d4 / (R * R);
    v.A_R = 4.0 * a_d2_grad - 2.0 * (p - 1.0) / (p + 1.0) * a_d2_lp - i_d4 / (R * R);
    return v;
}

// ---------------------------------------------------------------------------
// threshold-manifold data generator

struct ThresholdData {
    EvenField field;
    double lambda = 1.0;
    double sigma = 1.0;
    double k_gamma = 0.0;
    bool sign_attained = true;
    std::string message;
};

// u = lambda (Q + eps*direction)(sigma x), with (lambda,sigma) solved by 2D
// Newton so that the discrete M(u), E(u) match the ground state's to 1e-10
// relative.  `sign` picks the Newton seed branch: along the mass-preserving
// slice the two (ME) roots sit on either side of the action maximum, K > 0 on
// the small-sigma root and K < 0 on the large-sigma one.
inline ThresholdData generate_threshold_data(const EvenField& direction, double eps,
                                             int sign, const GroundState& gs) {
    const HalfLineGrid& g = gs.grid;
    const ModelParams& mp = gs.params;
    check_field(g, direction);
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");

    const std::size_t n = g.nodes();
    std::vector<double> vre(n), vim(n);
    bool zero_dir = true;
    for (std::size_t j = 0; j < n; ++j) {
        const cplx vj = cplx(gs.profile[j], 0.0) + eps * direction[j];
        vre[j] = vj.real();
        vim[j] = vj.imag();
        if (direction[j] != cplx(0.0, 0.0)) zero_dir = false;
    }
    ThresholdData out;
    if (zero_dir || eps == 0.0) {
        out.field = gs.field();
        out.k_gamma = k_gamma(g, out.field, mp);
        return out;
    }
    UniformSpline sre(vre, g.dx), sim(vim, g.dx);

    auto assemble = [&](double lam, double sig) {
        EvenField u(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double xs = sig * g.x(j);
            u[j] = lam * cplx(sre(xs), sim(xs));
        }
        return u;
    };
    auto constraints = [&](double lam, double sig) {
        EvenField u = assemble(lam, sig);
        auto b = detail::quad_bits(g, u, mp.p);
        const double E = 0.5 * (b.grad2 - mp.gamma * b.q02) - b.lp1 / (mp.p + 1.0);
        return std::pair<double, double>{(b.mass - gs.mass) / gs.mass,
                                         (E - gs.energy) / std::max(1.0, std::abs(gs.energy))};
    };

    double lam = 1.0, sig = (sign > 0) ? 0.88 : 1.12;
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
        auto [f1, f2] = constraints(lam, sig);
        if (std::abs(f1) < 1e-10 && std::abs(f2) < 1e-10) {
            converged = true;
            break;
        }
        const double dl = 1e-7, ds = 1e-7;
        auto [f1l, f2l] = constraints(lam + dl, sig);
        auto [f1s, f2s] = constraints(lam, sig + ds);
        const double a11 = (f1l - f1) / dl, a12 = (f1s - f1) / ds;
        const double a21 = (f2l - f2) / dl, a22 = (f2s - f2) / ds;
        const double det = a11 * a22 - a12 * a21;
        if (std::abs(det) < 1e-14) break;
        lam -= (a22 * f1 - a12 * f2) / det;
        sig -= (-a21 * f1 + a11 * f2) / det;
        if (!(lam > 0.0) || !(sig > 0.0)) break;
    }
    if (!converged) throw std::runtime_error("Newton failed");
    out.field = assemble(lam, sig);
    out.lambda = lam;
    out.sigma = sig;
    out.k_gamma = k_gamma(g, out.field, mp);
    if ((sign > 0 && out.k_gamma <= 0.0) || (sign < 0 && out.k_gamma >= 0.0)) {
        out.sign_attained = false;
        out.message = "requested K sign not attained";
    }
    return out;
}

} // namespace dnls
