#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dnls/banded.hpp"
#include "dnls/functionals.hpp"
#include "dnls/grid.hpp"
#include "dnls/ground_state.hpp"
#include "dnls/linearized.hpp"

namespace dnls {

// Crank-Nicolson factors (I -+ i dt/2 Delta_gamma) as tridiagonal arrays.
struct CnOperator {
    double dt = 0.0;
    std::vector<cplx> a_lower, a_diag, a_upper;  // I - i dt/2 L
    std::vector<cplx> b_lower, b_diag, b_upper;  // I + i dt/2 L

    CnOperator() = default;
    CnOperator(const HalfLineGrid& g, double dt_) : dt(dt_) {
        const std::size_t n = g.nodes();
        const double dx2 = g.dx * g.dx;
        std::vector<double> diag(n, -2.0 / dx2), lower(n - 1, 1.0 / dx2),
            upper(n - 1, 1.0 / dx2);
        diag[0] += g.params.gamma / g.dx;
        upper[0] = 2.0 / dx2;
        const cplx z(0.0, dt / 2.0);
        a_diag.resize(n);
        b_diag.resize(n);
        a_lower.resize(n - 1);
        b_lower.resize(n - 1);
        a_upper.resize(n - 1);
        b_upper.resize(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            a_diag[j] = 1.0 - z * diag[j];
            b_diag[j] = 1.0 + z * diag[j];
        }
        for (std::size_t j = 0; j + 1 < n; ++j) {
            a_lower[j] = -z * lower[j];
            b_lower[j] = z * lower[j];
            a_upper[j] = -z * upper[j];
            b_upper[j] = z * upper[j];
        }
    }
};

// One Strang step: exact half-step of the nonlinear phase, Crank-Nicolson for
// the linear part, another half-step of the phase.  The phase substeps are
// exactly modulus-preserving; the CN substep is unitary in the trapezoid norm
// because Delta_gamma is W-self-adjoint.
inline EvenField step(const HalfLineGrid& g, const EvenField& u, double dt,
                      const CnOperator& cn) {
    check_field(g, u);
    const double p = g.params.p;
    const std::size_t n = u.size();
    std::vector<cplx> v(n), rhs(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double phase = dt / 2.0 * std::pow(std::norm(u[j]), (p - 1.0) / 2.0);
        v[j] = u[j] * cplx(std::cos(phase), std::sin(phase));
    }
    for (std::size_t j = 0; j < n; ++j) {
        cplx s = cn.b_diag[j] * v[j];
        if (j > 0) s += cn.b_lower[j - 1] * v[j - 1];
        if (j + 1 < n) s += cn.b_upper[j] * v[j + 1];
        rhs[j] = s;
    }
    v = thomas_solve(cn.a_lower, cn.a_diag, cn.a_upper, std::move(rhs));
    for (std::size_t j = 0; j < n; ++j) {
        const double phase = dt / 2.0 * std::pow(std::norm(v[j]), (p - 1.0) / 2.0);
        v[j] = v[j] * cplx(std::cos(phase), std::sin(phase));
    }
    return EvenField(std::move(v));
}

inline EvenField step(const HalfLineGrid& g, const EvenField& u, double dt) {
    if (dt == 0.0) throw std::invalid_argument("dt must be nonzero");
    return step(g, u, dt, CnOperator(g, dt));
}

// ---------------------------------------------------------------------------
// modulation decomposition u = e^{i theta + i omega t}(Q + rho Q + h)

struct Modulation {
    double theta = 0.0;
    double rho = 0.0;
    EvenField h;
    bool in_modulation = false;
    double orth_imQ = 0.0;  // Im int h Q
    double orth_reQp = 0.0; // Re int h Q^p
};

// Solves Im int (e^{-i theta} u - Q) Q dx = 0 by 1D Newton seeded at
// prev_theta, with the branch on which Re int e^{-i theta} u Q > 0.  Returns
// in_modulation=false outside the tube |mu(u)| < mu0 = 0.2 ||Q||^2_{Hdot1g}.
inline Modulation modulation_extract(const HalfLineGrid& g, const EvenField& u,
                                     const GroundState& gs,
                                     std::optional<double> prev_theta = {}) {
    check_field(g, u);
    Modulation m;
    const double mu = gs.h1g - h1_gamma_norm2(g, u);
    const double mu0 = 0.2 * gs.h1g;
    if (std::abs(mu) >= mu0) return m;

    // c = int u Q dx (complex, full line)
    cplx c(0.0, 0.0);
    {
        double cr = integrate_fn(g, [&](std::size_t j) { return u[j].real() * gs.profile[j]; });
        double ci = integrate_fn(g, [&](std::size_t j) { return u[j].imag() * gs.profile[j]; });
        c = cplx(cr, ci);
    }
    double theta = prev_theta.value_or(std::arg(c));
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
        const cplx e = cplx(std::cos(theta), -std::sin(theta));
        const double f = (e * c).imag();
        const double df = -(e * c).real();
        if (std::abs(df) < 1e-300) break;
        const double dtheta = f / df;
        theta -= dtheta;
        if (std::abs(dtheta) < 1e-15) {
            ok = true;
            break;
        }
    }
    if (!ok) {
        m.in_modulation = false;
        return m;
    }
    // pick the branch with Re(e^{-i theta} c) > 0 (g small), nearest prev seed
    if ((cplx(std::cos(theta), -std::sin(theta)) * c).real() < 0.0) theta += M_PI;
    if (prev_theta) {
        while (theta - *prev_theta > M_PI) theta -= 2.0 * M_PI;
        while (theta - *prev_theta < -M_PI) theta += 2.0 * M_PI;
    }
    const std::size_t n = u.size();
    EvenField gfield(n);
    const cplx e = cplx(std::cos(theta), -std::sin(theta));
    for (std::size_t j = 0; j < n; ++j) gfield[j] = e * u[j] - gs.profile[j];
    const double rho = integrate_fn(g, [&](std::size_t j) {
        return gfield[j].real() * std::pow(gs.profile[j], gs.params.p);
    }) / gs.lp1;
    m.theta = theta;
    m.rho = rho;
    m.h = EvenField(n);
    for (std::size_t j = 0; j < n; ++j) m.h[j] = gfield[j] - rho * gs.profile[j];
    m.orth_imQ = integrate_fn(g, [&](std::size_t j) { return m.h[j].imag() * gs.profile[j]; });
    m.orth_reQp = integrate_fn(g, [&](std::size_t j) {
        return m.h[j].real() * std::pow(gs.profile[j], gs.params.p);
    });
    m.in_modulation = true;
    return m;
}

// ---------------------------------------------------------------------------
// time integration with diagnostics

struct TrajectorySample {
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double k_gamma = 0.0;
    double mu = 0.0;
    double sup_abs = 0.0;
    double grad_l2 = 0.0;
    double J_R = 0.0;
    double dJ_R = 0.0;
    double theta = 0.0;
    double rho = 0.0;
    double h_h1 = 0.0;
    bool in_modulation = false;
};

enum class StopReason { Completed, Blowup, TruncationBreached };

struct EvolveResult {
    std::vector<TrajectorySample> samples;
    EvenField final_field;
    double final_time = 0.0;
    StopReason reason = StopReason::Completed;
    double grad_growth = 0.0;  // grad_l2(final)/grad_l2(initial)
    double dt_final = 0.0;
};

struct EvolveOptions {
    double dt0 = 1e-3;
    double record_every = 0.05;
    double dt_min = 1e-8;
    double energy_defect_tol = 1e-8;   // per-step, relative
    double virial_R = 0.0;             // 0: min(10, L/3)
    double grad_blowup_factor = 20.0;  // see decisions; spec's 1e3 is unreachable on a fixed grid
    double wall_mass_tol = 1e-6;
};

inline EvolveResult evolve(const HalfLineGrid& g, const EvenField& u0,
                           const GroundState& gs, double t0, double t1,
                           const EvolveOptions& opt = {}) {
    EvolveResult res;
    const double sgn = (t1 >= t0) ? 1.0 : -1.0;
    if (t1 == t0) throw std::invalid_argument("empty time span");
    const double R = (opt.virial_R > 0.0) ? opt.virial_R : std::min(10.0, g.L / 3.0);

    EvenField u = u0;
    double t = t0;
    double dt = opt.dt0 * sgn;
    CnOperator cn(g, dt);
    double energy_prev = report(g, u, gs).energy;
    const double grad0 = [&] {
        auto du = derivative(g, u);
        return std::sqrt(integrate_fn(g, [&](std::size_t j) { return std::norm(du[j]); }));
    }();
    double grad_cur = grad0;

    double next_record = t0;
    std::optional<double> prev_theta;
    std::size_t accepted_since_grow = 0;

    auto record = [&](double tnow) {
        TrajectorySample s;
        s.t = tnow;
        auto rep = report(g, u, gs);
        s.mass = rep.mass;
        s.energy = rep.energy;
        s.k_gamma = rep.k_gamma;
        s.mu = rep.mu;
        s.sup_abs = sup_abs(u);
        auto du = derivative(g, u);
        s.grad_l2 = std::sqrt(integrate_fn(g, [&](std::size_t j) { return std::norm(du[j]); }));
        grad_cur = s.grad_l2;
        auto vir = localized_virial(g, u, gs.params, R);
        s.J_R = vir.J_R;
        s.dJ_R = vir.dJ_R;
        auto mod = modulation_extract(g, u, gs, prev_theta);
        s.in_modulation = mod.in_modulation;
        if (mod.in_modulation) {
            s.theta = mod.theta;
            s.rho = mod.rho;
            s.h_h1 = h1_norm(g, mod.h);
            prev_theta = mod.theta;
        }
        res.samples.push_back(s);
    };
    record(t);
    next_record += opt.record_every * sgn;

    while (sgn * (t1 - t) > 1e-12) {
        double step_dt = dt;
        if (std::abs(step_dt) > std::abs(t1 - t)) {
            step_dt = t1 - t;
            cn = CnOperator(g, step_dt);
        }
        EvenField v = step(g, u, step_dt, cn);
        const double energy_new = report(g, v, gs).energy;
        const double defect = std::abs(energy_new - energy_prev) / std::max(1.0, std::abs(energy_prev));
        if (defect > opt.energy_defect_tol) {
            if (std::abs(dt) / 2.0 < opt.dt_min) {
                // controller collapsed; gradient growth decides blowup
                auto du = derivative(g, v);
                const double gr = std::sqrt(integrate_fn(g, [&](std::size_t j) { return std::norm(du[j]); }));
                res.final_field = v;
                res.final_time = t;
                res.grad_growth = gr / grad0;
                res.dt_final = std::abs(dt);
                res.reason = StopReason::Blowup;
                record(t);
                return res;
            }
            dt /= 2.0;
            cn = CnOperator(g, dt);
            accepted_since_grow = 0;
            continue;
        }
        u = std::move(v);
        t += step_dt;
        energy_prev = energy_new;
        ++accepted_since_grow;

        // wall check: mass within two nodes of x = L
        {
            const std::size_t n = g.nodes();
            double wall = 0.0;
            for (std::size_t j = n - 3; j < n; ++j) wall += g.w(j) * std::norm(u[j]);
            wall *= 2.0;
            if (wall > opt.wall_mass_tol) {
                record(t);
                res.final_field = u;
                res.final_time = t;
                res.reason = StopReason::TruncationBreached;
                auto du = derivative(g, u);
                res.grad_growth = std::sqrt(integrate_fn(g, [&](std::size_t j) {
                                      return std::norm(du[j]);
                                  })) / grad0;
                res.dt_final = std::abs(dt);
                return res;
            }
        }
        if (sgn * (t - next_record) >= 0.0) {
            record(t);
            next_record += opt.record_every * sgn;
        }
        if (accepted_since_grow >= 50 && std::abs(dt) < opt.dt0) {
            dt = sgn * std::min(std::abs(dt) * 2.0, opt.dt0);
            cn = CnOperator(g, dt);
            accepted_since_grow = 0;
        }
    }
    record(t);
    res.final_field = u;
    res.final_time = t;
    res.grad_growth = grad_cur / grad0;
    res.dt_final = std::abs(dt);
    res.reason = StopReason::Completed;
    return res;
}

// ---------------------------------------------------------------------------
// trichotomy classifier

enum class Verdict { Scatter, Blowup, ConvergeToGroundState, Undetermined };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Scatter: return "Scatter";
        case Verdict::Blowup: return "Blowup";
        case Verdict::ConvergeToGroundState: return "ConvergeToGroundState";
        default: return "Undetermined";
    }
}

struct ClassificationResult {
    Verdict verdict = Verdict::Undetermined;
    double final_time = 0.0;
    double rate = 0.0;          // fitted |g| decay rate for the converge verdict
    double sup_decay = 0.0;     // sup_abs(start)/sup_abs(end)
    double grad_growth = 0.0;
    StopReason stop = StopReason::Completed;
    std::vector<TrajectorySample> samples;
};

enum class Direction { Forward, Backward };

inline ClassificationResult classify(const HalfLineGrid& g, const EvenField& u0,
                                     const GroundState& gs, double horizon,
                                     Direction dir, const EvolveOptions& opt = {}) {
    const double t1 = (dir == Direction::Forward) ? horizon : -horizon;
    EvolveResult ev = evolve(g, u0, gs, 0.0, t1, opt);
    ClassificationResult out;
    out.samples = ev.samples;
    out.final_time = ev.final_time;
    out.grad_growth = ev.grad_growth;
    out.stop = ev.reason;
    const auto& ss = ev.samples;
    if (ev.reason == StopReason::Blowup && ev.grad_growth >= opt.grad_blowup_factor) {
        out.verdict = Verdict::Blowup;
        return out;
    }
    if (ss.size() < 4) return out;
    const double sup0 = ss.front().sup_abs;
    const double sup_end = ss.back().sup_abs;
    out.sup_decay = sup0 / std::max(sup_end, 1e-300);
    const bool k_positive = std::all_of(ss.begin(), ss.end(),
                                        [](const TrajectorySample& s) { return s.k_gamma > 0.0; });
    const bool mod_lock_at_end = ss.back().in_modulation;
    if (out.sup_decay >= 3.0 && k_positive && !mod_lock_at_end) {
        out.verdict = Verdict::Scatter;
        return out;
    }
    // converge: modulation lock over the final 30% with a negative log||g|| slope
    const std::size_t n = ss.size();
    const std::size_t tail = n - n * 3 / 10;
    bool locked = true;
    std::vector<double> ts, lg;
    for (std::size_t i = tail; i < n; ++i) {
        if (!ss[i].in_modulation) { locked = false; break; }
        const double gestimate = std::abs(ss[i].rho) * std::sqrt(gs.h1og) + ss[i].h_h1;
        if (gestimate > 0.0) {
            ts.push_back(ss[i].t);
            lg.push_back(std::log(gestimate));
        }
    }
    if (locked && ts.size() >= 3) {
        // least squares slope
        double st = 0, sl = 0, stt = 0, stl = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            st += ts[i]; sl += lg[i]; stt += ts[i] * ts[i]; stl += ts[i] * lg[i];
        }
        const double m = static_cast<double>(ts.size());
        const double slope = (m * stl - st * sl) / (m * stt - st * st);
        const double decayward = (dir == Direction::Forward) ? -slope : slope;
        if (decayward > 0.0) {
            out.verdict = Verdict::ConvergeToGroundState;
            out.rate = decayward;
            return out;
        }
    }
    out.verdict = Verdict::Undetermined;
    return out;
}

} // namespace dnls
