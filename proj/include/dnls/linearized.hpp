#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dnls/banded.hpp"
#include "dnls/grid.hpp"
#include "dnls/ground_state.hpp"

namespace dnls {

// General real tridiagonal matrix in array form: row i holds
// [lower_{i-1}, diag_i, upper_i] at columns i-1, i, i+1.
struct Tridiag {
    std::vector<double> lower, diag, upper;

    std::size_t size() const { return diag.size(); }

    std::vector<double> apply(const std::vector<double>& v) const {
        const std::size_t n = size();
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * v[i];
            if (i > 0) s += lower[i - 1] * v[i - 1];
            if (i + 1 < n) s += upper[i] * v[i + 1];
            out[i] = s;
        }
        return out;
    }
};

// Linearized operators around the ground state on the even sector:
//   L- = -Delta_gamma + omega - Q^{p-1},  L+ = -Delta_gamma + omega - p Q^{p-1},
// kept both in stencil form (for applications / time-domain use) and in
// trapezoid-symmetrized form D L D^{-1}, D = diag(sqrt(w)) (for eigenvalue work).
struct OperatorPair {
    HalfLineGrid grid;
    ModelParams params;
    RealField Q;
    Tridiag Lp, Lm;          // stencil form
    Tridiag Lp_sym, Lm_sym;  // symmetrized form (lower == upper)
    RealField sqrtw;         // D diagonal

    std::size_t size() const { return grid.nodes(); }

    // weighted (half-line trapezoid) inner product; full-line value is 2x
    double wdot(const RealField& a, const RealField& b) const {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j)
            s += grid.w(j) * a[j] * b[j];
        return s;
    }
};

inline OperatorPair assemble(const GroundState& gs) {
    const HalfLineGrid& g = gs.grid;
    const ModelParams& mp = gs.params;
    const std::size_t n = g.nodes();
    const double dx2 = g.dx * g.dx;
    OperatorPair ops;
    ops.grid = g;
    ops.params = mp;
    ops.Q = gs.profile;
    auto build = [&](double coeff) {
        Tridiag T;
        T.diag.resize(n);
        T.lower.assign(n - 1, -1.0 / dx2);
        T.upper.assign(n - 1, -1.0 / dx2);
        T.upper[0] = -2.0 / dx2;  // Robin ghost elimination at node 0
        for (std::size_t j = 0; j < n; ++j) {
            const double V = mp.omega - coeff * std::pow(gs.profile[j], mp.p - 1.0);
            T.diag[j] = 2.0 / dx2 + V;
        }
        T.diag[0] = 2.0 / dx2 - mp.gamma / g.dx + (mp.omega - coeff * std::pow(gs.profile[0], mp.p - 1.0));
        return T;
    };
    ops.Lm = build(1.0);
    ops.Lp = build(mp.p);
    ops.sqrtw.resize(n);
    for (std::size_t j = 0; j < n; ++j) ops.sqrtw[j] = std::sqrt(g.w(j));
    auto symmetrize = [&](const Tridiag& T) {
        Tridiag S = T;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double o = T.upper[j] * ops.sqrtw[j] / ops.sqrtw[j + 1];
            S.upper[j] = o;
            S.lower[j] = o;
        }
        return S;
    };
    ops.Lm_sym = symmetrize(ops.Lm);
    ops.Lp_sym = symmetrize(ops.Lp);
    return ops;
}

namespace detail {

// pentadiagonal entries of T1*T2 into a BandedLU(kl=2, ku=2)
inline BandedLU tridiag_product_lu(const Tridiag& T1, const Tridiag& T2, double shift) {
    const std::size_t n = T1.size();
    BandedLU lu(n, 2, 2);
    auto l1 = [&](std::size_t i) { return T1.lower[i]; };
    auto u1 = [&](std::size_t i) { return T1.upper[i]; };
    auto l2 = [&](std::size_t i) { return T2.lower[i]; };
    auto u2 = [&](std::size_t i) { return T2.upper[i]; };
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2) lu.at(i, i - 2) = l1(i - 1) * l2(i - 2);
        if (i >= 1) lu.at(i, i - 1) = l1(i - 1) * T2.diag[i - 1] + T1.diag[i] * l2(i - 1);
        double d = T1.diag[i] * T2.diag[i] + shift;
        if (i >= 1) d += l1(i - 1) * u2(i - 1);
        if (i + 1 < n) d += u1(i) * l2(i);
        lu.at(i, i) = d;
        if (i + 1 < n) lu.at(i, i + 1) = T1.diag[i] * u2(i) + u1(i) * T2.diag[i + 1];
        if (i + 2 < n) lu.at(i, i + 2) = u1(i) * u2(i + 1);
    }
    lu.factor();
    return lu;
}

inline double dot(const RealField& a, const RealField& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}
inline double nrm(const RealField& a) { return std::sqrt(dot(a, a)); }
inline void axpy(RealField& y, double a, const RealField& x) {
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += a * x[j];
}
inline void scale(RealField& y, double a) {
    for (double& v : y) v *= a;
}
inline void project_off(RealField& v, const RealField& unit) {
    axpy(v, -dot(v, unit), unit);
}

// Saddle solve [A q; q^T 0][y;lam] = [rhs;0] for symmetric tridiagonal A with
// a simple near-null direction along q.  Block elimination with iterative
// refinement recovers the accuracy lost to the near-singular factor.
struct SaddleSolver {
    BandedLU lu;
    RealField q;       // unit vector
    RealField aq;      // A^{-1} q
    const Tridiag* A;

    SaddleSolver(const Tridiag& Asym, RealField qunit)
        : lu(Asym.size(), 1, 1), q(std::move(qunit)), A(&Asym) {
        const std::size_t n = Asym.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (i) lu.at(i, i - 1) = Asym.lower[i - 1];
            lu.at(i, i) = Asym.diag[i];
            if (i + 1 < n) lu.at(i, i + 1) = Asym.upper[i];
        }
        lu.factor();
        aq = lu.solve(q);
    }

    RealField solve(const RealField& rhs, double* lambda_out = nullptr) const {
        RealField y = lu.solve(rhs);
        double lam = dot(q, y) / dot(q, aq);
        for (std::size_t j = 0; j < y.size(); ++j) y[j] -= lam * aq[j];
        for (int pass = 0; pass < 2; ++pass) {
            RealField r = A->apply(y);
            for (std::size_t j = 0; j < r.size(); ++j) r[j] = rhs[j] - r[j] - lam * q[j];
            RealField dy = lu.solve(r);
            const double dlam = (dot(q, dy) - dot(q, y)) / dot(q, aq);
            for (std::size_t j = 0; j < y.size(); ++j) y[j] += dy[j] - dlam * aq[j];
            lam += dlam;
        }
        if (lambda_out) *lambda_out = lam;
        return y;
    }
};

} // namespace detail

struct LinearizedSpectrum {
    double e_omega = 0.0;   // sqrt(-mu1), projected-pencil route
    double mu1 = 0.0;       // constrained Rayleigh infimum
    double mu2 = 0.0;       // next pencil eigenvalue (coarse), simplicity gap
    double e_block = 0.0;   // block-matrix route eigenvalue
    RealField Y1, Y2;       // block eigenpair, ||Y1+iY2||_L2 = 1, (Q,Y1)_H1og > 0
    double res1 = 0.0;      // ||L+ Y1 - e Y2||_L2
    double res2 = 0.0;      // ||L- Y2 + e Y1||_L2
    double pairing = 0.0;   // (Q, Y1)_{H^1_{omega,gamma}}
    double kernel_residual = 0.0;  // ||L- Q|| / ||Q||

    EvenField eigenfield() const {
        EvenField f(Y1.size());
        for (std::size_t j = 0; j < Y1.size(); ++j) f[j] = cplx(Y1[j], Y2[j]);
        return f;
    }
};

namespace detail {

// dense solve of the projected pencil at (possibly coarse) resolution:
// mu = eigenvalues of A+ restricted to qt-perp against (A-|_perp)^{-1}
struct CoarsePencil {
    double mu1, mu2;
    RealField xi;  // pencil minimizer, stencil coordinates
};

inline CoarsePencil dense_pencil(const GroundState& gs) {
    const OperatorPair ops = assemble(gs);
    const std::size_t n = ops.size();
    using Mat = Eigen::MatrixXd;
    using Vec = Eigen::VectorXd;
    Mat Ap = Mat::Zero(n, n), Am = Mat::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        Ap(i, i) = ops.Lp_sym.diag[i];
        Am(i, i) = ops.Lm_sym.diag[i];
        if (i + 1 < n) {
            Ap(i, i + 1) = Ap(i + 1, i) = ops.Lp_sym.upper[i];
            Am(i, i + 1) = Am(i + 1, i) = ops.Lm_sym.upper[i];
        }
    }
    Vec qt(n);
    for (std::size_t j = 0; j < n; ++j) qt(j) = ops.sqrtw[j] * ops.Q[j];
    qt.normalize();
    // Householder basis of qt-perp
    Vec v = qt;
    v(0) -= (qt(0) >= 0.0 ? -1.0 : 1.0);
    v.normalize();
    Mat H = Mat::Identity(n, n) - 2.0 * v * v.transpose();
    Mat U = H.rightCols(n - 1);
    Mat Apr = U.transpose() * Ap * U;
    Mat Amr = U.transpose() * Am * U;
    Eigen::SelfAdjointEigenSolver<Mat> esm(Amr);
    Mat half = esm.operatorSqrt();
    Mat S = half * Apr * half;
    Eigen::SelfAdjointEigenSolver<Mat> ess(0.5 * (S + S.transpose()));
    CoarsePencil out;
    out.mu1 = ess.eigenvalues()(0);
    out.mu2 = ess.eigenvalues()(1);
    Vec xi_t = U * (half * ess.eigenvectors().col(0));
    out.xi.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.xi[j] = xi_t(j) / ops.sqrtw[j];
    return out;
}

} // namespace detail

// Projected generalized eigenproblem P L+ P u = mu P (L-)^{-1} P u on the
// complement of Q (trapezoid-weighted L2), solved by a coarse dense
// initialization refined by bordered shift-inverse iteration; cross-checked
// against the real point spectrum of the block operator [[0,-L-],[L+,0]].
inline LinearizedSpectrum solve_spectrum(const OperatorPair& ops, const GroundState& gs) {
    const std::size_t n = ops.size();
    LinearizedSpectrum out;

    // kernel residual ||L- Q||/||Q|| (W-norm)
    {
        RealField lq = ops.Lm.apply(ops.Q);
        out.kernel_residual = std::sqrt(ops.wdot(lq, lq) / ops.wdot(ops.Q, ops.Q));
    }

    // coarse init
    const std::size_t n_coarse = std::min<std::size_t>(gs.grid.N, 320);
    detail::CoarsePencil coarse;
    {
        HalfLineGrid cg = make_grid(gs.params, gs.grid.L, n_coarse);
        GroundState cgs = ground_state(gs.params, cg);
        coarse = detail::dense_pencil(cgs);
        out.mu2 = coarse.mu2;
    }

    // prolong coarse minimizer to the fine grid (linear interpolation)
    RealField q_hat(n);  // unit q in D-coordinates
    for (std::size_t j = 0; j < n; ++j) q_hat[j] = ops.sqrtw[j] * ops.Q[j];
    detail::scale(q_hat, 1.0 / detail::nrm(q_hat));

    RealField xi(n);
    {
        const double dxc = gs.grid.L / static_cast<double>(n_coarse);
        for (std::size_t j = 0; j < n; ++j) {
            const double xr = gs.grid.x(j) / dxc;
            const auto k = static_cast<std::size_t>(std::min(xr, static_cast<double>(n_coarse - 1)));
            const double t = xr - static_cast<double>(k);
            xi[j] = coarse.xi[k] * (1.0 - t) + coarse.xi[k + 1] * t;
        }
    }
    // D-coordinates, projected
    RealField xi_t(n);
    for (std::size_t j = 0; j < n; ++j) xi_t[j] = xi[j] * ops.sqrtw[j];
    detail::project_off(xi_t, q_hat);
    detail::scale(xi_t, 1.0 / detail::nrm(xi_t));

    // refinement: eigenproblem  P A+ P A- P v = mu v  on V = q_hat-perp,
    // where the pencil minimizer is  xi_t = P A- v.
    detail::SaddleSolver saddle(ops.Lm_sym, q_hat);
    RealField v = saddle.solve(xi_t);
    detail::project_off(v, q_hat);
    detail::scale(v, 1.0 / detail::nrm(v));

    RealField apq = ops.Lp_sym.apply(q_hat);
    double mu = coarse.mu1;
    double mu_prev = 0.0;
    for (int it = 0; it < 30; ++it) {
        // bordered solve of (A+ A- - mu I) w - a A+ q - b q = v with
        // a = <q, A- w>, <q, w> = 0
        BandedLU lu = detail::tridiag_product_lu(ops.Lp_sym, ops.Lm_sym, -mu);
        RealField X0 = lu.solve(v);
        RealField X1 = lu.solve(apq);
        RealField X2 = lu.solve(q_hat);
        RealField amq = ops.Lm_sym.apply(q_hat);
        // [ <amq,X1>-1  <amq,X2> ; <q,X1>  <q,X2> ] [a;b] = -[<amq,X0>; <q,X0>]
        const double a11 = detail::dot(amq, X1) - 1.0, a12 = detail::dot(amq, X2);
        const double a21 = detail::dot(q_hat, X1), a22 = detail::dot(q_hat, X2);
        const double r1 = detail::dot(amq, X0), r2 = detail::dot(q_hat, X0);
        const double det = a11 * a22 - a12 * a21;
        const double a = (-r1 * a22 + r2 * a12) / det;
        const double b = (-a11 * r2 + a21 * r1) / det;
        RealField w = X0;
        detail::axpy(w, a, X1);
        detail::axpy(w, b, X2);
        detail::project_off(w, q_hat);
        detail::scale(w, 1.0 / detail::nrm(w));
        v = w;
        // Rayleigh quotient of the pencil at u = P A- v
        RealField u = ops.Lm_sym.apply(v);
        detail::project_off(u, q_hat);
        const double num = detail::dot(ops.Lp_sym.apply(u), u);
        const double den = detail::dot(ops.Lm_sym.apply(v), v);
        mu_prev = mu;
        mu = num / den;
        if (std::abs(mu - mu_prev) <= 1e-12 * std::abs(mu)) break;
    }
    if (!(mu < 0.0)) throw std::runtime_error("spectrum failed: mu1 not negative");
    out.mu1 = mu;
    out.e_omega = std::sqrt(-mu);

    // pencil minimizer in stencil coordinates
    RealField xi_fine = ops.Lm_sym.apply(v);
    detail::project_off(xi_fine, q_hat);
    for (std::size_t j = 0; j < n; ++j) xi_fine[j] /= ops.sqrtw[j];

    // block route: inverse iteration on [[0,-L-],[L+,0]] at shift e_omega,
    // reduced to pentadiagonal solves (L+ L- + s^2) v2 = -s w2 - L+ w1.
    const double s = out.e_omega;
    RealField Y1 = xi_fine;
    detail::scale(Y1, -1.0);
    RealField Y2 = ops.Lp.apply(Y1);
    detail::scale(Y2, 1.0 / s);
    {
        BandedLU lu = detail::tridiag_product_lu(ops.Lp, ops.Lm, s * s);
        for (int it = 0; it < 5; ++it) {
            RealField rhs(n);
            RealField lpw1 = ops.Lp.apply(Y1);
            for (std::size_t j = 0; j < n; ++j) rhs[j] = -s * Y2[j] - lpw1[j];
            RealField v2 = lu.solve(rhs);
            RealField lmv2 = ops.Lm.apply(v2);
            RealField v1(n);
            for (std::size_t j = 0; j < n; ++j) v1[j] = -(Y1[j] + lmv2[j]) / s;
            const double nr = std::sqrt(ops.wdot(v1, v1) + ops.wdot(v2, v2));
            for (std::size_t j = 0; j < n; ++j) {
                Y1[j] = v1[j] / nr;
                Y2[j] = v2[j] / nr;
            }
        }
    }
    {
        RealField lp1v = ops.Lp.apply(Y1);
        RealField lm2v = ops.Lm.apply(Y2);
        out.e_block = (ops.wdot(lp1v, Y2) - ops.wdot(lm2v, Y1)) /
                      (ops.wdot(Y1, Y1) + ops.wdot(Y2, Y2));
    }
    if (std::abs(out.e_block - out.e_omega) > 0.01 * out.e_omega)
        throw std::runtime_error("spectrum failed: projected and block routes disagree beyond 1%");

    // normalization ||Y||_{L2(R)} = 1 and sign convention (Q,Y1)_{H1og} > 0
    {
        const double nr = std::sqrt(2.0 * (ops.wdot(Y1, Y1) + ops.wdot(Y2, Y2)));
        for (std::size_t j = 0; j < n; ++j) {
            Y1[j] /= nr;
            Y2[j] /= nr;
        }
        const double pair = h1_gamma_quadratic(gs.grid, gs.field(), EvenField(Y1), true);
        if (pair < 0.0)
            for (std::size_t j = 0; j < n; ++j) {
                Y1[j] = -Y1[j];
                Y2[j] = -Y2[j];
            }
    }
    out.Y1 = Y1;
    out.Y2 = Y2;
    out.pairing = h1_gamma_quadratic(gs.grid, gs.field(), EvenField(Y1), true);
    {
        RealField r1 = ops.Lp.apply(Y1);
        detail::axpy(r1, -out.e_omega, Y2);
        RealField r2 = ops.Lm.apply(Y2);
        detail::axpy(r2, out.e_omega, Y1);
        out.res1 = std::sqrt(2.0 * ops.wdot(r1, r1));
        out.res2 = std::sqrt(2.0 * ops.wdot(r2, r2));
    }
    return out;
}

// max over the window x in [1, L-2] of Q^{-1} e^{eta x} (|Y1|+|Y2|),
// eta = 0.05 sqrt(omega); the last two length units are excluded as the
// Dirichlet pollution zone.
inline double decay_check(const LinearizedSpectrum& spec, const GroundState& gs,
                          double eta = -1.0) {
    if (eta < 0.0) eta = 0.05 * std::sqrt(gs.params.omega);
    const HalfLineGrid& g = gs.grid;
    double m = 0.0;
    for (std::size_t j = 0; j < g.nodes(); ++j) {
        const double x = g.x(j);
        if (x < 1.0 || x > g.L - 2.0) continue;
        const double val = std::exp(eta * x) *
                           (std::abs(spec.Y1[j]) + std::abs(spec.Y2[j])) / gs.profile[j];
        m = std::max(m, val);
    }
    return m;
}

enum class CoercivitySet { G, Gtilde };

// Project f onto the orthogonality set and return Phi(fhat)/||fhat||_{H1}^2,
// Phi = (1/2)<L+ f1,f1> + (1/2)<L- f2,f2>.
inline double coercivity_probe(const EvenField& f, const LinearizedSpectrum& spec,
                               const GroundState& gs, const OperatorPair& ops,
                               CoercivitySet which) {
    const HalfLineGrid& g = gs.grid;
    check_field(g, f);
    const std::size_t n = g.nodes();
    RealField f1 = f.real(), f2 = f.imag();
    auto remove = [&](RealField& v, const RealField& dir) {
        const double c = ops.wdot(v, dir) / ops.wdot(dir, dir);
        for (std::size_t j = 0; j < n; ++j) v[j] -= c * dir[j];
    };
    if (which == CoercivitySet::G) {
        RealField qp(n);
        for (std::size_t j = 0; j < n; ++j) qp[j] = std::pow(gs.profile[j], gs.params.p);
        remove(f2, gs.profile);  // (iQ, f) = int f2 Q
        remove(f1, qp);          // (Q^p, f) = int f1 Q^p
    } else {
        remove(f2, gs.profile);
        remove(f2, spec.Y1);
        remove(f1, spec.Y2);
    }
    const double in2 = l2_norm2(g, f);
    EvenField fhat(n);
    for (std::size_t j = 0; j < n; ++j) fhat[j] = cplx(f1[j], f2[j]);
    const double out2 = l2_norm2(g, fhat);
    if (std::sqrt(out2) < 1e-12 * std::sqrt(in2))
        throw std::runtime_error("degenerate projection");
    const double phi = ops.wdot(ops.Lp.apply(f1), f1) + ops.wdot(ops.Lm.apply(f2), f2);
    // full-line: both numerator halves and |f|_{H1}^2 double, factor cancels
    const double h1 = h1_norm(g, fhat);
    return phi / (h1 * h1);
}

inline double phi_quadratic(const EvenField& f, const OperatorPair& ops) {
    RealField f1 = f.real(), f2 = f.imag();
    return ops.wdot(ops.Lp.apply(f1), f1) + ops.wdot(ops.Lm.apply(f2), f2);
}

// Real eigenvalues of the dense block operator (test oracle; use small N).
inline std::vector<double> block_real_eigenvalues(const OperatorPair& ops,
                                                  double imag_tol = 1e-6) {
    const std::size_t n = ops.size();
    using Mat = Eigen::MatrixXd;
    Mat B = Mat::Zero(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        auto put = [&](const Tridiag& T, std::size_t ro, std::size_t co, double sgn) {
            B(ro + i, co + i) = sgn * T.diag[i];
            if (i + 1 < n) {
                B(ro + i, co + i + 1) = sgn * T.upper[i];
                B(ro + i + 1, co + i) = sgn * T.lower[i];
            }
        };
        put(ops.Lm, 0, n, -1.0);  // top-right -L-
        put(ops.Lp, n, 0, 1.0);   // bottom-left L+
    }
    Eigen::EigenSolver<Mat> es(B);
    std::vector<double> real_eigs;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const auto z = es.eigenvalues()(k);
        if (std::abs(z.imag()) < imag_tol * std::max(1.0, ops.params.omega))
            real_eigs.push_back(z.real());
    }
    std::sort(real_eigs.begin(), real_eigs.end());
    return real_eigs;
}

} // namespace dnls
