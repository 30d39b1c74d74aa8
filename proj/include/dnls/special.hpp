#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dnls/grid.hpp"
#include "dnls/ground_state.hpp"
#include "dnls/linearized.hpp"

namespace dnls {

inline double binom_general(double a, int l) {
    double out = 1.0;
    for (int i = 0; i < l; ++i) out *= (a - i) / (i + 1.0);
    return out;
}

// Taylor coefficients of N(z) = |1+z|^{p-1}(1+z) - 1 - (p+1)/2 z - (p-1)/2 zbar
// = (1+z)^{(p+1)/2} (1+zbar)^{(p-1)/2} - (linear part):
// a_{lm} = C((p+1)/2, l) C((p-1)/2, m), l+m >= 2.
struct TaylorTable {
    double p = 0.0;
    int l_max = 0;
    std::vector<std::vector<double>> a;  // a[l][m], zero for l+m < 2

    double at(int l, int m) const { return a[l][m]; }
};

inline TaylorTable taylor_coeffs(double p, int l_max) {
    if (!(p > 5.0)) throw std::invalid_argument("p must exceed 5");
    if (l_max < 2) throw std::invalid_argument("l_max must be at least 2");
    TaylorTable t;
    t.p = p;
    t.l_max = l_max;
    t.a.assign(l_max + 1, std::vector<double>(l_max + 1, 0.0));
    for (int l = 0; l <= l_max; ++l)
        for (int m = 0; m + l <= l_max; ++m)
            if (l + m >= 2)
                t.a[l][m] = binom_general((p + 1.0) / 2.0, l) * binom_general((p - 1.0) / 2.0, m);
    return t;
}

// P(v) = (p+1)/2 Q^{p-1} v + (p-1)/2 Q^{p-1} vbar,
// R(v) = |Q+v|^{p-1}(Q+v) - Q^p - P(v).
// R uses the direct definition where |v/Q| >= 1/2 and the Taylor series
// elsewhere (the direct form loses all significant digits for small v/Q).
struct PrPair {
    EvenField P, R;
};

inline PrPair pr_eval(const EvenField& v, const GroundState& gs, int series_lmax = 12) {
    const HalfLineGrid& g = gs.grid;
    check_field(g, v);
    const double p = gs.params.p;
    const std::size_t n = v.size();
    const TaylorTable tab = taylor_coeffs(p, series_lmax);
    PrPair out{EvenField(n), EvenField(n)};
    for (std::size_t j = 0; j < n; ++j) {
        const double Q = gs.profile[j];
        const double qp1 = std::pow(Q, p - 1.0);
        out.P[j] = (p + 1.0) / 2.0 * qp1 * v[j] + (p - 1.0) / 2.0 * qp1 * std::conj(v[j]);
        const cplx z = v[j] / Q;
        if (std::abs(z) >= 0.5) {
            const cplx w = Q + v[j];
            out.R[j] = std::pow(std::abs(w), p - 1.0) * w - std::pow(Q, p) - out.P[j];
        } else {
            cplx s(0.0, 0.0);
            cplx zl(1.0, 0.0);
            for (int l = 0; l <= tab.l_max; ++l) {
                cplx zm(1.0, 0.0);
                for (int m = 0; m + l <= tab.l_max; ++m) {
                    if (l + m >= 2) s += tab.at(l, m) * zl * zm;
                    zm *= std::conj(z);
                }
                zl *= z;
            }
            out.R[j] = std::pow(Q, p) * s;
        }
    }
    return out;
}

// Approximate special solution V_k^A = sum_j e^{-j e t} Z_j with Z_1 = A(Y1+iY2)
// and Z_{j} = (-Lc + j e)^{-1} F_j, F_j the e^{-jet} coefficient of the
// expansion error.  Internally the block-consistent eigenvalue is used so the
// j=1 eigenrelation holds to solver precision.
struct SpecialSeries {
    double A = 0.0;
    int k = 0;
    double e_omega = 0.0;
    std::vector<EvenField> Z;  // Z[0] unused, Z[1..k]
    TaylorTable taylor;
    GroundState gs;
    OperatorPair ops;

    EvenField v_sum(double t) const {
        const std::size_t n = gs.grid.nodes();
        EvenField out(n);
        for (int j = 1; j <= k; ++j) {
            const double f = std::exp(-j * e_omega * t);
            for (std::size_t i = 0; i < n; ++i) out[i] += f * Z[j][i];
        }
        return out;
    }

    // eps_k(t) = dV/dt + Lc V - i R(V), R evaluated through pr_eval
    EvenField epsilon(double t) const {
        const std::size_t n = gs.grid.nodes();
        EvenField V = v_sum(t);
        EvenField out(n);
        for (int j = 1; j <= k; ++j) {
            const double f = -j * e_omega * std::exp(-j * e_omega * t);
            for (std::size_t i = 0; i < n; ++i) out[i] += f * Z[j][i];
        }
        RealField v1 = V.real(), v2 = V.imag();
        RealField lmv2 = ops.Lm.apply(v2), lpv1 = ops.Lp.apply(v1);
        auto pr = pr_eval(V, gs, std::max(12, k + 2));
        for (std::size_t i = 0; i < n; ++i)
            out[i] += cplx(-lmv2[i], lpv1[i]) - cplx(0.0, 1.0) * pr.R[i];
        return out;
    }
};

namespace detail {

// truncated polynomial (in y = e^{-e t}) with EvenField coefficients
using FieldPoly = std::vector<std::vector<cplx>>;

inline FieldPoly poly_mul(const FieldPoly& a, const FieldPoly& b, int deg, std::size_t n) {
    FieldPoly c(deg + 1, std::vector<cplx>(n, cplx(0, 0)));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (static_cast<int>(i) > deg) break;
        for (std::size_t j = 0; j < b.size() && i + j <= static_cast<std::size_t>(deg); ++j) {
            auto& ci = c[i + j];
            const auto& ai = a[i];
            const auto& bj = b[j];
            for (std::size_t s = 0; s < n; ++s) ci[s] += ai[s] * bj[s];
        }
    }
    return c;
}

} // namespace detail

// Resolvent solve (-Lc + lam) Z = F via the pentadiagonal reduction
//   (L+ L- + lam^2) z2 = lam F2 + L+ F1,  z1 = (F1 - L- z2)/lam.
inline EvenField shifted_block_solve(const OperatorPair& ops, double lam, const EvenField& F) {
    const std::size_t n = F.size();
    RealField F1 = F.real(), F2 = F.imag();
    BandedLU lu = detail::tridiag_product_lu(ops.Lp, ops.Lm, lam * lam);
    RealField rhs(n);
    RealField lpf1 = ops.Lp.apply(F1);
    for (std::size_t j = 0; j < n; ++j) rhs[j] = lam * F2[j] + lpf1[j];
    RealField z2 = lu.solve(rhs);
    RealField lmz2 = ops.Lm.apply(z2);
    EvenField Z(n);
    for (std::size_t j = 0; j < n; ++j)
        Z[j] = cplx((F1[j] - lmz2[j]) / lam, z2[j]);
    return Z;
}

inline SpecialSeries build_series(double A, int k, const LinearizedSpectrum& spec,
                                  const GroundState& gs, const OperatorPair& ops) {
    if (k < 1 || k > 6) throw std::invalid_argument("k must lie in [1,6]");
    SpecialSeries s;
    s.A = A;
    s.k = k;
    s.e_omega = spec.e_block;  // block-consistent pair: Z_1 eigenrelation exact
    s.taylor = taylor_coeffs(gs.params.p, std::max(k + 1, 2));
    s.gs = gs;
    s.ops = ops;
    const std::size_t n = gs.grid.nodes();
    s.Z.assign(k + 1, EvenField(n));
    for (std::size_t j = 0; j < n; ++j) s.Z[1][j] = A * cplx(spec.Y1[j], spec.Y2[j]);
    if (A == 0.0) {
        for (int j = 1; j <= k; ++j) s.Z[j] = EvenField(n);
        return s;
    }
    const double e = s.e_omega;
    for (int j = 2; j <= k; ++j) {
        // resolvent shift j*e must avoid the real point spectrum {0, +-e}
        const double lam = j * e;
        if (std::abs(lam - e) < 1e-3 || std::abs(lam) < 1e-3)
            throw std::runtime_error("resolvent near-singular");
        // W(y) = sum_{i<j} y^i Z_i/Q; F_j = -i Q^p [N(W)]_j
        detail::FieldPoly W(j, std::vector<cplx>(n, cplx(0, 0)));
        detail::FieldPoly Wc(j, std::vector<cplx>(n, cplx(0, 0)));
        for (int i = 1; i < j; ++i)
            for (std::size_t sdx = 0; sdx < n; ++sdx) {
                const cplx w = s.Z[i][sdx] / gs.profile[sdx];
                W[i][sdx] = w;
                Wc[i][sdx] = std::conj(w);
            }
        std::vector<cplx> coeff(n, cplx(0, 0));
        detail::FieldPoly Pl(1, std::vector<cplx>(n, cplx(1, 0)));  // W^l
        for (int l = 0; l + 0 <= s.taylor.l_max && l <= j; ++l) {
            detail::FieldPoly Plm = Pl;  // W^l * Wc^m
            for (int m = 0; l + m <= s.taylor.l_max && l + m <= j; ++m) {
                if (l + m >= 2) {
                    const double alm = s.taylor.at(l, m);
                    if (alm != 0.0 && static_cast<int>(Plm.size()) > j) {
                        const auto& cj = Plm[j];
                        for (std::size_t sdx = 0; sdx < n; ++sdx)
                            coeff[sdx] += alm * cj[sdx];
                    }
                }
                Plm = detail::poly_mul(Plm, Wc, j, n);
            }
            Pl = detail::poly_mul(Pl, W, j, n);
        }
        EvenField F(n);
        for (std::size_t sdx = 0; sdx < n; ++sdx)
            F[sdx] = cplx(0.0, -1.0) * std::pow(gs.profile[sdx], gs.params.p) * coeff[sdx];
        s.Z[j] = shifted_block_solve(ops, lam, F);
    }
    return s;
}

struct SeedResult {
    EvenField seed;       // Q + V_k(t0)
    double t0 = 0.0;
    double slope = 0.0;   // least-squares slope of log ||eps_k(t)||_H1
    double target = 0.0;  // -(k+1) e
};

inline SeedResult seed_and_residual(const SpecialSeries& s, double t0, int n_samples = 12) {
    const HalfLineGrid& g = s.gs.grid;
    const EvenField V0 = s.v_sum(t0);
    const double qn = h1_norm(g, s.gs.field());
    if (s.A != 0.0 && h1_norm(g, V0) > 0.1 * qn)
        throw std::invalid_argument("t0 too small");
    SeedResult out;
    out.t0 = t0;
    const std::size_t n = g.nodes();
    out.seed = EvenField(n);
    for (std::size_t j = 0; j < n; ++j) out.seed[j] = s.gs.profile[j] + V0[j];
    out.target = -(s.k + 1) * s.e_omega;
    if (s.A == 0.0) return out;  // V == 0, seed = Q exactly
    const double window = 3.0 / s.e_omega;
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (int i = 0; i < n_samples; ++i) {
        const double t = t0 + window * i / (n_samples - 1.0);
        const double nr = h1_norm(g, s.epsilon(t));
        const double lg = std::log(nr);
        st += t;
        sl += lg;
        stt += t * t;
        stl += t * lg;
    }
    const double m = n_samples;
    out.slope = (m * stl - st * sl) / (m * stt - st * st);
    return out;
}

// Vandermonde cross-check of the multinomial F_j assembly: evaluate
// eps_{j-1}(t) at several times, strip the leading e^{-jet} level by a
// least-squares fit in y = e^{-et}, and return the recovered F_j field.
inline EvenField vandermonde_level(const SpecialSeries& lower, int j, int extra_levels = 3) {
    const double e = lower.e_omega;
    const std::size_t n = lower.gs.grid.nodes();
    const int L = 1 + extra_levels;  // unknown levels j, j+1, ..., j+extra
    const int T = L;                 // square Vandermonde
    // choose times so that y^j spans a well-conditioned range
    const double t_hi = std::log(1e4) / (j * e);
    std::vector<double> ts(T);
    for (int i = 0; i < T; ++i) ts[i] = t_hi * (1.0 - 0.35 * i / std::max(1, T - 1));
    // build Vandermonde in powers y^{j..j+L-1}
    std::vector<std::vector<double>> Vm(T, std::vector<double>(L));
    for (int i = 0; i < T; ++i)
        for (int c = 0; c < L; ++c)
            Vm[i][c] = std::exp(-(j + c) * e * ts[i]);
    // Gaussian elimination with partial pivoting, field-valued rhs
    std::vector<EvenField> rhs;
    rhs.reserve(T);
    for (int i = 0; i < T; ++i) rhs.push_back(lower.epsilon(ts[i]));
    for (int c = 0; c < L; ++c) {
        int piv = c;
        for (int i = c + 1; i < T; ++i)
            if (std::abs(Vm[i][c]) > std::abs(Vm[piv][c])) piv = i;
        std::swap(Vm[c], Vm[piv]);
        std::swap(rhs[c], rhs[piv]);
        for (int i = c + 1; i < T; ++i) {
            const double w = Vm[i][c] / Vm[c][c];
            for (int cc = c; cc < L; ++cc) Vm[i][cc] -= w * Vm[c][cc];
            for (std::size_t sdx = 0; sdx < n; ++sdx) rhs[i][sdx] -= w * rhs[c][sdx];
        }
    }
    std::vector<EvenField> sol(L, EvenField(n));
    for (int c = L - 1; c >= 0; --c) {
        EvenField acc = rhs[c];
        for (int cc = c + 1; cc < L; ++cc)
            for (std::size_t sdx = 0; sdx < n; ++sdx)
                acc[sdx] -= Vm[c][cc] * sol[cc][sdx];
        for (std::size_t sdx = 0; sdx < n; ++sdx) sol[c][sdx] = acc[sdx] / Vm[c][c];
    }
    return sol[0];
}

} // namespace dnls
