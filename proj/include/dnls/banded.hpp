#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dnls {

// Tridiagonal system solve (Thomas).  The Crank-Nicolson matrices are strictly
// diagonally dominant in modulus, so no pivoting is needed there.
template <class T>
std::vector<T> thomas_solve(std::vector<T> lower, std::vector<T> diag,
                            std::vector<T> upper, std::vector<T> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n - 1 || upper.size() != n - 1 || rhs.size() != n)
        throw std::invalid_argument("tridiagonal size mismatch");
    for (std::size_t j = 1; j < n; ++j) {
        if (std::abs(diag[j - 1]) == 0.0)
            throw std::runtime_error("tridiagonal solve failure: zero pivot");
        const T w = lower[j - 1] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    std::vector<T> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t j = n - 1; j-- > 0;)
        x[j] = (rhs[j] - upper[j] * x[j + 1]) / diag[j];
    return x;
}

// Banded matrix with kl sub- and ku super-diagonals, band storage with kl
// extra superdiagonals of fill for the partial-pivoting LU (LAPACK dgbtrf
// layout: storage row kl+ku+i-j, column j).
class BandedLU {
  public:
    BandedLU(std::size_t n, std::size_t kl, std::size_t ku)
        : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
          ab_(ldab_ * n, 0.0), piv_(n, 0) {}

    double& at(std::size_t i, std::size_t j) { return ab_[idx(i, j)]; }
    double get(std::size_t i, std::size_t j) const { return ab_[idx(i, j)]; }

    void factor() {
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t imax = std::min(n_ - 1, k + kl_);
            std::size_t ip = k;
            double vmax = std::abs(get(k, k));
            for (std::size_t i = k + 1; i <= imax; ++i) {
                const double v = std::abs(get(i, k));
                if (v > vmax) { vmax = v; ip = i; }
            }
            if (vmax == 0.0) throw std::runtime_error("banded LU: singular matrix");
            piv_[k] = ip;
            const std::size_t jmax = std::min(n_ - 1, k + kl_ + ku_);
            if (ip != k)
                for (std::size_t j = k; j <= jmax; ++j)
                    std::swap(at(k, j), at(ip, j));
            const double pivot = get(k, k);
            for (std::size_t i = k + 1; i <= imax; ++i) {
                const double m = get(i, k) / pivot;
                at(i, k) = m;
                for (std::size_t j = k + 1; j <= jmax; ++j)
                    at(i, j) -= m * get(k, j);
            }
        }
        factored_ = true;
    }

    std::vector<double> solve(std::vector<double> b) const {
        if (!factored_) throw std::logic_error("BandedLU: factor() first");
        if (b.size() != n_) throw std::invalid_argument("rhs size mismatch");
        for (std::size_t k = 0; k < n_; ++k) {
            if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
            const std::size_t imax = std::min(n_ - 1, k + kl_);
            for (std::size_t i = k + 1; i <= imax; ++i)
                b[i] -= get(i, k) * b[k];
        }
        for (std::size_t k = n_; k-- > 0;) {
            const std::size_t jmax = std::min(n_ - 1, k + kl_ + ku_);
            double s = b[k];
            for (std::size_t j = k + 1; j <= jmax; ++j) s -= get(k, j) * b[j];
            b[k] = s / get(k, k);
        }
        return b;
    }

    std::size_t size() const { return n_; }

  private:
    std::size_t idx(std::size_t i, std::size_t j) const {
        const auto d = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(j);
        if (d > static_cast<std::ptrdiff_t>(kl_) ||
            -d > static_cast<std::ptrdiff_t>(kl_ + ku_) || i >= n_ || j >= n_)
            throw std::out_of_range("entry outside band");
        return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(kl_ + ku_) + d) +
               j * ldab_;
    }

    std::size_t n_, kl_, ku_, ldab_;
    std::vector<double> ab_;
    std::vector<std::size_t> piv_;
    bool factored_ = false;
};

// Number of eigenvalues of a symmetric tridiagonal matrix strictly below x
// (Sturm sequence count).
inline std::size_t sturm_count_below(const std::vector<double>& diag,
                                     const std::vector<double>& off, double x) {
    const std::size_t n = diag.size();
    std::size_t count = 0;
    double q = diag[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t j = 1; j < n; ++j) {
        const double denom = (q == 0.0) ? 1e-300 : q;
        q = diag[j] - x - off[j - 1] * off[j - 1] / denom;
        if (q < 0.0) ++count;
    }
    return count;
}

// k-th smallest eigenvalue (0-based) by Sturm bisection.
inline double tridiag_eigenvalue(const std::vector<double>& diag,
                                 const std::vector<double>& off, std::size_t k,
                                 double tol = 1e-12) {
    double r = 0.0;
    for (std::size_t j = 0; j < diag.size(); ++j) {
        double s = std::abs(diag[j]);
        if (j > 0) s += std::abs(off[j - 1]);
        if (j + 1 < diag.size()) s += std::abs(off[j]);
        r = std::max(r, s);
    }
    double lo = -r, hi = r;
    while (hi - lo > tol * std::max(1.0, std::abs(lo) + std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count_below(diag, off, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace dnls
