#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dnls {

// Natural cubic spline on uniformly spaced samples y_j at x_j = j*dx.
// Evaluates as 0 beyond the right end (decayed fields), clamps at the left.
class UniformSpline {
  public:
    UniformSpline(std::vector<double> y, double dx) : y_(std::move(y)), dx_(dx) {
        const std::size_t n = y_.size();
        if (n < 4) throw std::invalid_argument("spline needs at least 4 samples");
        // second derivatives m_j: tridiagonal (1 4 1) m = 6 (y_{j-1}-2y_j+y_{j+1})/dx^2
        m_.assign(n, 0.0);
        std::vector<double> diag(n, 4.0), rhs(n, 0.0), sup(n, 1.0);
        for (std::size_t j = 1; j + 1 < n; ++j)
            rhs[j] = 6.0 * (y_[j - 1] - 2.0 * y_[j] + y_[j + 1]) / (dx_ * dx_);
        // natural ends: m_0 = m_{n-1} = 0; solve interior tridiagonal
        for (std::size_t j = 2; j + 1 < n; ++j) {
            const double w = 1.0 / diag[j - 1];
            diag[j] -= w * sup[j - 1];
            rhs[j] -= w * rhs[j - 1];
        }
        for (std::size_t j = n - 2; j >= 1; --j) {
            m_[j] = (rhs[j] - sup[j] * m_[j + 1]) / diag[j];
            if (j == 1) break;
        }
    }

    double operator()(double x) const {
        const std::size_t n = y_.size();
        if (x <= 0.0) x = -x;  // even extension
        const double xr = x / dx_;
        if (xr >= static_cast<double>(n - 1)) return 0.0;
        const auto j = static_cast<std::size_t>(xr);
        const double t = xr - static_cast<double>(j);
        const double a = y_[j], b = y_[j + 1];
        const double ma = m_[j], mb = m_[j + 1];
        const double h2 = dx_ * dx_;
        return a * (1.0 - t) + b * t +
               h2 / 6.0 * ((1.0 - t) * ((1.0 - t) * (1.0 - t) - 1.0) * ma +
                           t * (t * t - 1.0) * mb);
    }

  private:
    std::vector<double> y_;
    std::vector<double> m_;
    double dx_;
};

} // namespace dnls
