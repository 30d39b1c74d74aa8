#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace dnls {

// Parameters of the delta-NLS model: i u_t + u_xx + gamma*delta*u + |u|^{p-1}u = 0
// with gamma < 0 (repulsive point interaction) and mass-supercritical power p > 5.
// omega is the standing-wave frequency; the even ground state exists for
// omega > gamma^2/4.
struct ModelParams {
    double gamma;
    double p;
    double omega;

    // gamma = 0 is admitted as the free-soliton limit (Neumann reduction);
    // the CLI layer enforces strict negativity for model runs.
    void validate() const {
        if (!(gamma <= 0.0))
            throw std::invalid_argument("gamma must be negative");
        if (!(p > 5.0))
            throw std::invalid_argument("p must exceed 5");
        if (!(omega > 0.0))
            throw std::invalid_argument("omega must be positive");
    }

    bool high_frequency() const { return omega > gamma * gamma / 4.0; }

    void require_ground_state() const {
        validate();
        if (!high_frequency())
            throw std::domain_error("no ground state: omega <= gamma^2/4");
    }

    // Robin coefficient of the even half-line reduction, u'(0+) = -(gamma/2) u(0).
    double robin_coeff() const { return -gamma / 2.0; }
};

} // namespace dnls
