#include "mgsim/signals.hpp"

#include <algorithm>
#include <cmath>

#include "mgsim/errors.hpp"

namespace mgsim::signals {

ErrorTracker ErrorTracker::make(double dt, double tau_d, std::optional<double> integral_limit) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractViolation("ErrorTracker: dt must be > 0");
    if (!(tau_d >= 0.0)) throw ContractViolation("ErrorTracker: tau_d must be >= 0");
    if (integral_limit && !(*integral_limit > 0.0)) {
        throw ContractViolation("ErrorTracker: integral limit must be > 0");
    }
    ErrorTracker t;
    t.dt = dt;
    t.tau_d = tau_d;
    t.integral_limit = integral_limit;
    return t;
}

void ChannelGains::validate() const {
    for (double k : {k1, k2, k3, k4, k5, k6, k7}) {
        if (!(k >= 0.0) || !std::isfinite(k)) {
            throw ContractViolation("channel gains k1..k7 must be finite and non-negative");
        }
    }
}

ErrorTracker update_error(const ErrorTracker& tracker, double e_new) {
    if (!std::isfinite(e_new)) throw ContractViolation("update_error: error sample is not finite");

    ErrorTracker next = tracker;
    next.e = e_new;
    next.integral = tracker.integral + 0.5 * tracker.dt * (tracker.e + e_new);
    if (tracker.integral_limit) {
        next.integral = std::clamp(next.integral, -*tracker.integral_limit, *tracker.integral_limit);
    }

    const double raw = (e_new - tracker.e) / tracker.dt;
    if (tracker.tau_d == 0.0) {
        next.derivative = raw;
    } else {
        const double alpha = tracker.dt / (tracker.tau_d + tracker.dt);
        next.derivative = tracker.derivative + alpha * (raw - tracker.derivative);
    }
    return next;
}

double sensory_input(const ErrorTracker& tracker, const ChannelGains& gains) {
    return gains.k1 * tracker.e + gains.k2 * tracker.integral + gains.k3 * tracker.derivative;
}

double emotional_signal(const ErrorTracker& tracker, double u_prev, const ChannelGains& gains) {
    return gains.k4 * std::abs(u_prev) + gains.k5 * tracker.e + gains.k6 * tracker.integral +
           gains.k7 * tracker.derivative;
}

}  // namespace mgsim::signals
