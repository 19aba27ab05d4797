#pragma once

#include <optional>

namespace mgsim::signals {

// Error bookkeeping for one control channel: the current error, its
// trapezoidal running integral, and a first-order filtered derivative.
struct ErrorTracker {
    double e = 0.0;
    double integral = 0.0;
    double derivative = 0.0;
    double dt = 1e-3;
    double tau_d = 0.01;                   // derivative filter time constant, 0 = raw difference
    std::optional<double> integral_limit;  // anti-windup band on |integral|

    static ErrorTracker make(double dt, double tau_d, std::optional<double> integral_limit);

    bool operator==(const ErrorTracker&) const = default;
};

// Sensory-input gains k1..k3 and emotional-signal gains k4..k7.
struct ChannelGains {
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double k4 = 0.0;
    double k5 = 0.0;
    double k6 = 0.0;
    double k7 = 0.0;

    void validate() const;
    bool operator==(const ChannelGains&) const = default;
};

ErrorTracker update_error(const ErrorTracker& tracker, double e_new);

// k1*e + k2*integral + k3*derivative
double sensory_input(const ErrorTracker& tracker, const ChannelGains& gains);

// k4*|u_prev| + k5*e + k6*integral + k7*derivative, with u_prev the command
// emitted on the previous tick.
double emotional_signal(const ErrorTracker& tracker, double u_prev, const ChannelGains& gains);

}  // namespace mgsim::signals
