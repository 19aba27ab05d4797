#pragma once

// Secondary-control layer. Channel 1 (voltage) produces U_sec for the AVR
// summing junction of SM1; channel 2 (frequency) produces T_sec for its
// governor. Errors are reference minus measurement on both channels.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mgsim/belbic.hpp"
#include "mgsim/signals.hpp"

namespace mgsim {

struct Measurements {
    double omega = 1.0;  // pu
    double v = 1.0;      // pu
};

struct References {
    double omega_ref = 1.0;
    double v_ref = 1.0;
};

struct ControlCommand {
    double u_sec = 0.0;  // voltage channel
    double t_sec = 0.0;  // frequency channel

    bool operator==(const ControlCommand&) const = default;
};

enum class ControllerKind { none, pid, nn, belbic };

std::string_view to_string(ControllerKind kind);
std::optional<ControllerKind> parse_controller_kind(std::string_view name);

struct CommandLimits {
    double u_max = 0.5;
    double t_max = 0.5;
    bool operator==(const CommandLimits&) const = default;
};

struct TrackerSettings {
    double tau_d = 0.01;
    std::optional<double> integral_limit = 10.0;
    bool operator==(const TrackerSettings&) const = default;
};

struct NullConfig {
    bool operator==(const NullConfig&) const = default;
};

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    bool operator==(const PidGains&) const = default;
};

struct PidConfig {
    PidGains voltage;
    PidGains frequency;
    TrackerSettings tracker;
    CommandLimits limits;
    bool operator==(const PidConfig&) const = default;
};

struct NnChannelConfig {
    double learning_rate = 0.01;
    std::array<double, 3> input_scale{1.0, 1.0, 1.0};  // applied to e, integral, derivative
    double output_scale = 1.0;
    bool operator==(const NnChannelConfig&) const = default;
};

struct NnConfig {
    NnChannelConfig voltage;
    NnChannelConfig frequency;
    int hidden = 8;
    std::uint64_t seed = 0;
    TrackerSettings tracker;
    CommandLimits limits;
    bool operator==(const NnConfig&) const = default;
};

struct BelbicChannelConfig {
    signals::ChannelGains gains;
    double k_v = 0.0;
    double k_w = 0.0;
    bool operator==(const BelbicChannelConfig&) const = default;
};

struct BelbicConfig {
    BelbicChannelConfig voltage;
    BelbicChannelConfig frequency;
    bool thalamus = false;
    std::optional<double> weight_limit = 1e3;
    TrackerSettings tracker;
    CommandLimits limits;
    bool operator==(const BelbicConfig&) const = default;
};

using ControllerConfig = std::variant<NullConfig, PidConfig, NnConfig, BelbicConfig>;

ControllerKind kind_of(const ControllerConfig& config);
void validate(const ControllerConfig& config);

// Per-tick learning-unit internals, logged for diagnostics. Zero for
// controllers without a learning unit.
struct ControllerInternals {
    double v1 = 0.0, w1 = 0.0, v2 = 0.0, w2 = 0.0;
    double si1 = 0.0, si2 = 0.0, es1 = 0.0, es2 = 0.0;
};

class PidChannel {
public:
    PidChannel(PidGains gains, const signals::ErrorTracker& tracker);
    double step(double error);
    const signals::ErrorTracker& tracker() const { return tracker_; }

private:
    PidGains gains_;
    signals::ErrorTracker tracker_;
};

class NnChannel {
public:
    NnChannel(const NnChannelConfig& config, int hidden, std::uint64_t seed,
              const signals::ErrorTracker& tracker);
    double step(double error);
    double forward(const std::array<double, 3>& x) const;
    const signals::ErrorTracker& tracker() const { return tracker_; }
    bool weights_finite() const;

private:
    NnChannelConfig config_;
    std::vector<std::array<double, 3>> w_in_;
    std::vector<double> b_in_;
    std::vector<double> w_out_;
    double b_out_ = 0.0;
    signals::ErrorTracker tracker_;
};

class BelbicChannel {
public:
    BelbicChannel(const BelbicChannelConfig& config, bool thalamus,
                  std::optional<double> weight_limit, const signals::ErrorTracker& tracker);

    // Raw (unsaturated) model output for this tick. The caller reports the
    // saturated command back through `commit`.
    double step(double error);
    void commit(double emitted) { u_prev_ = emitted; }

    const belbic::BelbicState& state() const { return state_; }
    void set_state(belbic::BelbicState s) { state_ = std::move(s); }
    double last_si() const { return si_; }
    double last_es() const { return es_; }

private:
    BelbicChannelConfig config_;
    belbic::LearningRates rates_;
    belbic::BelbicState state_;
    signals::ErrorTracker tracker_;
    double u_prev_ = 0.0;
    double si_ = 0.0;
    double es_ = 0.0;
};

class SecondaryController {
public:
    SecondaryController(ControllerConfig config, double dt);

    ControlCommand control_step(const Measurements& meas, const References& refs);
    void reset();

    ControllerKind kind() const { return kind_of(config_); }
    const ControllerConfig& config() const { return config_; }
    ControllerInternals internals() const;
    // Number of ticks on which non-finite measurements were received.
    std::size_t fault_count() const { return faults_; }
    const ControlCommand& last_command() const { return last_; }

    // Direct access to the learning units, for diagnostics and tests.
    BelbicChannel* belbic_channel(int channel);

private:
    struct NullImpl {};
    struct PidImpl {
        PidChannel voltage;
        PidChannel frequency;
    };
    struct NnImpl {
        NnChannel voltage;
        NnChannel frequency;
    };
    struct BelbicImpl {
        BelbicChannel voltage;
        BelbicChannel frequency;
    };
    using Impl = std::variant<NullImpl, PidImpl, NnImpl, BelbicImpl>;

    static Impl build(const ControllerConfig& config, double dt);
    CommandLimits limits() const;

    ControllerConfig config_;
    double dt_;
    Impl impl_;
    ControlCommand last_;
    std::size_t faults_ = 0;
};

}  // namespace mgsim
