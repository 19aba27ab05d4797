#include "mgsim/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mgsim/errors.hpp"
#include "mgsim/seeding.hpp"

namespace mgsim {

namespace {

constexpr double kNnWeightLimit = 1e3;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

signals::ErrorTracker make_tracker(const TrackerSettings& s, double dt) {
    return signals::ErrorTracker::make(dt, s.tau_d, s.integral_limit);
}

void validate_limits(const CommandLimits& l) {
    if (!(l.u_max > 0.0) || !(l.t_max > 0.0)) {
        throw ContractViolation("command limits u_max and t_max must be positive");
    }
}

void validate_tracker(const TrackerSettings& s) {
    if (!(s.tau_d >= 0.0)) throw ContractViolation("tau_d must be >= 0");
    if (s.integral_limit && !(*s.integral_limit > 0.0)) {
        throw ContractViolation("integral_limit must be > 0");
    }
}

void validate_pid(const PidGains& g) {
    for (double k : {g.kp, g.ki, g.kd}) {
        if (!(k >= 0.0) || !std::isfinite(k)) throw ContractViolation("PID gains must be >= 0");
    }
}

bool all_finite(const Measurements& m) { return std::isfinite(m.omega) && std::isfinite(m.v); }

}  // namespace

std::string_view to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::none: return "none";
        case ControllerKind::pid: return "pid";
        case ControllerKind::nn: return "nn";
        case ControllerKind::belbic: return "belbic";
    }
    return "?";
}

std::optional<ControllerKind> parse_controller_kind(std::string_view name) {
    for (auto k : {ControllerKind::none, ControllerKind::pid, ControllerKind::nn,
                   ControllerKind::belbic}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

ControllerKind kind_of(const ControllerConfig& config) {
    return static_cast<ControllerKind>(config.index());
}

void validate(const ControllerConfig& config) {
    std::visit(overloaded{
                   [](const NullConfig&) {},
                   [](const PidConfig& c) {
                       validate_pid(c.voltage);
                       validate_pid(c.frequency);
                       validate_tracker(c.tracker);
                       validate_limits(c.limits);
                   },
                   [](const NnConfig& c) {
                       if (c.hidden < 1) throw ContractViolation("nn hidden width must be >= 1");
                       for (const auto* ch : {&c.voltage, &c.frequency}) {
                           if (!(ch->learning_rate >= 0.0)) {
                               throw ContractViolation("nn learning_rate must be >= 0");
                           }
                           if (!std::isfinite(ch->output_scale)) {
                               throw ContractViolation("nn output_scale must be finite");
                           }
                           for (double s : ch->input_scale) {
                               if (!std::isfinite(s)) {
                                   throw ContractViolation("nn input_scale must be finite");
                               }
                           }
                       }
                       validate_tracker(c.tracker);
                       validate_limits(c.limits);
                   },
                   [](const BelbicConfig& c) {
                       for (const auto* ch : {&c.voltage, &c.frequency}) {
                           ch->gains.validate();
                           if (!(ch->k_v >= 0.0) || !(ch->k_w >= 0.0)) {
                               throw ContractViolation("belbic learning rates must be >= 0");
                           }
                       }
                       if (c.weight_limit && !(*c.weight_limit > 0.0)) {
                           throw ContractViolation("belbic weight_limit must be > 0");
                       }
                       validate_tracker(c.tracker);
                       validate_limits(c.limits);
                   },
               },
               config);
}

// ---- PID -------------------------------------------------------------------

PidChannel::PidChannel(PidGains gains, const signals::ErrorTracker& tracker)
    : gains_(gains), tracker_(tracker) {}

double PidChannel::step(double error) {
    tracker_ = signals::update_error(tracker_, error);
    return gains_.kp * tracker_.e + gains_.ki * tracker_.integral + gains_.kd * tracker_.derivative;
}

// ---- online NN ---------------------------------------------------------------

NnChannel::NnChannel(const NnChannelConfig& config, int hidden, std::uint64_t seed,
                     const signals::ErrorTracker& tracker)
    : config_(config),
      w_in_(static_cast<std::size_t>(hidden)),
      b_in_(static_cast<std::size_t>(hidden), 0.0),
      w_out_(static_cast<std::size_t>(hidden)),
      tracker_(tracker) {
    std::mt19937_64 rng(seed);
    for (auto& row : w_in_) {
        for (double& x : row) x = uniform(rng, -0.5, 0.5);
    }
    for (double& x : w_out_) x = uniform(rng, -0.5, 0.5);
}

double NnChannel::forward(const std::array<double, 3>& x) const {
    double y = b_out_;
    for (std::size_t j = 0; j < w_out_.size(); ++j) {
        const double z = w_in_[j][0] * x[0] + w_in_[j][1] * x[1] + w_in_[j][2] * x[2] + b_in_[j];
        y += w_out_[j] * std::tanh(z);
    }
    return config_.output_scale * y;
}

double NnChannel::step(double error) {
    tracker_ = signals::update_error(tracker_, error);
    const std::array<double, 3> x{config_.input_scale[0] * tracker_.e,
                                  config_.input_scale[1] * tracker_.integral,
                                  config_.input_scale[2] * tracker_.derivative};

    std::vector<double> h(w_out_.size());
    double y = b_out_;
    for (std::size_t j = 0; j < w_out_.size(); ++j) {
        h[j] = std::tanh(w_in_[j][0] * x[0] + w_in_[j][1] * x[1] + w_in_[j][2] * x[2] + b_in_[j]);
        y += w_out_[j] * h[j];
    }
    const double u = config_.output_scale * y;

    // Descent on e^2/2 assuming a positive plant gain: w += lr * e * du/dw.
    const double g = config_.learning_rate * tracker_.e * config_.output_scale;
    auto bounded = [](double w) { return std::clamp(w, -kNnWeightLimit, kNnWeightLimit); };
    for (std::size_t j = 0; j < w_out_.size(); ++j) {
        const double back = w_out_[j] * (1.0 - h[j] * h[j]);
        for (std::size_t i = 0; i < 3; ++i) w_in_[j][i] = bounded(w_in_[j][i] + g * back * x[i]);
        b_in_[j] = bounded(b_in_[j] + g * back);
        w_out_[j] = bounded(w_out_[j] + g * h[j]);
    }
    b_out_ = bounded(b_out_ + g);
    return u;
}

bool NnChannel::weights_finite() const {
    for (const auto& row : w_in_) {
        for (double x : row) {
            if (!std::isfinite(x)) return false;
        }
    }
    for (double x : b_in_) {
        if (!std::isfinite(x)) return false;
    }
    for (double x : w_out_) {
        if (!std::isfinite(x)) return false;
    }
    return std::isfinite(b_out_);
}

// ---- BELBIC --------------------------------------------------------------------

BelbicChannel::BelbicChannel(const BelbicChannelConfig& config, bool thalamus,
                             std::optional<double> weight_limit,
                             const signals::ErrorTracker& tracker)
    : config_(config),
      rates_{config.k_v, config.k_w, thalamus, weight_limit},
      state_(belbic::BelbicState::zeros(1)),
      tracker_(tracker) {}

double BelbicChannel::step(double error) {
    tracker_ = signals::update_error(tracker_, error);
    si_ = signals::sensory_input(tracker_, config_.gains);
    es_ = signals::emotional_signal(tracker_, u_prev_, config_.gains);
    const double si[1] = {si_};
    auto result = belbic::step(state_, si, es_, rates_);
    state_ = std::move(result.state);
    return result.mo;
}

// ---- SecondaryController ---------------------------------------------------------

SecondaryController::Impl SecondaryController::build(const ControllerConfig& config, double dt) {
    return std::visit(
        overloaded{
            [](const NullConfig&) -> Impl { return NullImpl{}; },
            [dt](const PidConfig& c) -> Impl {
                const auto t = make_tracker(c.tracker, dt);
                return PidImpl{PidChannel(c.voltage, t), PidChannel(c.frequency, t)};
            },
            [dt](const NnConfig& c) -> Impl {
                const auto t = make_tracker(c.tracker, dt);
                return NnImpl{NnChannel(c.voltage, c.hidden, derive_seed(c.seed, "voltage"), t),
                              NnChannel(c.frequency, c.hidden, derive_seed(c.seed, "frequency"), t)};
            },
            [dt](const BelbicConfig& c) -> Impl {
                const auto t = make_tracker(c.tracker, dt);
                return BelbicImpl{BelbicChannel(c.voltage, c.thalamus, c.weight_limit, t),
                                  BelbicChannel(c.frequency, c.thalamus, c.weight_limit, t)};
            },
        },
        config);
}

SecondaryController::SecondaryController(ControllerConfig config, double dt)
    : config_(std::move(config)), dt_(dt), impl_(NullImpl{}) {
    if (!(dt > 0.0)) throw ContractViolation("controller sample time must be > 0");
    validate(config_);
    impl_ = build(config_, dt_);
}

void SecondaryController::reset() {
    impl_ = build(config_, dt_);
    last_ = {};
    faults_ = 0;
}

CommandLimits SecondaryController::limits() const {
    return std::visit(overloaded{
                          [](const NullConfig&) { return CommandLimits{}; },
                          [](const auto& c) { return c.limits; },
                      },
                      config_);
}

ControlCommand SecondaryController::control_step(const Measurements& meas,
                                                 const References& refs) {
    if (!all_finite(meas)) {
        ++faults_;
        return last_;
    }
    const double e_voltage = refs.v_ref - meas.v;
    const double e_frequency = refs.omega_ref - meas.omega;
    const CommandLimits lim = limits();

    ControlCommand cmd = std::visit(
        overloaded{
            [](NullImpl&) { return ControlCommand{}; },
            [&](PidImpl& p) {
                return ControlCommand{p.voltage.step(e_voltage), p.frequency.step(e_frequency)};
            },
            [&](NnImpl& n) {
                return ControlCommand{n.voltage.step(e_voltage), n.frequency.step(e_frequency)};
            },
            [&](BelbicImpl& b) {
                return ControlCommand{b.voltage.step(e_voltage), b.frequency.step(e_frequency)};
            },
        },
        impl_);

    if (!std::isfinite(cmd.u_sec) || !std::isfinite(cmd.t_sec)) {
        ++faults_;
        return last_;
    }
    cmd.u_sec = std::clamp(cmd.u_sec, -lim.u_max, lim.u_max);
    cmd.t_sec = std::clamp(cmd.t_sec, -lim.t_max, lim.t_max);
    if (auto* b = std::get_if<BelbicImpl>(&impl_)) {
        b->voltage.commit(cmd.u_sec);
        b->frequency.commit(cmd.t_sec);
    }
    last_ = cmd;
    return cmd;
}

ControllerInternals SecondaryController::internals() const {
    ControllerInternals out;
    if (const auto* b = std::get_if<BelbicImpl>(&impl_)) {
        out.v1 = b->voltage.state().v[0];
        out.w1 = b->voltage.state().w[0];
        out.v2 = b->frequency.state().v[0];
        out.w2 = b->frequency.state().w[0];
        out.si1 = b->voltage.last_si();
        out.si2 = b->frequency.last_si();
        out.es1 = b->voltage.last_es();
        out.es2 = b->frequency.last_es();
    }
    return out;
}

BelbicChannel* SecondaryController::belbic_channel(int channel) {
    auto* b = std::get_if<BelbicImpl>(&impl_);
    if (!b) return nullptr;
    return channel == 1 ? &b->voltage : &b->frequency;
}

}  // namespace mgsim
