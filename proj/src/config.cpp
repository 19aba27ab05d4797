#include "mgsim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "mgsim/errors.hpp"
#include "mgsim/seeding.hpp"

namespace mgsim::config {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& key, const std::string& what) {
    std::ostringstream os;
    if (node.IsDefined() && !node.Mark().is_null()) os << "line " << node.Mark().line + 1 << ": ";
    os << "key '" << key << "': " << what;
    throw ConfigError(os.str());
}

// A YAML mapping together with its dotted path, for error messages.
class Block {
public:
    // Missing keys come back as invalid nodes that throw on inspection or
    // assignment, so they are swapped for a null node up front.
    Block(const YAML::Node& node, std::string path)
        : node_(node.IsDefined() ? node : YAML::Node()), path_(std::move(path)) {
        if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap()) {
            fail(node_, path_.empty() ? "<root>" : path_, "expected a mapping");
        }
    }

    void allow(std::initializer_list<std::string_view> keys) const {
        if (!node_.IsMap()) return;
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const auto key = it->first.as<std::string>();
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                fail(it->first, join(path_, key), "unknown key");
            }
        }
    }

    bool has(std::string_view key) const {
        return node_.IsMap() && node_[std::string(key)].IsDefined();
    }

    YAML::Node raw(std::string_view key) const { return node_[std::string(key)]; }

    Block child(std::string_view key) const {
        if (!node_.IsMap()) return Block(YAML::Node(), join(path_, key));
        return Block(node_[std::string(key)], join(path_, key));
    }

    std::string key_path(std::string_view key) const { return join(path_, key); }

    template <class T>
    void read(std::string_view key, T& out) const {
        if (!has(key)) return;
        const YAML::Node n = raw(key);
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, key_path(key), "cannot convert value '" + scalar(n) + "'");
        }
    }

    // Numbers, with `null` meaning "disabled".
    void read_optional(std::string_view key, std::optional<double>& out) const {
        if (!has(key)) return;
        const YAML::Node n = raw(key);
        if (n.IsNull()) {
            out.reset();
            return;
        }
        double x = 0.0;
        read(key, x);
        out = x;
    }

    const YAML::Node& node() const { return node_; }
    const std::string& path() const { return path_; }

private:
    static std::string scalar(const YAML::Node& n) { return n.IsScalar() ? n.Scalar() : "<non-scalar>"; }

    YAML::Node node_;
    std::string path_;
};

void read_tracker_and_limits(const Block& b, TrackerSettings& t, CommandLimits& l) {
    b.read("tau_d", t.tau_d);
    b.read_optional("integral_limit", t.integral_limit);
    b.read("u_max", l.u_max);
    b.read("t_max", l.t_max);
}

PidGains read_pid_gains(const Block& b, PidGains g) {
    b.allow({"kp", "ki", "kd"});
    b.read("kp", g.kp);
    b.read("ki", g.ki);
    b.read("kd", g.kd);
    return g;
}

NnChannelConfig read_nn_channel(const Block& b, NnChannelConfig c) {
    b.allow({"learning_rate", "input_scale", "output_scale"});
    b.read("learning_rate", c.learning_rate);
    b.read("output_scale", c.output_scale);
    if (b.has("input_scale")) {
        std::vector<double> s;
        b.read("input_scale", s);
        if (s.size() != 3) fail(b.raw("input_scale"), b.key_path("input_scale"), "expected 3 numbers");
        std::copy(s.begin(), s.end(), c.input_scale.begin());
    }
    return c;
}

BelbicChannelConfig read_belbic_channel(const Block& b, BelbicChannelConfig c) {
    b.allow({"k1", "k2", "k3", "k4", "k5", "k6", "k7", "k_v", "k_w"});
    b.read("k1", c.gains.k1);
    b.read("k2", c.gains.k2);
    b.read("k3", c.gains.k3);
    b.read("k4", c.gains.k4);
    b.read("k5", c.gains.k5);
    b.read("k6", c.gains.k6);
    b.read("k7", c.gains.k7);
    b.read("k_v", c.k_v);
    b.read("k_w", c.k_w);
    return c;
}

ControllerConfig read_controller(const Block& b) {
    if (!b.has("kind")) fail(b.node(), b.key_path("kind"), "missing controller kind");
    std::string kind_name;
    b.read("kind", kind_name);
    const auto kind = parse_controller_kind(kind_name);
    if (!kind) {
        fail(b.raw("kind"), b.key_path("kind"),
             "unknown controller kind '" + kind_name + "' (none|pid|nn|belbic)");
    }
    ControllerConfig cfg = default_controller(*kind);
    std::visit(
        overloaded{
            [&](NullConfig&) { b.allow({"kind"}); },
            [&](PidConfig& c) {
                b.allow({"kind", "voltage", "frequency", "tau_d", "integral_limit", "u_max", "t_max"});
                c.voltage = read_pid_gains(b.child("voltage"), c.voltage);
                c.frequency = read_pid_gains(b.child("frequency"), c.frequency);
                read_tracker_and_limits(b, c.tracker, c.limits);
            },
            [&](NnConfig& c) {
                b.allow({"kind", "hidden", "voltage", "frequency", "tau_d", "integral_limit", "u_max",
                         "t_max"});
                b.read("hidden", c.hidden);
                c.voltage = read_nn_channel(b.child("voltage"), c.voltage);
                c.frequency = read_nn_channel(b.child("frequency"), c.frequency);
                read_tracker_and_limits(b, c.tracker, c.limits);
            },
            [&](BelbicConfig& c) {
                b.allow({"kind", "thalamus", "weight_limit", "voltage", "frequency", "tau_d",
                         "integral_limit", "u_max", "t_max"});
                b.read("thalamus", c.thalamus);
                b.read_optional("weight_limit", c.weight_limit);
                c.voltage = read_belbic_channel(b.child("voltage"), c.voltage);
                c.frequency = read_belbic_channel(b.child("frequency"), c.frequency);
                read_tracker_and_limits(b, c.tracker, c.limits);
            },
        },
        cfg);
    try {
        validate(cfg);
    } catch (const ContractViolation& e) {
        fail(b.node(), b.path(), e.what());
    }
    return cfg;
}

void read_machine(const Block& b, plant::MachineParams& m) {
    b.allow({"M", "D", "R", "K_G", "T_G", "K_a", "T_a", "X", "X_line", "P_dispatch"});
    b.read("M", m.M);
    b.read("D", m.D);
    b.read("R", m.R);
    b.read("K_G", m.K_G);
    b.read("T_G", m.T_G);
    b.read("K_a", m.K_a);
    b.read("T_a", m.T_a);
    b.read("X", m.X);
    b.read("X_line", m.X_line);
    b.read("P_dispatch", m.P_dispatch);
}

int parse_machine(const YAML::Node& n, const std::string& path) {
    const auto s = n.as<std::string>();
    if (s == "sm1") return 0;
    if (s == "sm2") return 1;
    fail(n, path, "expected sm1 or sm2");
}

plant::Event read_event(const Block& b) {
    plant::Event ev;
    b.read("time", ev.time);
    std::string kind_name;
    if (!b.has("kind")) fail(b.node(), b.key_path("kind"), "missing event kind");
    b.read("kind", kind_name);
    const auto kind = plant::parse_event_kind(kind_name);
    if (!kind) {
        fail(b.raw("kind"), b.key_path("kind"),
             "unknown event kind '" + kind_name + "' (islanding|load_step|parameter_change)");
    }
    ev.kind = *kind;
    switch (ev.kind) {
        case plant::EventKind::islanding:
            b.allow({"time", "kind"});
            break;
        case plant::EventKind::load_step:
            b.allow({"time", "kind", "d_P", "d_Q"});
            b.read("d_P", ev.d_load_P);
            b.read("d_Q", ev.d_load_Q);
            break;
        case plant::EventKind::parameter_change:
            b.allow({"time", "kind", "machine", "field", "value"});
            if (b.has("machine")) ev.machine = parse_machine(b.raw("machine"), b.key_path("machine"));
            b.read("field", ev.field);
            b.read("value", ev.value);
            try {
                plant::MachineParams probe;
                plant::machine_field(probe, ev.field);
            } catch (const ContractViolation& e) {
                fail(b.has("field") ? b.raw("field") : b.node(), b.key_path("field"), e.what());
            }
            break;
    }
    return ev;
}

void read_scenario(const Block& b, harness::Scenario& sc) {
    b.allow({"horizon", "dt", "references", "mse_window", "settling_band", "log_internals",
             "log_every", "events", "plant"});
    b.read("horizon", sc.horizon);
    b.read("dt", sc.dt);
    b.read("settling_band", sc.settling_band);
    b.read("log_internals", sc.log_internals);
    b.read("log_every", sc.log_every);
    if (b.has("mse_window")) {
        std::string w;
        b.read("mse_window", w);
        if (w == "full") {
            sc.mse_window = harness::MseWindow::full;
        } else if (w == "post_event") {
            sc.mse_window = harness::MseWindow::post_event;
        } else {
            fail(b.raw("mse_window"), b.key_path("mse_window"), "expected full or post_event");
        }
    }
    const Block refs = b.child("references");
    refs.allow({"omega", "v"});
    refs.read("omega", sc.refs.omega_ref);
    refs.read("v", sc.refs.v_ref);

    if (b.has("events")) {
        const YAML::Node list = b.raw("events");
        if (!list.IsSequence() && !list.IsNull()) fail(list, b.key_path("events"), "expected a list");
        sc.events.clear();
        for (std::size_t i = 0; list.IsSequence() && i < list.size(); ++i) {
            sc.events.push_back(read_event(Block(list[i], b.key_path("events") + "[" +
                                                               std::to_string(i) + "]")));
        }
    }

    const Block p = b.child("plant");
    p.allow({"omega_base", "v_target", "swing_only", "load", "grid", "sm1", "sm2"});
    p.read("omega_base", sc.plant.omega_base);
    p.read("v_target", sc.plant.v_target);
    p.read("swing_only", sc.plant.swing_only);
    const Block load = p.child("load");
    load.allow({"P", "Q"});
    load.read("P", sc.plant.load_P);
    load.read("Q", sc.plant.load_Q);
    const Block grid = p.child("grid");
    grid.allow({"X_tie", "voltage"});
    grid.read("X_tie", sc.plant.X_tie);
    grid.read("voltage", sc.plant.grid_voltage);
    read_machine(p.child("sm1"), sc.plant.machines[0]);
    read_machine(p.child("sm2"), sc.plant.machines[1]);
}

std::string targets_name(harness::SweepTargets t) {
    return t == harness::SweepTargets::sm1 ? "sm1" : "both";
}

// ---- emission ------------------------------------------------------------------------

class Emitter {
public:
    Emitter() { out_.SetIndent(2); }

    Emitter& key(std::string_view k) {
        out_ << YAML::Key << std::string(k) << YAML::Value;
        return *this;
    }
    Emitter& num(std::string_view k, double x) {
        key(k);
        out_ << format_double(x);
        return *this;
    }
    Emitter& opt(std::string_view k, const std::optional<double>& x) {
        key(k);
        if (x) {
            out_ << format_double(*x);
        } else {
            out_ << YAML::Null;
        }
        return *this;
    }
    Emitter& str(std::string_view k, std::string_view v) {
        key(k);
        out_ << std::string(v);
        return *this;
    }
    Emitter& flag(std::string_view k, bool v) {
        key(k);
        out_ << (v ? "true" : "false");
        return *this;
    }
    Emitter& integer(std::string_view k, std::uint64_t v) {
        key(k);
        out_ << std::to_string(v);
        return *this;
    }
    Emitter& begin_map(std::string_view k) {
        key(k);
        out_ << YAML::BeginMap;
        return *this;
    }
    Emitter& begin_map() {
        out_ << YAML::BeginMap;
        return *this;
    }
    Emitter& end_map() {
        out_ << YAML::EndMap;
        return *this;
    }
    Emitter& begin_seq(std::string_view k, bool flow = false) {
        key(k);
        if (flow) out_ << YAML::Flow;
        out_ << YAML::BeginSeq;
        return *this;
    }
    Emitter& end_seq() {
        out_ << YAML::EndSeq;
        return *this;
    }
    Emitter& item(const std::string& s) {
        out_ << s;
        return *this;
    }
    std::string str() const { return std::string(out_.c_str()) + "\n"; }

private:
    YAML::Emitter out_;
};

void emit_tracker_and_limits(Emitter& e, const TrackerSettings& t, const CommandLimits& l) {
    e.num("tau_d", t.tau_d).opt("integral_limit", t.integral_limit);
    e.num("u_max", l.u_max).num("t_max", l.t_max);
}

void emit_controller(Emitter& e, const ControllerConfig& cfg) {
    e.str("kind", to_string(kind_of(cfg)));
    std::visit(overloaded{
                   [](const NullConfig&) {},
                   [&](const PidConfig& c) {
                       for (auto [label, g] : {std::pair{"voltage", &c.voltage},
                                               std::pair{"frequency", &c.frequency}}) {
                           e.begin_map(label).num("kp", g->kp).num("ki", g->ki).num("kd", g->kd);
                           e.end_map();
                       }
                       emit_tracker_and_limits(e, c.tracker, c.limits);
                   },
                   [&](const NnConfig& c) {
                       e.integer("hidden", static_cast<std::uint64_t>(c.hidden));
                       for (auto [label, ch] : {std::pair{"voltage", &c.voltage},
                                                std::pair{"frequency", &c.frequency}}) {
                           e.begin_map(label).num("learning_rate", ch->learning_rate);
                           e.begin_seq("input_scale", true);
                           for (double s : ch->input_scale) e.item(format_double(s));
                           e.end_seq().num("output_scale", ch->output_scale).end_map();
                       }
                       emit_tracker_and_limits(e, c.tracker, c.limits);
                   },
                   [&](const BelbicConfig& c) {
                       e.flag("thalamus", c.thalamus).opt("weight_limit", c.weight_limit);
                       for (auto [label, ch] : {std::pair{"voltage", &c.voltage},
                                                std::pair{"frequency", &c.frequency}}) {
                           const auto& g = ch->gains;
                           e.begin_map(label);
                           e.num("k1", g.k1).num("k2", g.k2).num("k3", g.k3).num("k4", g.k4);
                           e.num("k5", g.k5).num("k6", g.k6).num("k7", g.k7);
                           e.num("k_v", ch->k_v).num("k_w", ch->k_w);
                           e.end_map();
                       }
                       emit_tracker_and_limits(e, c.tracker, c.limits);
                   },
               },
               cfg);
}

void emit_machine(Emitter& e, std::string_view label, const plant::MachineParams& m) {
    e.begin_map(label);
    e.num("M", m.M).num("D", m.D).num("R", m.R).num("K_G", m.K_G).num("T_G", m.T_G);
    e.num("K_a", m.K_a).num("T_a", m.T_a).num("X", m.X).num("X_line", m.X_line);
    e.num("P_dispatch", m.P_dispatch);
    e.end_map();
}

std::string emit_impl(const Config& c, bool include_output) {
    Emitter e;
    e.begin_map();
    e.integer("seed", c.seed);
    if (include_output) e.str("output_dir", c.output_dir);

    const auto& sc = c.scenario;
    e.begin_map("scenario");
    e.num("horizon", sc.horizon).num("dt", sc.dt);
    e.begin_map("references").num("omega", sc.refs.omega_ref).num("v", sc.refs.v_ref).end_map();
    e.str("mse_window", sc.mse_window == harness::MseWindow::full ? "full" : "post_event");
    e.num("settling_band", sc.settling_band);
    e.flag("log_internals", sc.log_internals);
    e.integer("log_every", static_cast<std::uint64_t>(sc.log_every));
    e.begin_seq("events");
    for (const auto& ev : sc.events) {
        e.begin_map().num("time", ev.time).str("kind", plant::to_string(ev.kind));
        if (ev.kind == plant::EventKind::load_step) e.num("d_P", ev.d_load_P).num("d_Q", ev.d_load_Q);
        if (ev.kind == plant::EventKind::parameter_change) {
            e.str("machine", ev.machine == 0 ? "sm1" : "sm2").str("field", ev.field);
            e.num("value", ev.value);
        }
        e.end_map();
    }
    e.end_seq();
    const auto& p = sc.plant;
    e.begin_map("plant");
    e.num("omega_base", p.omega_base).num("v_target", p.v_target).flag("swing_only", p.swing_only);
    e.begin_map("load").num("P", p.load_P).num("Q", p.load_Q).end_map();
    e.begin_map("grid").num("X_tie", p.X_tie).num("voltage", p.grid_voltage).end_map();
    emit_machine(e, "sm1", p.machines[0]);
    emit_machine(e, "sm2", p.machines[1]);
    e.end_map();
    e.end_map();

    e.begin_map("controllers");
    for (const auto& nc : c.controllers) {
        e.begin_map(nc.name);
        emit_controller(e, nc.config);
        e.end_map();
    }
    e.end_map();

    if (c.sweep) {
        e.begin_map("sweep");
        e.str("param", c.sweep->spec.param);
        e.begin_seq("values", true);
        for (double v : c.sweep->spec.multipliers) e.item(format_double(v));
        e.end_seq();
        e.str("targets", targets_name(c.sweep->spec.targets));
        e.begin_seq("controllers", true);
        for (const auto& n : c.sweep->controllers) e.item(n);
        e.end_seq();
        e.end_map();
    }
    if (c.tune) {
        const auto& t = *c.tune;
        e.begin_map("tune");
        e.str("controller", t.controller);
        e.integer("budget", t.budget).integer("random_samples", t.random_samples);
        e.num("w_freq", t.w_freq).num("w_volt", t.w_volt).num("lambda", t.lambda);
        e.flag("across_sweep", t.across_sweep);
        e.begin_map("bounds");
        for (const auto& [name, b] : t.bounds) {
            e.begin_seq(name, true).item(format_double(b.lo)).item(format_double(b.hi)).end_seq();
        }
        e.end_map();
        e.end_map();
    }
    e.end_map();
    return e.str();
}

std::vector<std::string> non_null_names(const std::vector<harness::NamedController>& ctls) {
    std::vector<std::string> out;
    for (const auto& nc : ctls) {
        if (kind_of(nc.config) != ControllerKind::none) out.push_back(nc.name);
    }
    return out;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

const harness::NamedController* Config::find_controller(std::string_view name) const {
    for (const auto& c : controllers) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

harness::Scenario Config::scenario_for(const harness::NamedController& controller) const {
    harness::Scenario sc = scenario;
    sc.controller = controller.config;
    if (auto* nn = std::get_if<NnConfig>(&sc.controller)) {
        nn->seed = derive_seed(seed, "controller/" + controller.name);
    }
    return sc;
}

void Config::validate() const {
    try {
        harness::Scenario probe = scenario;
        probe.controller = NullConfig{};
        probe.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    if (!(scenario.horizon > 0.0)) throw ConfigError("scenario.horizon must be > 0");
    if (controllers.empty()) throw ConfigError("controllers: at least one controller is required");
    std::set<std::string> names;
    for (const auto& c : controllers) {
        if (!names.insert(c.name).second) throw ConfigError("controllers: duplicate name " + c.name);
        try {
            mgsim::validate(c.config);
        } catch (const ContractViolation& e) {
            throw ConfigError("controllers." + c.name + ": " + e.what());
        }
    }
    if (sweep) {
        try {
            harness::validate(sweep->spec);
        } catch (const ContractViolation& e) {
            throw ConfigError(std::string("sweep: ") + e.what());
        }
        if (sweep->controllers.empty()) throw ConfigError("sweep.controllers must not be empty");
        for (const auto& n : sweep->controllers) {
            if (!find_controller(n)) throw ConfigError("sweep.controllers: undefined controller " + n);
        }
    }
    if (tune) {
        const auto* c = find_controller(tune->controller);
        if (!c) throw ConfigError("tune.controller: undefined controller " + tune->controller);
        if (tune->budget < 1) throw ConfigError("tune.budget must be >= 1");
        if (tune->across_sweep && !sweep) {
            throw ConfigError("tune.across_sweep: needs a sweep block");
        }
        for (double w : {tune->w_freq, tune->w_volt, tune->lambda}) {
            if (!(w >= 0.0)) throw ConfigError("tune weights must be >= 0");
        }
        const auto params = harness::tunables(c->config);
        for (const auto& [name, b] : tune->bounds) {
            if (std::none_of(params.begin(), params.end(),
                             [&](const harness::Tunable& t) { return t.name == name; })) {
                throw ConfigError("tune.bounds: '" + name + "' is not a tunable of " + c->name);
            }
            if (!(b.lo >= 0.0) || !(b.hi > b.lo)) {
                throw ConfigError("tune.bounds." + name + ": need 0 <= lo < hi");
            }
        }
    }
}

Config parse(std::string_view yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": YAML syntax error: " + e.msg);
    }
    Config c = defaults();
    const Block top(root, "");
    top.allow({"seed", "output_dir", "scenario", "controllers", "sweep", "tune"});
    top.read("seed", c.seed);
    top.read("output_dir", c.output_dir);
    read_scenario(top.child("scenario"), c.scenario);

    if (top.has("controllers")) {
        const Block ctl = top.child("controllers");
        c.controllers.clear();
        for (auto it = ctl.node().begin(); ctl.node().IsMap() && it != ctl.node().end(); ++it) {
            const auto name = it->first.as<std::string>();
            c.controllers.push_back({name, read_controller(Block(it->second, ctl.key_path(name)))});
        }
    }

    // Built-in sweep and tune blocks follow a user-supplied controller set.
    if (top.has("controllers")) {
        const auto names = non_null_names(c.controllers);
        if (names.empty()) {
            c.sweep.reset();
            if (c.tune) c.tune->across_sweep = false;
        } else if (c.sweep) {
            c.sweep->controllers = names;
        }
        if (c.tune && !c.find_controller(c.tune->controller) && !names.empty()) {
            c.tune->controller = names.front();
        }
    }

    if (top.has("sweep")) {
        const Block s = top.child("sweep");
        s.allow({"param", "values", "targets", "controllers"});
        SweepBlock sw = c.sweep.value_or(SweepBlock{});
        s.read("param", sw.spec.param);
        s.read("values", sw.spec.multipliers);
        if (s.has("targets")) {
            std::string t;
            s.read("targets", t);
            if (t == "sm1") {
                sw.spec.targets = harness::SweepTargets::sm1;
            } else if (t == "both") {
                sw.spec.targets = harness::SweepTargets::both;
            } else {
                fail(s.raw("targets"), s.key_path("targets"), "expected sm1 or both");
            }
        }
        if (s.has("controllers")) {
            s.read("controllers", sw.controllers);
        } else {
            sw.controllers = non_null_names(c.controllers);
        }
        if (sw.spec.multipliers.empty()) fail(s.raw("values"), s.key_path("values"), "empty value list");
        c.sweep = sw;
    }

    if (top.has("tune")) {
        const Block t = top.child("tune");
        t.allow({"controller", "budget", "random_samples", "w_freq", "w_volt", "lambda", "bounds",
                 "across_sweep"});
        TuneBlock tb = c.tune.value_or(TuneBlock{});
        t.read("controller", tb.controller);
        t.read("budget", tb.budget);
        t.read("random_samples", tb.random_samples);
        t.read("w_freq", tb.w_freq);
        t.read("w_volt", tb.w_volt);
        t.read("lambda", tb.lambda);
        t.read("across_sweep", tb.across_sweep);
        if (t.has("bounds")) {
            tb.bounds.clear();
            const Block b = t.child("bounds");
            for (auto it = b.node().begin(); b.node().IsMap() && it != b.node().end(); ++it) {
                const auto name = it->first.as<std::string>();
                std::vector<double> lohi;
                try {
                    lohi = it->second.as<std::vector<double>>();
                } catch (const YAML::Exception&) {
                    fail(it->second, b.key_path(name), "expected [lo, hi]");
                }
                if (lohi.size() != 2) fail(it->second, b.key_path(name), "expected [lo, hi]");
                tb.bounds[name] = {lohi[0], lohi[1]};
            }
        }
        c.tune = tb;
    }

    c.validate();
    return c;
}

Config load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string emit(const Config& config) { return emit_impl(config, true); }

std::uint64_t config_hash(const Config& config) { return fnv1a64(emit_impl(config, false)); }

std::string hash_hex(std::uint64_t hash) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[hash & 0xf];
        hash >>= 4;
    }
    return s;
}

}  // namespace mgsim::config
