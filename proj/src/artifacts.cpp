#include "mgsim/artifacts.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "mgsim/config.hpp"
#include "mgsim/errors.hpp"

namespace mgsim::artifacts {

namespace {

using config::format_double;

std::string settling_cell(const std::optional<double>& t) {
    return t ? format_double(*t) : "unsettled";
}

nlohmann::json number_or_null(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

std::vector<std::size_t> ranks(std::span<const CompareRow> rows, harness::Signal signal) {
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](std::size_t i) {
        const auto& r = rows[i];
        const bool bad = r.fault.has_value() || !r.metrics.defined;
        return std::pair{bad, bad ? 0.0 : r.metrics[signal].mse};
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    std::vector<std::size_t> rank(rows.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos + 1;
    return rank;
}

}  // namespace

std::string run_csv(const harness::RunResult& r, bool internals) {
    std::string out = "t,omega_sm1,v_sm1,omega_sm2,v_sm2,u_sec,t_sec";
    if (internals) out += ",belbic_v1,belbic_w1,belbic_v2,belbic_w2,si_1,si_2,es_1,es_2";
    out += '\n';
    std::size_t next_internal = 0;
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        out += format_double(r.t[k]);
        for (double x : {r.omega[0][k], r.v[0][k], r.omega[1][k], r.v[1][k], r.u_sec[k], r.t_sec[k]}) {
            out += ',';
            out += format_double(x);
        }
        if (internals) {
            if (next_internal < r.internals.size() && r.internals[next_internal].t == r.t[k]) {
                const auto& in = r.internals[next_internal++].values;
                for (double x : {in.v1, in.w1, in.v2, in.w2, in.si1, in.si2, in.es1, in.es2}) {
                    out += ',';
                    out += format_double(x);
                }
            } else {
                out += ",,,,,,,,";
            }
        }
        out += '\n';
    }
    return out;
}

nlohmann::json metrics_json(const harness::Metrics& m) {
    nlohmann::json j;
    j["defined"] = m.defined;
    if (!m.defined) return j;
    for (std::size_t s = 0; s < 4; ++s) {
        const auto& sm = m.signals[s];
        nlohmann::json e;
        e["mse"] = number_or_null(sm.mse);
        e["settling_time"] = sm.settling_time ? nlohmann::json(*sm.settling_time) : nullptr;
        e["overshoot"] = number_or_null(sm.overshoot);
        e["peak_abs_error"] = number_or_null(sm.peak_abs_error);
        j[harness::kSignalNames[s]] = e;
    }
    j["mean_abs_u_sec"] = m.mean_abs_u_sec;
    j["mean_abs_t_sec"] = m.mean_abs_t_sec;
    return j;
}

nlohmann::json run_summary(const harness::RunResult& r, const std::string& controller,
                           ControllerKind kind, const std::string& config_hash) {
    nlohmann::json j;
    j["controller"] = controller;
    j["kind"] = std::string(to_string(kind));
    j["config_hash"] = config_hash;
    j["samples"] = r.t.size();
    j["metrics"] = metrics_json(r.metrics);
    nlohmann::json faults = nlohmann::json::array();
    if (r.fault) faults.push_back({{"kind", "simulation"}, {"message", *r.fault}});
    if (r.controller_faults > 0) {
        faults.push_back({{"kind", "controller"},
                          {"message", "non-finite measurements or command"},
                          {"ticks", r.controller_faults}});
    }
    if (r.voltage_collapse_time) {
        faults.push_back({{"kind", "voltage_collapse"}, {"time", *r.voltage_collapse_time}});
    }
    j["faults"] = faults;
    return j;
}

std::string compare_csv(std::span<const CompareRow> rows) {
    using harness::Signal;
    const auto freq_rank = ranks(rows, Signal::omega_sm1);
    const auto volt_rank = ranks(rows, Signal::v_sm1);
    std::string out =
        "controller,kind,omega_sm1_mse,v_sm1_mse,omega_sm2_mse,v_sm2_mse,omega_sm1_settling,"
        "v_sm1_settling,omega_sm1_overshoot,v_sm1_overshoot,mean_abs_u_sec,mean_abs_t_sec,"
        "freq_rank,volt_rank,fault\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto& m = r.metrics;
        out += r.controller + "," + std::string(to_string(r.kind)) + ",";
        if (m.defined) {
            out += format_double(m[Signal::omega_sm1].mse) + "," + format_double(m[Signal::v_sm1].mse) +
                   "," + format_double(m[Signal::omega_sm2].mse) + "," +
                   format_double(m[Signal::v_sm2].mse) + "," +
                   settling_cell(m[Signal::omega_sm1].settling_time) + "," +
                   settling_cell(m[Signal::v_sm1].settling_time) + "," +
                   format_double(m[Signal::omega_sm1].overshoot) + "," +
                   format_double(m[Signal::v_sm1].overshoot) + "," + format_double(m.mean_abs_u_sec) +
                   "," + format_double(m.mean_abs_t_sec) + ",";
        } else {
            out += ",,,,,,,,,,";
        }
        out += std::to_string(freq_rank[i]) + "," + std::to_string(volt_rank[i]) + ",";
        out += r.fault ? "fault" : "";
        out += '\n';
    }
    return out;
}

std::string sweep_csv(const harness::SweepSpec& spec, std::span<const harness::SweepRow> rows) {
    using harness::Signal;
    const std::string targets = spec.targets == harness::SweepTargets::sm1 ? "sm1" : "both";
    std::string out =
        "param,targets,multiplier,controller,kind,omega_sm1_mse,v_sm1_mse,omega_sm2_mse,v_sm2_mse,"
        "fault\n";
    for (const auto& r : rows) {
        out += spec.param + "," + targets + "," + format_double(r.multiplier) + "," + r.controller +
               "," + std::string(to_string(r.kind)) + ",";
        const auto& m = r.metrics;
        if (m.defined) {
            out += format_double(m[Signal::omega_sm1].mse) + "," + format_double(m[Signal::v_sm1].mse) +
                   "," + format_double(m[Signal::omega_sm2].mse) + "," +
                   format_double(m[Signal::v_sm2].mse) + ",";
        } else {
            out += ",,,,";
        }
        out += r.fault ? "fault" : "";
        out += '\n';
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace mgsim::artifacts
