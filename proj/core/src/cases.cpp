#include "sentinel/cases.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "sentinel/dynsim.hpp"
#include "sentinel/error.hpp"
#include "sentinel/test_function.hpp"

namespace sentinel::cases {

namespace {

bool all_pass(const std::vector<Check>& checks) {
    return !checks.empty() &&
           std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::vector<std::string> ids_range(std::size_t first, std::size_t last) {
    std::vector<std::string> out;
    for (std::size_t i = first; i <= last; ++i) out.push_back(std::to_string(i));
    return out;
}

} // namespace

// ---- Lorenz ---------------------------------------------------------------

RunConfig lorenz_case_config() {
    RunConfig cfg;
    cfg.system = SystemKind::lorenz;
    cfg.lorenz = {10.0, 28.0, 8.0 / 3.0};
    cfg.schedule.entries = {{60.0, "rho", 30.0}, {120.0, "rho", 31.0}};
    cfg.sim.sample_rate = 100.0;
    cfg.sim.dt = 0.001;
    cfg.sim.duration = 180.0;
    cfg.sim.initial_state = {1.0, 1.0, 1.0};
    // Let the transient from (1, 1, 1) die out before recording.
    cfg.sim.warmup = 10.0;
    cfg.window = {2000, 100};
    cfg.phi = "square";
    // The change shifts the scale of the attractor; per-window standardization would remove it.
    cfg.standardize = false;
    cfg.detection.method = detect::Method::reference_window;
    cfg.detection.threshold = 3.0;
    cfg.detection.reference = {0, 30};
    cfg.detection.min_gap = 20;
    cfg.detection.rebaseline = true;
    return cfg;
}

std::size_t first_window_ending_after(const detect::LESSeries& les, double time_s) {
    const auto it = std::lower_bound(les.window_end_s.begin(), les.window_end_s.end(), time_s - 1e-9);
    return static_cast<std::size_t>(it - les.window_end_s.begin());
}

bool LorenzCaseResult::passed() const { return all_pass(checks); }

LorenzCaseResult run_lorenz_case(const RunConfig& cfg) {
    if (cfg.system != SystemKind::lorenz) throw ConfigError("lorenz case needs system \"lorenz\"");
    cfg.validate();
    LorenzCaseResult r;
    dynsim::SimConfig sim = cfg.sim;
    if (cfg.seed) sim.seed = *cfg.seed;
    r.raw = dynsim::simulate_lorenz(cfg.lorenz, cfg.schedule, sim);
    if (cfg.noise_snr_db) r.raw = dynsim::add_noise(r.raw, *cfg.noise_snr_db, sim.seed);

    const auto phi = TestFunction::parse(cfg.phi);
    std::vector<std::string> subset = cfg.subset;
    if (subset.empty()) {
        for (const auto& ch : r.raw.channels()) subset.push_back(ch.id);
    }
    r.les = detect::les_series(r.raw, cfg.window, phi, cfg.standardize, subset);
    r.detection = detect::run_detection(r.les, cfg.detection);

    for (const auto& e : cfg.schedule.entries) {
        r.change_times_s.push_back(e.time_s);
        r.change_windows.push_back(first_window_ending_after(r.les, e.time_s));
    }

    std::size_t hit = 0;
    std::vector<bool> matched(r.detection.events.size(), false);
    std::string delays;
    for (std::size_t i = 0; i < r.change_windows.size(); ++i) {
        const std::size_t k = r.change_windows[i];
        bool found = false;
        for (std::size_t e = 0; e < r.detection.events.size(); ++e) {
            const std::size_t w = r.detection.events[e].window;
            if (!matched[e] && w >= k && w <= k + r.tolerance_windows) {
                matched[e] = true;
                found = true;
                delays += (delays.empty() ? "" : ", ") + std::to_string(w - k);
                break;
            }
        }
        if (found) ++hit;
    }
    const auto spurious = static_cast<std::size_t>(std::count(matched.begin(), matched.end(), false));
    std::string at;
    for (const auto& e : r.detection.events) {
        at += (at.empty() ? "" : ", ") + std::to_string(e.window) + fmt(" (%.2f s)", e.time_s);
    }

    const std::size_t n_cp = r.change_windows.size();
    r.checks.push_back({"change points detected", hit == n_cp,
                        std::to_string(hit) + "/" + std::to_string(n_cp) +
                            " change points detected within " + std::to_string(r.tolerance_windows) +
                            " windows" + (delays.empty() ? "" : " (delays " + delays + ")")});
    r.checks.push_back({"no spurious events", spurious == 0,
                        std::to_string(spurious) + " events away from a change point; events at [" + at + "]"});
    r.checks.push_back({"event count", r.detection.events.size() == n_cp,
                        std::to_string(r.detection.events.size()) + " events, expected " + std::to_string(n_cp)});
    return r;
}

// ---- Fault case -----------------------------------------------------------

void FaultCaseConfig::validate() const {
    if (recorders == 0 || sensitive > recorders) throw ConfigError("fault case: invalid recorder split");
    if (!(fundamental_hz > 0.0) || samples_per_cycle < 4) {
        throw ConfigError("fault case: need fundamental > 0 and >= 4 samples per cycle");
    }
    if (cycles_before < 1 || cycles_after < 1) throw ConfigError("fault case: need cycles before and after");
    if (!(current_max >= current_min) || !(current_min > 0.0)) {
        throw ConfigError("fault case: invalid current amplitude range");
    }
}

FaultDataset make_fault_dataset(const FaultCaseConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const double fs = cfg.sample_rate();
    const std::size_t n = cfg.samples();
    const double w = 2.0 * std::numbers::pi * cfg.fundamental_hz;
    const double shift = 2.0 * std::numbers::pi / 3.0;
    const char* phase_names[] = {"VA", "VB", "VC", "IA", "IB", "IC"};

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> current(cfg.current_min, cfg.current_max);
    std::uniform_real_distribution<double> pf_angle(0.1, 0.6);

    FaultDataset out;
    std::vector<Channel> channels;
    std::vector<std::vector<double>> data;
    std::vector<double> v_amp(cfg.recorders), v_ang(cfg.recorders), i_ang(cfg.recorders);
    for (std::size_t r = 0; r < cfg.recorders; ++r) {
        v_amp[r] = cfg.voltage_amplitude * (1.0 + cfg.voltage_spread * unit(rng));
        v_ang[r] = cfg.angle_spread * unit(rng);
        const double i_amp = current(rng);
        i_ang[r] = v_ang[r] - pf_angle(rng);

        EntityDescriptor entity;
        entity.id = "FR" + std::to_string(r + 1);
        entity.kind = "fault-recorder";
        const bool sensitive = r >= cfg.recorders - cfg.sensitive;
        entity.attributes["feeder"] = sensitive ? "sensitive" : "insensitive";
        if (sensitive) out.sensitive.push_back(r);

        for (std::size_t p = 0; p < 6; ++p) {
            const std::string id = std::to_string(6 * r + p + 1);
            const bool is_v = p < 3;
            channels.push_back({id, entity.id + "." + phase_names[p], "pu"});
            entity.channels.push_back(id);
            const double amp = is_v ? v_amp[r] : i_amp;
            const double ang = (is_v ? v_ang[r] : i_ang[r]) - shift * static_cast<double>(p % 3);
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(w * static_cast<double>(i) / fs + ang);
            data.push_back(std::move(x));
        }
        out.entities.push_back(std::move(entity));
    }

    TimeSeries series(0.0, fs, std::move(channels), std::move(data));
    series = dynsim::add_noise(series, cfg.snr_db, seed ^ 0x9e3779b97f4a7c15ull);

    out.fault_start_s = cfg.fault_start_s();
    out.fault_end_s = series.time_at(n - 1);
    for (std::size_t r = 0; cfg.faulted && r < cfg.recorders; ++r) {
        const auto& ch = out.entities[r].channels;
        // Phase A to ground: every phase voltage shifts by -VA.
        dynsim::FaultSpec v;
        v.start_s = out.fault_start_s;
        v.end_s = out.fault_end_s;
        v.channels = {ch[0], ch[1], ch[2]};
        v.amplitude = v_amp[r];
        v.frequency_hz = cfg.fundamental_hz;
        v.phase_rad = v_ang[r] + std::numbers::pi;
        v.transient_amplitude = cfg.transient_amplitude;
        v.transient_frequency_hz = cfg.transient_frequency_hz;
        v.transient_decay_s = cfg.transient_decay_s;
        series = dynsim::inject_fault(series, v);

        const bool sensitive = r >= cfg.recorders - cfg.sensitive;
        dynsim::FaultSpec i;
        i.start_s = out.fault_start_s;
        i.end_s = out.fault_end_s;
        i.channels = {ch[3], ch[4], ch[5]};
        i.amplitude = sensitive ? cfg.sensitive_i0 : cfg.insensitive_i0;
        i.frequency_hz = cfg.fundamental_hz;
        // Capacitive earth current leads the lost phase-A voltage.
        i.phase_rad = v_ang[r] + std::numbers::pi / 2.0;
        i.transient_amplitude = sensitive ? cfg.transient_amplitude : 0.0;
        i.transient_frequency_hz = cfg.transient_frequency_hz;
        i.transient_decay_s = cfg.transient_decay_s;
        series = dynsim::inject_fault(series, i);
    }
    out.series = std::move(series);
    validate_entities(out.entities, out.series);
    return out;
}

bool FaultCaseResult::passed() const { return all_pass(checks); }

double calibrate_fault_threshold(const FaultCaseSettings& s, std::uint64_t seed) {
    s.detection.validate();
    FaultCaseConfig clean = s.data;
    clean.faulted = false;
    const auto phi = TestFunction::parse(s.phi);
    const std::size_t channels = clean.recorders * 6;
    const auto all_ids = ids_range(1, channels);
    const auto sub_ids = ids_range(1, std::min<std::size_t>(24, channels));
    std::mt19937_64 seeds(seed ^ 0xc2b2ae3d27d4eb4full);
    double worst = 0.0;
    for (std::size_t j = 0; j < s.calibration_runs; ++j) {
        const auto d = make_fault_dataset(clean, seeds());
        for (const auto* ids : {&all_ids, &sub_ids}) {
            const auto les = detect::les_series(d.series, s.window, phi, s.standardize, *ids);
            const auto score = detect::reference_score(les.tau, s.detection.reference);
            for (std::size_t k = s.detection.reference.end; k < score.size(); ++k) worst = std::max(worst, score[k]);
        }
    }
    return std::max(s.detection.threshold, s.calibration_margin * worst);
}

FaultCaseResult run_fault_case(const FaultCaseSettings& s, std::uint64_t seed) {
    FaultCaseResult r;
    r.data = make_fault_dataset(s.data, seed);
    const auto& series = r.data.series;
    const auto phi = TestFunction::parse(s.phi);

    const auto all_ids = ids_range(1, series.channel_count());
    const auto sub_ids = ids_range(1, std::min<std::size_t>(24, series.channel_count()));
    r.detection = s.detection;
    r.detection.threshold = calibrate_fault_threshold(s, seed);
    r.les_all = detect::les_series(series, s.window, phi, s.standardize, all_ids);
    r.les_subset = detect::les_series(series, s.window, phi, s.standardize, sub_ids);
    r.detection_all = detect::run_detection(r.les_all, r.detection);
    r.detection_subset = detect::run_detection(r.les_subset, r.detection);

    const std::size_t cycle = s.data.samples_per_cycle;
    const std::size_t before = s.data.cycles_before;
    for (const auto& entity : r.data.entities) {
        const std::vector<std::string> phases(entity.channels.begin() + 3, entity.channels.end());
        auto z = detect::zero_sequence_indicator(series.select(phases), cycle);
        double pre = 0.0;
        for (std::size_t k = 0; k < before; ++k) pre += z[k];
        pre /= static_cast<double>(before);
        r.zero_sequence_prefault.push_back(pre);
        r.zero_sequence_threshold.push_back(s.zero_sequence_factor * pre);
        r.zero_sequence.push_back(std::move(z));
    }

    // A window overlaps the fault when its last sample is at or after inception.
    auto overlap_check = [&](const detect::DetectionResult& det, const std::string& label) {
        std::size_t inside = 0;
        std::string at;
        for (const auto& e : det.events) {
            if (e.time_s >= r.data.fault_start_s - 1e-12) ++inside;
            at += (at.empty() ? "" : ", ") + fmt("%.4f s", e.time_s);
        }
        const bool ok = !det.events.empty() && inside == det.events.size();
        return Check{label + " detects the fault", ok,
                     std::to_string(inside) + "/" + std::to_string(det.events.size()) +
                         " events overlap the fault window [" + at + "]"};
    };
    r.checks.push_back(overlap_check(r.detection_all, "tau_1-42"));
    r.checks.push_back(overlap_check(r.detection_subset, "tau_1-24"));

    std::string quiet_detail;
    bool quiet = true;
    std::string loud_detail;
    bool loud = true;
    for (std::size_t f = 0; f < r.zero_sequence.size(); ++f) {
        const auto& z = r.zero_sequence[f];
        const bool sensitive =
            std::find(r.data.sensitive.begin(), r.data.sensitive.end(), f) != r.data.sensitive.end();
        const std::string name = r.data.entities[f].id;
        if (sensitive) {
            double lowest = INFINITY;
            for (std::size_t k = before; k < z.size(); ++k) lowest = std::min(lowest, z[k]);
            const double ratio = lowest / r.zero_sequence_prefault[f];
            loud = loud && ratio > s.zero_sequence_factor;
            loud_detail += (loud_detail.empty() ? "" : ", ") + name + fmt(" min %.1fx", ratio);
        } else {
            const double peak = *std::max_element(z.begin(), z.end());
            const double ratio = peak / r.zero_sequence_prefault[f];
            quiet = quiet && peak < r.zero_sequence_threshold[f];
            quiet_detail += (quiet_detail.empty() ? "" : ", ") + name + fmt(" peak %.2fx", ratio);
        }
    }
    r.checks.push_back({"insensitive zero-sequence stays below threshold", quiet,
                        quiet_detail + fmt(" (threshold %.1fx pre-fault)", s.zero_sequence_factor)});
    r.checks.push_back({"sensitive zero-sequence exceeds threshold", loud,
                        loud_detail + fmt(" (threshold %.1fx pre-fault)", s.zero_sequence_factor)});
    return r;
}

std::string fault_comparison_csv(const FaultCaseResult& r) {
    const auto& les = r.les_all;
    const double fs = r.data.series.sample_rate();
    const std::size_t cycle = r.zero_sequence.empty() ? 1 : r.data.series.length() / r.zero_sequence.front().size();
    std::string out = "window_end_s,tau_1_42,tau_1_24,score_1_42,score_1_24";
    for (const auto& e : r.data.entities) out += ",i0_" + e.id;
    out += '\n';
    char buf[64];
    for (std::size_t k = 0; k < les.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.9f", les.window_end_s[k]);
        out += buf;
        for (double v : {les.tau[k], r.les_subset.tau[k], r.detection_all.scores[k], r.detection_subset.scores[k]}) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out += buf;
        }
        const auto sample = static_cast<std::size_t>(std::llround((les.window_end_s[k] - r.data.series.t0()) * fs));
        for (const auto& z : r.zero_sequence) {
            const std::size_t c = std::min(sample / cycle, z.size() - 1);
            std::snprintf(buf, sizeof buf, ",%.17g", z[c]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace sentinel::cases
