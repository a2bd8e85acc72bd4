#include "sentinel/pipeline.hpp"

#include <cmath>
#include <exception>
#include <new>

#include <json.hpp>

#include "sentinel/config.hpp"
#include "sentinel/csv_io.hpp"
#include "sentinel/dynsim.hpp"
#include "sentinel/error.hpp"
#include "sentinel/power3bus.hpp"
#include "sentinel/rmt.hpp"
#include "sentinel/test_function.hpp"

namespace sentinel::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

int report_failure(std::ostream& err, const std::string& stage) {
    const std::string prefix = "error [" + stage + "]: ";
    try {
        throw;
    } catch (const ParseError& e) {
        err << prefix << e.what();
        if (e.line()) err << " (line " << e.line() << ")";
        err << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << prefix << e.what() << "\n";
        return kExitUsage;
    } catch (const SizeError& e) {
        err << prefix << e.what() << "\n";
        return kExitUsage;
    } catch (const SimulationDiverged& e) {
        err << prefix << e.what() << "\n";
        return kExitRuntime;
    } catch (const Error& e) {
        err << prefix << e.what() << "\n";
        return kExitRuntime;
    } catch (const io::IoError& e) {
        err << prefix << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::bad_alloc&) {
        err << prefix << "out of memory\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << prefix << e.what() << "\n";
        return kExitRuntime;
    }
}

namespace {

void require_output_dir(const fs::path& file) {
    if (file.empty()) throw ConfigError("no output path given");
    const auto dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
    if (!fs::is_directory(dir)) {
        throw ConfigError("output directory '" + dir.string() + "' does not exist");
    }
}

TimeSeries simulate(const RunConfig& cfg, std::uint64_t seed) {
    dynsim::SimConfig sim = cfg.sim;
    sim.seed = seed;
    TimeSeries series;
    if (cfg.system == SystemKind::lorenz) {
        series = dynsim::simulate_lorenz(cfg.lorenz, cfg.schedule, sim);
    } else {
        const auto closures = dynsim::default_closures(cfg.power, cfg.network);
        series = dynsim::simulate_power3bus(cfg.power, closures, cfg.schedule, sim);
    }
    if (cfg.noise_snr_db) series = dynsim::add_noise(series, *cfg.noise_snr_db, seed);
    return series;
}

std::vector<double> null_scores(const detect::LESSeries& les, double kappa4, std::ostream& err) {
    std::vector<double> scores(les.size(), std::nan(""));
    if (les.size() == 0) return scores;
    try {
        const auto phi = TestFunction::parse(les.phi);
        const double c = les.c.front();
        const std::size_t n = les.channels.size();
        for (std::size_t k = 0; k < les.size(); ++k) {
            scores[k] = detect::zscore_null(les.tau[k], phi, n, c, kappa4);
        }
    } catch (const Error& e) {
        err << "warning: null-model scores unavailable: " << e.what() << "\n";
        std::fill(scores.begin(), scores.end(), std::nan(""));
    }
    return scores;
}

void print_checks(std::ostream& out, const std::vector<cases::Check>& checks) {
    for (const auto& c : checks) {
        out << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << c.detail << "\n";
    }
}

} // namespace

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
    std::string stage = "config";
    try {
        const RunConfig cfg = load_run_config(opt.config);
        const fs::path target = opt.out.empty() ? cfg.outputs.raw : opt.out;
        require_output_dir(target);
        const auto seed = resolve_seed(opt.seed, cfg.seed);
        stage = "simulate";
        const TimeSeries series = simulate(cfg, seed);
        stage = "write";
        io::write_timeseries_csv(series, target);
        out << "wrote " << series.length() << " samples x " << series.channel_count() << " channels (";
        for (std::size_t i = 0; i < series.channel_count(); ++i) {
            const auto& ch = series.channels()[i];
            out << (i ? ", " : "") << ch.id << ":" << ch.name;
        }
        out << ") to " << target.string() << "\n";
        return kExitOk;
    } catch (...) {
        return report_failure(err, stage);
    }
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err) {
    std::string stage = "arguments";
    try {
        require_output_dir(opt.out);
        const auto phi = TestFunction::parse(opt.phi);
        stage = "read";
        if (!fs::is_regular_file(opt.in)) throw ConfigError("input '" + opt.in.string() + "' does not exist");
        const TimeSeries series = io::load_timeseries_csv(opt.in);
        stage = "analyze";
        std::vector<std::string> subset = parse_channel_subset(opt.subset);
        if (subset.empty()) {
            for (const auto& ch : series.channels()) subset.push_back(ch.id);
        }
        if (subset.empty()) throw SizeError("input has no channels");
        opt.window.validate(subset.size());
        const auto les = detect::les_series(series, opt.window, phi, opt.standardize, subset);
        const auto scores = null_scores(les, opt.kappa4, err);
        stage = "write";
        io::write_les_csv(les, scores, opt.out);
        out << "wrote " << les.size() << " windows (N=" << subset.size() << ", T=" << opt.window.length
            << ", c=" << static_cast<double>(subset.size()) / static_cast<double>(opt.window.length)
            << ", phi=" << phi.name() << ") to " << opt.out.string() << "\n";
        return kExitOk;
    } catch (...) {
        return report_failure(err, stage);
    }
}

std::string events_json(const detect::LESSeries& les, const detect::DetectionConfig& cfg,
                        const detect::DetectionResult& result) {
    json j;
    j["schema_version"] = 1;
    j["config"] = {{"method", std::string(detect::method_name(cfg.method))},
                   {"threshold", cfg.threshold},
                   {"reference", {cfg.reference.begin, cfg.reference.end}},
                   {"min_gap", cfg.min_gap},
                   {"kappa4", cfg.kappa4},
                   {"rebaseline", cfg.rebaseline}};
    j["series"] = {{"phi", les.phi},
                   {"standardize", les.standardized},
                   {"window_length", les.window_length},
                   {"stride", les.stride},
                   {"channels", format_channel_subset(les.channels)},
                   {"windows", les.size()}};
    json refs = json::array();
    for (const auto& r : result.references) refs.push_back({r.begin, r.end});
    j["references"] = refs;
    json events = json::array();
    for (const auto& e : result.events) {
        events.push_back({{"window", e.window},
                          {"time_s", e.time_s},
                          {"score", e.score},
                          {"method", std::string(detect::method_name(e.method))},
                          {"channels", format_channel_subset(e.channels)}});
    }
    j["events"] = events;
    return j.dump(2) + "\n";
}

int cmd_detect(const DetectOptions& opt, std::ostream& out, std::ostream& err) {
    std::string stage = "arguments";
    try {
        require_output_dir(opt.out);
        detect::DetectionConfig cfg = opt.detection;
        cfg.method = detect::parse_method(opt.method);
        cfg.validate();
        stage = "read";
        if (!fs::is_regular_file(opt.in)) throw ConfigError("input '" + opt.in.string() + "' does not exist");
        const auto loaded = io::load_les_csv(opt.in);
        stage = "detect";
        if (cfg.method == detect::Method::reference_window && cfg.reference.end > loaded.series.size()) {
            throw ConfigError("reference range [" + std::to_string(cfg.reference.begin) + ", " +
                              std::to_string(cfg.reference.end) + ") exceeds the " +
                              std::to_string(loaded.series.size()) + " windows in the input");
        }
        const auto result = detect::run_detection(loaded.series, cfg);
        stage = "write";
        io::write_file_atomic(opt.out, events_json(loaded.series, cfg, result));
        out << result.events.size() << " event(s)";
        for (const auto& e : result.events) out << "  [window " << e.window << ", t=" << e.time_s << " s]";
        out << "\n";
        return kExitOk;
    } catch (...) {
        return report_failure(err, stage);
    }
}

namespace {

int reproduce_lorenz(const fs::path& dir, std::uint64_t seed, std::ostream& out, std::string& stage) {
    stage = "config";
    RunConfig cfg = cases::lorenz_case_config();
    cfg.seed = seed;
    stage = "run";
    const auto r = cases::run_lorenz_case(cfg);
    stage = "write";
    io::write_file_atomic(dir / "config.json", dump_run_config(cfg));
    io::write_timeseries_csv(r.raw, dir / "raw.csv");
    io::write_les_csv(r.les, r.detection.scores, dir / "les.csv");
    io::write_file_atomic(dir / "events.json", events_json(r.les, cfg.detection, r.detection));
    print_checks(out, r.checks);
    out << (r.passed() ? "PASS" : "FAIL") << " lorenz: " << r.checks.front().detail << "\n";
    return r.passed() ? kExitOk : kExitChecksFailed;
}

std::string entities_json(const std::vector<EntityDescriptor>& entities) {
    json arr = json::array();
    for (const auto& e : entities) {
        arr.push_back({{"id", e.id},
                       {"kind", e.kind},
                       {"channels", format_channel_subset(e.channels)},
                       {"attributes", e.attributes}});
    }
    return arr.dump(2) + "\n";
}

int reproduce_fault(const fs::path& dir, std::uint64_t seed, std::ostream& out, std::string& stage) {
    stage = "run";
    const cases::FaultCaseSettings settings;
    const auto r = cases::run_fault_case(settings, seed);
    stage = "write";
    io::write_timeseries_csv(r.data.series, dir / "raw.csv");
    io::write_file_atomic(dir / "entities.json", entities_json(r.data.entities));
    io::write_les_csv(r.les_all, r.detection_all.scores, dir / "les_1-42.csv");
    io::write_les_csv(r.les_subset, r.detection_subset.scores, dir / "les_1-24.csv");
    io::write_file_atomic(dir / "events_1-42.json", events_json(r.les_all, r.detection, r.detection_all));
    io::write_file_atomic(dir / "events_1-24.json",
                          events_json(r.les_subset, r.detection, r.detection_subset));
    io::write_file_atomic(dir / "comparison.csv", cases::fault_comparison_csv(r));
    print_checks(out, r.checks);
    out << (r.passed() ? "PASS" : "FAIL")
        << " fault: tau_1-24 detects the fault while insensitive zero-sequence indicators stay quiet\n";
    return r.passed() ? kExitOk : kExitChecksFailed;
}

} // namespace

int cmd_reproduce(const ReproduceOptions& opt, std::ostream& out, std::ostream& err) {
    std::string stage = "arguments";
    try {
        if (opt.case_name != "lorenz" && opt.case_name != "fault") {
            throw ConfigError("unknown case '" + opt.case_name + "' (expected lorenz or fault)");
        }
        if (opt.out_dir.empty()) throw ConfigError("no output directory given");
        stage = "output";
        std::error_code ec;
        fs::create_directories(opt.out_dir, ec);
        if (ec || !fs::is_directory(opt.out_dir)) {
            throw io::IoError("cannot create output directory '" + opt.out_dir.string() + "'");
        }
        const auto seed = resolve_seed(opt.seed, std::nullopt);
        return opt.case_name == "lorenz" ? reproduce_lorenz(opt.out_dir, seed, out, stage)
                                         : reproduce_fault(opt.out_dir, seed, out, stage);
    } catch (...) {
        return report_failure(err, stage);
    }
}

} // namespace sentinel::pipeline
