#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sentinel/pipeline.hpp"

namespace pl = sentinel::pipeline;

int main(int argc, char** argv) {
    CLI::App app{"Spectral situation awareness: simulate, analyze, detect, reproduce"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;

    pl::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate a configured system into a time-series CSV");
    simulate->add_option("--config", sim.config, "JSON run configuration")->required();
    simulate->add_option("--out", sim.out, "Output CSV (defaults to outputs.raw of the config)");
    simulate->add_option("--seed", seed, "Seed (falls back to the config, then SPECTRAL_SENTINEL_SEED)");

    pl::AnalyzeOptions ana;
    bool no_standardize = false;
    auto* analyze = app.add_subcommand("analyze", "Compute the LES series of a time-series CSV");
    analyze->add_option("--in", ana.in, "Input time-series CSV")->required();
    analyze->add_option("--out", ana.out, "Output LES CSV")->required();
    analyze->add_option("--window", ana.window.length, "Window length in samples")->capture_default_str();
    analyze->add_option("--stride", ana.window.stride, "Window stride in samples")->capture_default_str();
    analyze->add_option("--phi", ana.phi, "Test function: identity, square, log, pow<k>, cheb<k>")
        ->capture_default_str();
    analyze->add_option("--subset", ana.subset, "Channel ids such as 1-24 (default: all)");
    analyze->add_flag("--no-standardize", no_standardize, "Skip per-window row standardization");
    analyze->add_option("--kappa4", ana.kappa4, "Fourth cumulant for the null-model score column")
        ->capture_default_str();

    pl::DetectOptions det;
    std::size_t ref_begin = det.detection.reference.begin;
    std::size_t ref_end = det.detection.reference.end;
    bool no_rebaseline = false;
    auto* detect = app.add_subcommand("detect", "Detect events in an LES CSV");
    detect->add_option("--in", det.in, "Input LES CSV")->required();
    detect->add_option("--out", det.out, "Output JSON report")->required();
    detect->add_option("--method", det.method, "null-zscore or reference-window")->capture_default_str();
    detect->add_option("--threshold", det.detection.threshold, "Score threshold")->capture_default_str();
    detect->add_option("--reference-begin", ref_begin, "First reference window")->capture_default_str();
    detect->add_option("--reference-end", ref_end, "One past the last reference window")->capture_default_str();
    detect->add_option("--min-gap", det.detection.min_gap, "Refractory gap in windows")->capture_default_str();
    detect->add_option("--kappa4", det.detection.kappa4, "Fourth cumulant (null-zscore)")->capture_default_str();
    detect->add_flag("--no-rebaseline", no_rebaseline, "Keep the first reference for the whole series");

    pl::ReproduceOptions rep;
    auto* reproduce = app.add_subcommand("reproduce", "Run a reference case end to end");
    reproduce->add_option("case", rep.case_name, "lorenz or fault")->required();
    reproduce->add_option("--out", rep.out_dir, "Output directory")->required();
    reproduce->add_option("--seed", rep.seed, "Seed (falls back to SPECTRAL_SENTINEL_SEED)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return pl::kExitUsage;
    }

    if (simulate->parsed()) {
        sim.seed = seed;
        return pl::cmd_simulate(sim, std::cout, std::cerr);
    }
    if (analyze->parsed()) {
        ana.standardize = !no_standardize;
        return pl::cmd_analyze(ana, std::cout, std::cerr);
    }
    if (detect->parsed()) {
        det.detection.reference = {ref_begin, ref_end};
        det.detection.rebaseline = !no_rebaseline;
        return pl::cmd_detect(det, std::cout, std::cerr);
    }
    return pl::cmd_reproduce(rep, std::cout, std::cerr);
}
