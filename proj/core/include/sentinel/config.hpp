#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/detector.hpp"
#include "sentinel/dynsim.hpp"
#include "sentinel/power3bus.hpp"

namespace sentinel {

/// A physical entity and the channels that belong to it.
struct EntityDescriptor {
    std::string id;
    std::string kind;
    std::vector<std::string> channels;
    std::map<std::string, std::string> attributes;
};

/// Throws ConfigError on duplicate ids or channels missing from `series`.
void validate_entities(std::span<const EntityDescriptor> entities, const TimeSeries& series);

enum class SystemKind { lorenz, power3bus };

struct OutputPaths {
    std::filesystem::path raw;
    std::filesystem::path les;
    std::filesystem::path events;
};

/**
 * A complete simulate/analyze/detect run.
 *
 * JSON layout (schema_version 1):
 *   system          "lorenz" | "power3bus"
 *   params          parameter overrides for the chosen system
 *   network         slack-bus network for power3bus (x_line, E0, X0)
 *   schedule        [{"time_s", "parameter", "value"}, ...]
 *   sim             {dt, sample_rate, duration, initial_state, warmup, divergence_bound}
 *   noise_snr_db    optional measurement noise
 *   window          {length, stride}
 *   phi             test function name
 *   standardize     per-window row standardization
 *   subset          channel subset such as "1-3"; empty selects all
 *   detection       {method, threshold, reference: [begin, end], min_gap, kappa4, rebaseline}
 *   seed            unsigned integer
 *   outputs         {raw, les, events}, all optional
 *   entities        [{id, kind, channels, attributes}], optional
 */
struct RunConfig {
    int schema_version = 1;
    SystemKind system = SystemKind::lorenz;
    dynsim::LorenzParams lorenz;
    dynsim::Power3BusParams power;
    dynsim::NetworkParams network;
    dynsim::ParameterSchedule schedule;
    dynsim::SimConfig sim;
    std::optional<double> noise_snr_db;
    detect::WindowSpec window;
    std::string phi = "square";
    bool standardize = true;
    std::vector<std::string> subset;
    detect::DetectionConfig detection;
    std::optional<std::uint64_t> seed;
    OutputPaths outputs;
    std::vector<EntityDescriptor> entities;

    /// Number of channels the chosen system produces.
    std::size_t system_channels() const;
    /// Channels entering the LES after subsetting.
    std::size_t analyzed_channels() const;
    /// Cross-field checks; throws ConfigError naming the field.
    void validate() const;
};

/// Parses and validates a JSON document. Errors carry the JSON line or field path.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Serializes every field, including defaults.
std::string dump_run_config(const RunConfig& cfg);

/// Seed precedence: explicit value, then the config, then SPECTRAL_SENTINEL_SEED, then 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed,
                           std::optional<std::uint64_t> config_seed);

} // namespace sentinel
