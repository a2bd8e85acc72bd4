#include "sentinel/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sentinel/error.hpp"
#include "sentinel/test_function.hpp"

namespace sentinel {

using nlohmann::json;

void validate_entities(std::span<const EntityDescriptor> entities, const TimeSeries& series) {
    std::set<std::string, std::less<>> seen;
    for (const auto& e : entities) {
        if (e.id.empty()) throw ConfigError("entity with empty id");
        if (!seen.insert(e.id).second) throw ConfigError("duplicate entity id '" + e.id + "'");
        for (const auto& ch : e.channels) {
            if (!series.index_of(ch)) {
                throw ConfigError("entity '" + e.id + "' references unknown channel '" + ch + "'");
            }
        }
    }
}

std::size_t RunConfig::system_channels() const { return system == SystemKind::lorenz ? 3 : 6; }

std::size_t RunConfig::analyzed_channels() const {
    return subset.empty() ? system_channels() : subset.size();
}

void RunConfig::validate() const {
    if (schema_version != 1) {
        throw ConfigError("schema_version: unsupported value " + std::to_string(schema_version));
    }
    if (system == SystemKind::lorenz) {
        lorenz.validate();
        schedule.validate(dynsim::kLorenzParameterNames, sim.duration);
    } else {
        power.validate();
        schedule.validate(dynsim::kPower3BusParameterNames, sim.duration);
        if (!(network.x_line > 0.0) || !(network.X0 > 0.0)) {
            throw ConfigError("network: x_line and X0 must be > 0");
        }
    }
    sim.validate(system_channels());
    if (noise_snr_db && !std::isfinite(*noise_snr_db) && *noise_snr_db != dynsim::kNoNoise) {
        throw ConfigError("noise_snr_db: must be a finite number");
    }
    try {
        window.validate(analyzed_channels());
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("window: ") + e.what());
    }
    if (window.length > sim.sample_count()) {
        throw ConfigError("window.length: " + std::to_string(window.length) + " exceeds the " +
                          std::to_string(sim.sample_count()) + " simulated samples");
    }
    try {
        (void)TestFunction::parse(phi);
    } catch (const Error& e) {
        throw ConfigError(std::string("phi: ") + e.what());
    }
    std::set<std::string, std::less<>> known;
    for (std::size_t i = 1; i <= system_channels(); ++i) known.insert(std::to_string(i));
    for (const auto& id : subset) {
        if (!known.count(id)) throw ConfigError("subset: unknown channel '" + id + "'");
    }
    try {
        detection.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("detection: ") + e.what());
    }
    for (const auto* p : {&outputs.raw, &outputs.les, &outputs.events}) {
        if (p->empty()) continue;
        const auto dir = p->has_parent_path() ? p->parent_path() : std::filesystem::path(".");
        if (!std::filesystem::is_directory(dir)) {
            throw ConfigError("outputs: directory '" + dir.string() + "' does not exist");
        }
    }
    std::set<std::string, std::less<>> ids;
    for (const auto& e : entities) {
        if (e.id.empty()) throw ConfigError("entities: empty id");
        if (!ids.insert(e.id).second) throw ConfigError("entities: duplicate id '" + e.id + "'");
        for (const auto& ch : e.channels) {
            if (!known.count(ch)) {
                throw ConfigError("entities: '" + e.id + "' references unknown channel '" + ch + "'");
            }
        }
    }
}

namespace {

// Walks a JSON object, reporting errors with a '/a/b' field path and rejecting unknown keys.
class Node {
  public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("field '" + (path_.empty() ? "/" : path_) + "': " + what);
    }

    bool has(const char* key) {
        used_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    std::string child_path(const char* key) const { return path_ + "/" + key; }
    const json& raw(const char* key) const { return j_.at(key); }

    Node object(const char* key) {
        used_.insert(key);
        return Node(j_.at(key), child_path(key));
    }

    double number(const char* key, double fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number()) Node::fail_at(child_path(key), "expected a number");
        return v.get<double>();
    }

    std::size_t count(const char* key, std::size_t fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            fail_at(child_path(key), "expected a non-negative integer");
        }
        return v.get<std::size_t>();
    }

    bool boolean(const char* key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) fail_at(child_path(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const char* key, std::string fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string()) fail_at(child_path(key), "expected a string");
        return v.get<std::string>();
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) fail_at(path_ + "/" + it.key(), "unknown field");
        }
    }

    [[noreturn]] static void fail_at(const std::string& path, const std::string& what) {
        throw ConfigError("field '" + path + "': " + what);
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string, std::less<>> used_;
};

template <class Params>
void read_params(Node& node, Params& params, std::span<const std::string_view> names) {
    for (auto name : names) {
        const std::string key(name);
        if (!node.has(key.c_str())) continue;
        params.set(name, node.number(key.c_str(), 0.0));
    }
}

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

std::vector<double> default_initial_state(SystemKind kind) {
    if (kind == SystemKind::lorenz) return {1.0, 1.0, 1.0};
    return dynsim::default_power3bus_initial_state();
}

} // namespace

RunConfig parse_run_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("line " + std::to_string(line_of(text, e.byte)) + ": invalid JSON (" +
                          e.what() + ")");
    }

    RunConfig cfg;
    Node root(doc, "");
    const auto version = root.count("schema_version", 0);
    if (version != 1) Node::fail_at("/schema_version", "required, must be 1");
    cfg.schema_version = 1;

    const auto system = root.string("system", "");
    if (system == "lorenz") {
        cfg.system = SystemKind::lorenz;
    } else if (system == "power3bus") {
        cfg.system = SystemKind::power3bus;
    } else {
        Node::fail_at("/system", "expected \"lorenz\" or \"power3bus\"");
    }

    try {
        if (root.has("params")) {
            auto params = root.object("params");
            if (cfg.system == SystemKind::lorenz) {
                read_params(params, cfg.lorenz, dynsim::kLorenzParameterNames);
            } else {
                read_params(params, cfg.power, dynsim::kPower3BusParameterNames);
            }
            params.finish();
        }
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.rfind("field '", 0) == 0) throw;
        Node::fail_at("/params", msg);
    }

    if (root.has("network")) {
        if (cfg.system != SystemKind::power3bus) Node::fail_at("/network", "only valid for power3bus");
        auto net = root.object("network");
        cfg.network.x_line = net.number("x_line", cfg.network.x_line);
        cfg.network.E0 = net.number("E0", cfg.network.E0);
        cfg.network.X0 = net.number("X0", cfg.network.X0);
        net.finish();
    }

    if (root.has("schedule")) {
        const auto& arr = root.raw("schedule");
        if (!arr.is_array()) Node::fail_at("/schedule", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Node entry(arr[i], "/schedule/" + std::to_string(i));
            dynsim::ScheduleEntry e;
            if (!entry.has("time_s")) entry.fail("missing time_s");
            e.time_s = entry.number("time_s", 0.0);
            e.parameter = entry.string("parameter", "");
            if (!entry.has("value")) entry.fail("missing value");
            e.value = entry.number("value", 0.0);
            entry.finish();
            cfg.schedule.entries.push_back(std::move(e));
        }
    }

    if (!root.has("sim")) Node::fail_at("/sim", "required");
    {
        auto sim = root.object("sim");
        cfg.sim.dt = sim.number("dt", 0.0);
        cfg.sim.sample_rate = sim.number("sample_rate", cfg.sim.sample_rate);
        if (!sim.has("duration")) sim.fail("missing duration");
        cfg.sim.duration = sim.number("duration", 0.0);
        cfg.sim.warmup = sim.number("warmup", 0.0);
        cfg.sim.divergence_bound = sim.number("divergence_bound", cfg.sim.divergence_bound);
        if (sim.has("initial_state")) {
            const auto& arr = sim.raw("initial_state");
            if (!arr.is_array()) Node::fail_at("/sim/initial_state", "expected an array of numbers");
            for (const auto& v : arr) {
                if (!v.is_number()) Node::fail_at("/sim/initial_state", "expected an array of numbers");
                cfg.sim.initial_state.push_back(v.get<double>());
            }
        } else {
            cfg.sim.initial_state = default_initial_state(cfg.system);
        }
        sim.finish();
    }

    if (root.has("noise_snr_db")) cfg.noise_snr_db = root.number("noise_snr_db", 0.0);

    if (root.has("window")) {
        auto w = root.object("window");
        cfg.window.length = w.count("length", cfg.window.length);
        cfg.window.stride = w.count("stride", cfg.window.stride);
        w.finish();
    }
    cfg.phi = root.string("phi", cfg.phi);
    cfg.standardize = root.boolean("standardize", cfg.standardize);
    try {
        cfg.subset = parse_channel_subset(root.string("subset", ""));
    } catch (const ConfigError& e) {
        Node::fail_at("/subset", e.what());
    }

    if (root.has("detection")) {
        auto d = root.object("detection");
        try {
            cfg.detection.method = detect::parse_method(d.string("method", "reference-window"));
        } catch (const ConfigError& e) {
            Node::fail_at("/detection/method", e.what());
        }
        cfg.detection.threshold = d.number("threshold", cfg.detection.threshold);
        if (d.has("reference")) {
            const auto& r = d.raw("reference");
            if (!r.is_array() || r.size() != 2 || !r[0].is_number_unsigned() || !r[1].is_number_unsigned()) {
                Node::fail_at("/detection/reference", "expected [begin, end] window indices");
            }
            cfg.detection.reference = {r[0].get<std::size_t>(), r[1].get<std::size_t>()};
        }
        cfg.detection.min_gap = d.count("min_gap", cfg.detection.min_gap);
        cfg.detection.kappa4 = d.number("kappa4", cfg.detection.kappa4);
        cfg.detection.rebaseline = d.boolean("rebaseline", cfg.detection.rebaseline);
        d.finish();
    }

    if (root.has("seed")) {
        const auto& s = root.raw("seed");
        if (!s.is_number_unsigned()) Node::fail_at("/seed", "expected a non-negative integer");
        cfg.seed = s.get<std::uint64_t>();
    }

    if (root.has("outputs")) {
        auto o = root.object("outputs");
        cfg.outputs.raw = o.string("raw", "");
        cfg.outputs.les = o.string("les", "");
        cfg.outputs.events = o.string("events", "");
        o.finish();
    }

    if (root.has("entities")) {
        const auto& arr = root.raw("entities");
        if (!arr.is_array()) Node::fail_at("/entities", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Node n(arr[i], "/entities/" + std::to_string(i));
            EntityDescriptor e;
            e.id = n.string("id", "");
            e.kind = n.string("kind", "");
            try {
                e.channels = parse_channel_subset(n.string("channels", ""));
            } catch (const ConfigError& err) {
                n.fail(err.what());
            }
            if (n.has("attributes")) {
                if (!arr[i].at("attributes").is_object()) {
                    Node::fail_at(n.child_path("attributes"), "expected an object");
                }
                for (auto it = arr[i].at("attributes").begin(); it != arr[i].at("attributes").end(); ++it) {
                    if (!it.value().is_string()) {
                        Node::fail_at(n.child_path("attributes") + "/" + it.key(), "expected a string");
                    }
                    e.attributes[it.key()] = it.value().get<std::string>();
                }
            }
            n.finish();
            cfg.entities.push_back(std::move(e));
        }
    }
    root.finish();

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    json params;
    if (cfg.system == SystemKind::lorenz) {
        j["system"] = "lorenz";
        params = {{"sigma", cfg.lorenz.sigma}, {"rho", cfg.lorenz.rho}, {"beta", cfg.lorenz.beta}};
    } else {
        j["system"] = "power3bus";
        const auto& p = cfg.power;
        params = {{"omega_B", p.omega_B}, {"H", p.H},     {"d", p.d},         {"P_m", p.P_m},
                  {"T_d0_prime", p.T_d0_prime},          {"x_d", p.x_d},     {"x_d_prime", p.x_d_prime},
                  {"T_A", p.T_A},         {"K_A", p.K_A}, {"V_ref", p.V_ref}, {"q1", p.q1},
                  {"q2", p.q2},           {"q3", p.q3},   {"B_c", p.B_c},     {"p1", p.p1},
                  {"p2", p.p2},           {"p3", p.p3},   {"P0", p.P0},       {"Q0", p.Q0},
                  {"P1d", p.P1d},         {"Q1d", p.Q1d}, {"P", p.P},         {"Q", p.Q}};
        j["network"] = {{"x_line", cfg.network.x_line}, {"E0", cfg.network.E0}, {"X0", cfg.network.X0}};
    }
    j["params"] = params;
    j["schedule"] = json::array();
    for (const auto& e : cfg.schedule.entries) {
        j["schedule"].push_back({{"time_s", e.time_s}, {"parameter", e.parameter}, {"value", e.value}});
    }
    j["sim"] = {{"dt", cfg.sim.effective_dt()},
                {"sample_rate", cfg.sim.sample_rate},
                {"duration", cfg.sim.duration},
                {"initial_state", cfg.sim.initial_state},
                {"warmup", cfg.sim.warmup},
                {"divergence_bound", cfg.sim.divergence_bound}};
    if (cfg.noise_snr_db) j["noise_snr_db"] = *cfg.noise_snr_db;
    j["window"] = {{"length", cfg.window.length}, {"stride", cfg.window.stride}};
    j["phi"] = cfg.phi;
    j["standardize"] = cfg.standardize;
    j["subset"] = format_channel_subset(cfg.subset);
    j["detection"] = {{"method", std::string(detect::method_name(cfg.detection.method))},
                      {"threshold", cfg.detection.threshold},
                      {"reference", {cfg.detection.reference.begin, cfg.detection.reference.end}},
                      {"min_gap", cfg.detection.min_gap},
                      {"kappa4", cfg.detection.kappa4},
                      {"rebaseline", cfg.detection.rebaseline}};
    if (cfg.seed) j["seed"] = *cfg.seed;
    return j.dump(2) + "\n";
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed,
                           std::optional<std::uint64_t> config_seed) {
    if (explicit_seed) return *explicit_seed;
    if (config_seed) return *config_seed;
    if (const char* env = std::getenv("SPECTRAL_SENTINEL_SEED"); env && *env) {
        std::uint64_t v = 0;
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw ConfigError("SPECTRAL_SENTINEL_SEED: expected a non-negative integer, got '" +
                              std::string(s) + "'");
        }
        return v;
    }
    return 0;
}

} // namespace sentinel
