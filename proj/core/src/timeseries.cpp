#include "sentinel/timeseries.hpp"

#include <charconv>
#include <cmath>
#include <unordered_set>

#include "sentinel/error.hpp"

namespace sentinel {

TimeSeries::TimeSeries(double t0, double sample_rate, std::vector<Channel> channels,
                       std::vector<std::vector<double>> data)
    : t0_(t0), sample_rate_(sample_rate), channels_(std::move(channels)), data_(std::move(data)) {
    if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
        throw ConfigError("time series sample_rate must be positive and finite");
    }
    if (!std::isfinite(t0_)) {
        throw ConfigError("time series t0 must be finite");
    }
    if (channels_.size() != data_.size()) {
        throw ConfigError("time series has " + std::to_string(channels_.size()) +
                          " channel descriptors but " + std::to_string(data_.size()) +
                          " data arrays");
    }
    std::unordered_set<std::string> seen;
    for (const auto& ch : channels_) {
        if (ch.id.empty()) throw ConfigError("channel id must not be empty");
        if (!seen.insert(ch.id).second) throw ConfigError("duplicate channel id '" + ch.id + "'");
    }
    for (std::size_t i = 1; i < data_.size(); ++i) {
        if (data_[i].size() != data_[0].size()) {
            throw ConfigError("channel '" + channels_[i].id + "' has " +
                              std::to_string(data_[i].size()) + " samples, expected " +
                              std::to_string(data_[0].size()));
        }
    }
}

std::optional<std::size_t> TimeSeries::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < channels_.size(); ++i) {
        if (channels_[i].id == id) return i;
    }
    return std::nullopt;
}

std::vector<std::size_t> TimeSeries::indices_of(std::span<const std::string> ids) const {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto idx = index_of(id);
        if (!idx) throw ConfigError("unknown channel id '" + id + "'");
        out.push_back(*idx);
    }
    return out;
}

TimeSeries TimeSeries::select(std::span<const std::string> ids) const {
    std::vector<Channel> chans;
    std::vector<std::vector<double>> data;
    for (auto idx : indices_of(ids)) {
        chans.push_back(channels_[idx]);
        data.push_back(data_[idx]);
    }
    return TimeSeries(t0_, sample_rate_, std::move(chans), std::move(data));
}

namespace {

long parse_int(std::string_view s) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("invalid channel number '" + std::string(s) + "' in subset");
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

} // namespace

std::vector<std::string> parse_channel_subset(std::string_view spec) {
    std::vector<std::string> ids;
    spec = trim(spec);
    while (!spec.empty()) {
        auto comma = spec.find(',');
        auto item = trim(spec.substr(0, comma));
        spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
        if (item.empty()) throw ConfigError("empty item in channel subset");
        auto dash = item.find('-', 1);
        if (dash == std::string_view::npos) {
            ids.emplace_back(item);
            continue;
        }
        long lo = parse_int(trim(item.substr(0, dash)));
        long hi = parse_int(trim(item.substr(dash + 1)));
        if (hi < lo) throw ConfigError("descending range '" + std::string(item) + "' in subset");
        for (long v = lo; v <= hi; ++v) ids.push_back(std::to_string(v));
    }
    return ids;
}

std::string format_channel_subset(std::span<const std::string> ids) {
    std::string out;
    std::size_t i = 0;
    auto as_int = [](const std::string& s) -> std::optional<long> {
        long v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
        return v;
    };
    while (i < ids.size()) {
        if (!out.empty()) out += ',';
        auto start = as_int(ids[i]);
        std::size_t j = i;
        if (start) {
            while (j + 1 < ids.size()) {
                auto next = as_int(ids[j + 1]);
                if (!next || *next != *start + static_cast<long>(j + 1 - i)) break;
                ++j;
            }
        }
        out += ids[i];
        if (j > i) out += "-" + ids[j];
        i = j + 1;
    }
    return out;
}

} // namespace sentinel
