#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

struct Channel {
    std::string id;
    std::string name;
    std::string unit;

    friend bool operator==(const Channel&, const Channel&) = default;
};

/**
 * Uniformly sampled multi-channel record.
 *
 * Every channel holds the same number of samples; sample i is taken at
 * t0 + i / sample_rate.
 */
class TimeSeries {
  public:
    TimeSeries() = default;
    TimeSeries(double t0, double sample_rate, std::vector<Channel> channels,
               std::vector<std::vector<double>> data);

    double t0() const noexcept { return t0_; }
    double sample_rate() const noexcept { return sample_rate_; }
    std::size_t length() const noexcept { return data_.empty() ? 0 : data_.front().size(); }
    std::size_t channel_count() const noexcept { return channels_.size(); }
    double duration() const noexcept { return static_cast<double>(length()) / sample_rate_; }

    double time_at(std::size_t i) const noexcept {
        return t0_ + static_cast<double>(i) / sample_rate_;
    }

    const std::vector<Channel>& channels() const noexcept { return channels_; }
    std::span<const double> channel(std::size_t i) const { return data_.at(i); }
    std::span<double> channel(std::size_t i) { return data_.at(i); }
    const std::vector<std::vector<double>>& data() const noexcept { return data_; }

    std::optional<std::size_t> index_of(std::string_view id) const;
    /// Index of each id, in the order given. Throws ConfigError on unknown ids.
    std::vector<std::size_t> indices_of(std::span<const std::string> ids) const;
    /// Copy holding only the listed channels, in the listed order.
    TimeSeries select(std::span<const std::string> ids) const;

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

  private:
    double t0_ = 0.0;
    double sample_rate_ = 1.0;
    std::vector<Channel> channels_;
    std::vector<std::vector<double>> data_;
};

/// Parses "1-24", "4,5,6" or "1-3,10" into channel ids. Empty input yields an empty list.
std::vector<std::string> parse_channel_subset(std::string_view spec);

/// Compresses ids back into the range notation when they are consecutive integers.
std::string format_channel_subset(std::span<const std::string> ids);

} // namespace sentinel
