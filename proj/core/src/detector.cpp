#include "sentinel/detector.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "sentinel/error.hpp"

namespace sentinel::detect {

void WindowSpec::validate(std::size_t channels) const {
    if (length < 2) throw ConfigError("window length must be >= 2");
    if (stride < 1) throw ConfigError("window stride must be >= 1");
    if (length < channels) {
        throw ConfigError("window length " + std::to_string(length) + " is shorter than the " +
                          std::to_string(channels) + " selected channels (aspect ratio c > 1)");
    }
}

std::size_t window_count(std::size_t samples, const WindowSpec& spec) {
    if (samples < spec.length) return 0;
    return (samples - spec.length) / spec.stride + 1;
}

namespace {

Eigen::MatrixXd window_matrix(const TimeSeries& series, std::span<const std::size_t> rows,
                              std::size_t start, std::size_t length) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(length));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto data = series.channel(rows[r]);
        for (std::size_t j = 0; j < length; ++j) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = data[start + j];
        }
    }
    return m;
}

void require_length(const TimeSeries& series, const WindowSpec& spec) {
    if (series.length() < spec.length) {
        throw SizeError("series has " + std::to_string(series.length()) +
                        " samples, shorter than one window of " + std::to_string(spec.length));
    }
}

// Runs body(k) for k in [0, count) on a few threads; rethrows the failure with the lowest index.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, std::max<std::size_t>(1, count / 8));
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::size_t failed_at = count;
    std::exception_ptr failure;

    auto run = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                body(k);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (k < failed_at) {
                    failed_at = k;
                    failure = std::current_exception();
                }
            }
        }
    };
    if (workers <= 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
        run();
    }
    if (failure) std::rethrow_exception(failure);
}

struct RefStats {
    double mean;
    double sd;
};

RefStats reference_stats(std::span<const double> tau, WindowRange r) {
    if (r.end > tau.size() || r.size() < 8) {
        throw ConfigError("reference range needs >= 8 windows inside the series");
    }
    const auto n = static_cast<double>(r.size());
    double mean = 0.0;
    for (std::size_t k = r.begin; k < r.end; ++k) mean += tau[k];
    mean /= n;
    double var = 0.0;
    for (std::size_t k = r.begin; k < r.end; ++k) var += (tau[k] - mean) * (tau[k] - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 0.0) || !(sd > 1e-15 * std::abs(mean))) {
        throw NumericError("reference windows have zero dispersion");
    }
    return {mean, sd};
}

} // namespace

std::vector<rmt::DataMatrix> sliding_windows(const TimeSeries& series, const WindowSpec& spec) {
    if (spec.length < 2 || spec.stride < 1) spec.validate(0);
    require_length(series, spec);
    std::vector<std::size_t> rows(series.channel_count());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const std::size_t count = window_count(series.length(), spec);
    std::vector<rmt::DataMatrix> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        out.emplace_back(window_matrix(series, rows, k * spec.stride, spec.length));
    }
    return out;
}

LESSeries les_series(const TimeSeries& series, const WindowSpec& spec, const TestFunction& phi,
                     bool standardize, std::span<const std::string> subset) {
    if (subset.empty()) throw ConfigError("channel subset must not be empty");
    const auto rows = series.indices_of(subset);
    spec.validate(rows.size());
    require_length(series, spec);

    const std::size_t count = window_count(series.length(), spec);
    const double c = static_cast<double>(rows.size()) / static_cast<double>(spec.length);
    TestFunction bound = phi;
    if (!phi.has_support()) {
        const auto law = rmt::mp_support(c);
        bound = phi.bind_support(law.lower, law.upper);
    }

    LESSeries out;
    out.tau.resize(count);
    out.window_end_s.resize(count);
    out.c.assign(count, c);
    out.phi = phi.name();
    out.channels.assign(subset.begin(), subset.end());
    out.window_length = spec.length;
    out.stride = spec.stride;
    out.standardized = standardize;

    parallel_for(count, [&](std::size_t k) {
        const std::size_t start = k * spec.stride;
        rmt::DataMatrix window(window_matrix(series, rows, start, spec.length));
        if (standardize) {
            try {
                window = rmt::standardize_rows(window);
            } catch (const ZeroVarianceError& e) {
                throw ZeroVarianceError("window " + std::to_string(k) + ": channel '" +
                                            subset[e.channel()] + "' has zero variance",
                                        e.channel());
            }
        }
        const auto eigs = rmt::eigenvalues_sym(rmt::covariance(window));
        out.tau[k] = rmt::les(eigs, bound);
        out.window_end_s[k] = series.time_at(start + spec.length - 1);
    });
    return out;
}

double zscore_null(double tau, const TestFunction& phi, std::size_t n, double c, double kappa4) {
    const double mean = rmt::les_mean(phi, n, c);
    const double var = rmt::les_variance(phi, rmt::SpectralNull{c, kappa4});
    if (!(var > 0.0)) throw NumericError("null-model LES variance is not positive");
    return (tau - mean) / std::sqrt(var);
}

std::vector<double> reference_zscores(std::span<const double> tau, WindowRange reference) {
    const auto stats = reference_stats(tau, reference);
    std::vector<double> out(tau.size());
    for (std::size_t k = 0; k < tau.size(); ++k) out[k] = (tau[k] - stats.mean) / stats.sd;
    return out;
}

std::vector<double> reference_score(std::span<const double> tau, WindowRange reference) {
    auto z = reference_zscores(tau, reference);
    for (double& v : z) v = std::abs(v);
    return z;
}

std::string_view method_name(Method m) {
    return m == Method::null_zscore ? "null-zscore" : "reference-window";
}

Method parse_method(std::string_view text) {
    if (text == "null-zscore") return Method::null_zscore;
    if (text == "reference-window") return Method::reference_window;
    throw ConfigError("unknown detection method '" + std::string(text) +
                      "' (expected null-zscore or reference-window)");
}

void DetectionConfig::validate() const {
    if (!(threshold > 0.0) || !std::isfinite(threshold)) {
        throw ConfigError("detection.threshold: must be > 0");
    }
    if (method == Method::reference_window && reference.size() == 0) {
        throw ConfigError("detection.reference: range must be non-empty");
    }
    if (!(kappa4 >= -2.0)) throw ConfigError("detection.kappa4: must be >= -2");
}

std::vector<DetectionEvent> detect_changepoints(std::span<const double> scores,
                                                const DetectionConfig& cfg) {
    std::vector<DetectionEvent> events;
    bool above = false;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        const bool now = scores[k] >= cfg.threshold;
        if (now && !above && (events.empty() || k - events.back().window >= cfg.min_gap)) {
            DetectionEvent e;
            e.window = k;
            e.time_s = static_cast<double>(k);
            e.score = scores[k];
            e.method = cfg.method;
            events.push_back(std::move(e));
        }
        above = now;
    }
    return events;
}

namespace {

void stamp(std::vector<DetectionEvent>& events, const LESSeries& series) {
    for (auto& e : events) {
        e.time_s = series.window_end_s[e.window];
        e.channels = series.channels;
    }
}

} // namespace

DetectionResult run_detection(const LESSeries& series, const DetectionConfig& cfg) {
    cfg.validate();
    DetectionResult result;
    const std::size_t n = series.size();

    if (cfg.method == Method::null_zscore) {
        const TestFunction phi = TestFunction::parse(series.phi);
        const std::size_t channels = series.channels.size();
        result.scores.resize(n);
        double cached_c = -1.0, mean = 0.0, sd = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (series.c[k] != cached_c) {
                cached_c = series.c[k];
                mean = rmt::les_mean(phi, channels, cached_c);
                const double var = rmt::les_variance(phi, rmt::SpectralNull{cached_c, cfg.kappa4});
                if (!(var > 0.0)) throw NumericError("null-model LES variance is not positive");
                sd = std::sqrt(var);
            }
            result.scores[k] = std::abs((series.tau[k] - mean) / sd);
        }
        result.events = detect_changepoints(result.scores, cfg);
        stamp(result.events, series);
        return result;
    }

    if (!cfg.rebaseline) {
        result.scores = reference_score(series.tau, cfg.reference);
        result.references.push_back(cfg.reference);
        result.events = detect_changepoints(result.scores, cfg);
        stamp(result.events, series);
        return result;
    }

    const std::size_t ref_len = cfg.reference.size();
    WindowRange ref = cfg.reference;
    auto stats = reference_stats(series.tau, ref);
    result.references.push_back(ref);
    result.scores.assign(n, 0.0);
    auto score = [&](std::size_t k) { return std::abs(series.tau[k] - stats.mean) / stats.sd; };

    for (std::size_t k = 0; k < std::min(ref.end, n); ++k) result.scores[k] = score(k);

    bool above = false;
    std::size_t k = ref.end;
    while (k < n) {
        const double s = score(k);
        result.scores[k] = s;
        const bool now = s >= cfg.threshold;
        if (now && !above) {
            DetectionEvent e;
            e.window = k;
            e.score = s;
            e.method = cfg.method;
            result.events.push_back(std::move(e));

            const WindowRange next{k + cfg.min_gap, k + cfg.min_gap + ref_len};
            if (next.end > n) {
                for (std::size_t j = k + 1; j < n; ++j) result.scores[j] = score(j);
                break;
            }
            for (std::size_t j = k + 1; j < next.begin; ++j) result.scores[j] = score(j);
            ref = next;
            stats = reference_stats(series.tau, ref);
            result.references.push_back(ref);
            for (std::size_t j = ref.begin; j < ref.end; ++j) result.scores[j] = score(j);
            k = ref.end;
            above = false;
            continue;
        }
        above = now;
        ++k;
    }
    stamp(result.events, series);
    return result;
}

std::vector<double> zero_sequence_indicator(const TimeSeries& currents, std::size_t cycle) {
    if (currents.channel_count() != 3) {
        throw ConfigError("zero-sequence indicator needs exactly 3 phase-current channels, got " +
                          std::to_string(currents.channel_count()));
    }
    if (cycle < 2) throw ConfigError("zero-sequence cycle length must be >= 2 samples");
    const auto a = currents.channel(0);
    const auto b = currents.channel(1);
    const auto c = currents.channel(2);
    const std::size_t cycles = currents.length() / cycle;
    std::vector<double> out(cycles);
    for (std::size_t k = 0; k < cycles; ++k) {
        double sum = 0.0;
        for (std::size_t i = k * cycle; i < (k + 1) * cycle; ++i) {
            const double i0 = (a[i] + b[i] + c[i]) / 3.0;
            sum += i0 * i0;
        }
        out[k] = std::sqrt(sum / static_cast<double>(cycle));
    }
    return out;
}

} // namespace sentinel::detect
