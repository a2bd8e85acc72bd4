#include "sentinel/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "sentinel/error.hpp"

namespace sentinel::io {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path.string() + "'");
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

void append_fixed(std::string& out, double v) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.9f", v);
    out.append(buf, static_cast<std::size_t>(n));
}

void append_general(std::string& out, double v) {
    if (std::isnan(v)) {
        out += "nan";
        return;
    }
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.append(buf, static_cast<std::size_t>(n));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view field, std::size_t line) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    if (field == "nan" || field == "NaN") return std::nan("");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("malformed number '" + std::string(field) + "'", line);
    }
    return v;
}

// Rounds a rate estimated from printed timestamps back to 9 significant digits.
double tidy_rate(double rate) {
    const double mag = std::pow(10.0, std::floor(std::log10(rate)) - 8.0);
    return std::round(rate / mag) * mag;
}

} // namespace

std::string format_timeseries_csv(const TimeSeries& series) {
    std::string out = "t";
    for (const auto& ch : series.channels()) out += "," + ch.id + ":" + ch.name;
    out += '\n';
    out.reserve(out.size() + series.length() * (series.channel_count() + 1) * 24);
    for (std::size_t i = 0; i < series.length(); ++i) {
        append_fixed(out, series.time_at(i));
        for (std::size_t c = 0; c < series.channel_count(); ++c) {
            out += ',';
            append_general(out, series.channel(c)[i]);
        }
        out += '\n';
    }
    return out;
}

void write_timeseries_csv(const TimeSeries& series, const fs::path& path) {
    write_file_atomic(path, format_timeseries_csv(series));
}

TimeSeries parse_timeseries_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<Channel> channels;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = strip_cr(line);
        if (view.empty() || view.front() == '#') continue;
        auto fields = split(view, ',');
        if (fields.front() != "t") throw ParseError("first column must be 't'", line_no);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            auto col = fields[i];
            auto colon = col.find(':');
            Channel ch;
            ch.id = std::string(col.substr(0, colon));
            ch.name = colon == std::string_view::npos ? ch.id : std::string(col.substr(colon + 1));
            channels.push_back(std::move(ch));
        }
        have_header = true;
        break;
    }
    if (!have_header) throw ParseError("empty time-series file: header row is mandatory");

    std::vector<double> times;
    std::vector<std::vector<double>> data(channels.size());
    while (std::getline(in, line)) {
        ++line_no;
        auto view = strip_cr(line);
        if (view.empty()) continue;
        auto fields = split(view, ',');
        if (fields.size() != channels.size() + 1) {
            throw ParseError("row has " + std::to_string(fields.size()) + " columns, expected " +
                                 std::to_string(channels.size() + 1),
                             line_no);
        }
        const double t = parse_double(fields[0], line_no);
        if (!std::isfinite(t)) throw ParseError("time value is not finite", line_no);
        if (!times.empty() && !(t > times.back())) {
            throw ParseError("time column is not strictly increasing", line_no);
        }
        times.push_back(t);
        for (std::size_t c = 0; c < channels.size(); ++c) {
            const double v = parse_double(fields[c + 1], line_no);
            if (!std::isfinite(v)) throw ParseError("sample value is not finite", line_no);
            data[c].push_back(v);
        }
    }

    const double t0 = times.empty() ? 0.0 : times.front();
    double rate = 1.0;
    if (times.size() >= 2) {
        rate = tidy_rate(static_cast<double>(times.size() - 1) / (times.back() - t0));
        const double tol = 1e-6 / rate;
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (std::abs(times[i] - (t0 + static_cast<double>(i) / rate)) > tol) {
                // Header line plus data row i.
                throw ParseError("time column is not uniformly sampled", line_no - times.size() + i + 1);
            }
        }
    }
    try {
        return TimeSeries(t0, rate, std::move(channels), std::move(data));
    } catch (const ConfigError& e) {
        throw ParseError(e.what());
    }
}

TimeSeries load_timeseries_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return parse_timeseries_csv(in);
}

std::string format_les_csv(const detect::LESSeries& series, std::span<const double> scores) {
    std::string out = "# sentinel-les v1\n";
    out += "# phi=" + series.phi + "\n";
    out += "# standardize=" + std::string(series.standardized ? "1" : "0") + "\n";
    out += "# window_length=" + std::to_string(series.window_length) + "\n";
    out += "# stride=" + std::to_string(series.stride) + "\n";
    out += "# channels=" + format_channel_subset(series.channels) + "\n";
    out += "# c=";
    append_general(out, series.c.empty() ? std::nan("")
                                         : static_cast<double>(series.channels.size()) /
                                               static_cast<double>(series.window_length));
    out += "\nwindow_end_s,tau,score\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        append_fixed(out, series.window_end_s[k]);
        out += ',';
        append_general(out, series.tau[k]);
        out += ',';
        append_general(out, k < scores.size() ? scores[k] : std::nan(""));
        out += '\n';
    }
    return out;
}

void write_les_csv(const detect::LESSeries& series, std::span<const double> scores,
                   const fs::path& path) {
    write_file_atomic(path, format_les_csv(series, scores));
}

LoadedLES parse_les_csv(std::istream& in) {
    LoadedLES result;
    auto& s = result.series;
    std::map<std::string, std::string, std::less<>> meta;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = strip_cr(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            auto body = view.substr(1);
            while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
            auto eq = body.find('=');
            if (eq != std::string_view::npos) {
                meta[std::string(body.substr(0, eq))] = std::string(body.substr(eq + 1));
            }
            continue;
        }
        if (view != "window_end_s,tau,score") {
            throw ParseError("expected header 'window_end_s,tau,score'", line_no);
        }
        have_header = true;
        break;
    }
    if (!have_header) throw ParseError("LES file has no header row");

    auto need = [&](std::string_view key) -> const std::string& {
        auto it = meta.find(key);
        if (it == meta.end()) throw ParseError("LES file is missing '# " + std::string(key) + "=' metadata");
        return it->second;
    };
    auto to_size = [](const std::string& v, std::string_view key) {
        std::size_t out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size()) {
            throw ParseError("invalid '" + std::string(key) + "' metadata value '" + v + "'");
        }
        return out;
    };
    s.phi = need("phi");
    s.standardized = need("standardize") == "1";
    s.window_length = to_size(need("window_length"), "window_length");
    s.stride = to_size(need("stride"), "stride");
    try {
        s.channels = parse_channel_subset(need("channels"));
    } catch (const ConfigError& e) {
        throw ParseError(e.what());
    }
    if (s.channels.empty() || s.window_length == 0) throw ParseError("LES metadata describes an empty window");
    const double c = static_cast<double>(s.channels.size()) / static_cast<double>(s.window_length);

    while (std::getline(in, line)) {
        ++line_no;
        auto view = strip_cr(line);
        if (view.empty()) continue;
        auto fields = split(view, ',');
        if (fields.size() != 3) {
            throw ParseError("row has " + std::to_string(fields.size()) + " columns, expected 3", line_no);
        }
        const double t = parse_double(fields[0], line_no);
        const double tau = parse_double(fields[1], line_no);
        if (!std::isfinite(t) || !std::isfinite(tau)) {
            throw ParseError("window time and tau must be finite", line_no);
        }
        if (!s.window_end_s.empty() && !(t > s.window_end_s.back())) {
            throw ParseError("window times are not strictly increasing", line_no);
        }
        s.window_end_s.push_back(t);
        s.tau.push_back(tau);
        s.c.push_back(c);
        result.scores.push_back(parse_double(fields[2], line_no));
    }
    return result;
}

LoadedLES load_les_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return parse_les_csv(in);
}

} // namespace sentinel::io
