#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "microgeo/error.hpp"
#include "microgeo/grid.hpp"

namespace microgeo {

/// UTC instant with microsecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

/// One geotagged text record.
struct Tweet {
    std::string id;
    double lon = 0.0;
    double lat = 0.0;
    std::string text;
    std::string lang;
    std::optional<Timestamp> created_at;

    friend bool operator==(const Tweet&, const Tweet&) = default;
};

/// Parses "YYYY-MM-DDTHH:MM:SS[.frac](Z|+HH:MM|-HH:MM)". Returns nullopt on anything else.
inline std::optional<Timestamp> parse_rfc3339(std::string_view s) {
    using namespace std::chrono;
    std::size_t pos = 0;
    const auto digits = [&](std::size_t count, int& out) {
        if (pos + count > s.size()) return false;
        out = 0;
        for (std::size_t k = 0; k < count; ++k) {
            const char c = s[pos + k];
            if (c < '0' || c > '9') return false;
            out = out * 10 + (c - '0');
        }
        pos += count;
        return true;
    };
    const auto expect = [&](std::string_view options) {
        if (pos >= s.size() || options.find(s[pos]) == std::string_view::npos) return false;
        ++pos;
        return true;
    };

    int y, mo, d, h, mi, sec;
    if (!digits(4, y) || !expect("-") || !digits(2, mo) || !expect("-") || !digits(2, d) || !expect("Tt ") ||
        !digits(2, h) || !expect(":") || !digits(2, mi) || !expect(":") || !digits(2, sec)) {
        return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;

    long long micros = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        const std::size_t start = pos;
        long long scale = 100000;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            micros += (s[pos] - '0') * scale;  // digits past microseconds truncate
            scale /= 10;
            ++pos;
        }
        if (pos == start) return std::nullopt;
    }

    minutes offset{0};
    if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
        ++pos;
    } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        const int sign = s[pos] == '-' ? -1 : 1;
        ++pos;
        int oh, om;
        if (!digits(2, oh) || !expect(":") || !digits(2, om) || oh > 23 || om > 59) return std::nullopt;
        offset = minutes{sign * (oh * 60 + om)};
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;

    const auto local = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} + microseconds{micros};
    return time_point_cast<microseconds>(local - offset);
}

/// Formats as "YYYY-MM-DDTHH:MM:SS[.ffffff]Z".
inline std::string format_rfc3339(Timestamp t) {
    using namespace std::chrono;
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const auto tod = t - day_point;
    const auto h = duration_cast<hours>(tod);
    const auto mi = duration_cast<minutes>(tod - h);
    const auto sec = duration_cast<seconds>(tod - h - mi);
    const auto us = (tod - h - mi - sec).count();
    char buf[48];
    int len = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02lld", static_cast<int>(ymd.year()),
                            static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                            static_cast<int>(h.count()), static_cast<int>(mi.count()),
                            static_cast<long long>(sec.count()));
    if (us != 0) len += std::snprintf(buf + len, sizeof buf - len, ".%06lld", static_cast<long long>(us));
    std::snprintf(buf + len, sizeof buf - len, "Z");
    return buf;
}

/// Parses one newline-delimited record. `line_no` is 1-based and only used for errors.
inline Tweet parse_record(std::string_view line, std::size_t line_no = 1) {
    using nlohmann::json;
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(line_no, std::string("malformed record: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "record is not an object");

    const auto field = [&](const char* key) -> const json& {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) throw ParseError(line_no, std::string("missing field '") + key + "'");
        return *it;
    };
    const auto string_field = [&](const char* key) {
        const auto& v = field(key);
        if (!v.is_string()) throw ParseError(line_no, std::string("field '") + key + "' is not a string");
        return v.get<std::string>();
    };
    const auto number_field = [&](const char* key) {
        const auto& v = field(key);
        if (!v.is_number()) throw ParseError(line_no, std::string("field '") + key + "' is not numeric");
        return v.get<double>();
    };

    Tweet t;
    t.id = string_field("id");
    if (t.id.empty()) throw ParseError(line_no, "empty id");
    t.lon = number_field("lon");
    t.lat = number_field("lat");
    if (!(t.lon >= -180.0 && t.lon <= 180.0)) throw ParseError(line_no, "lon outside [-180, 180]");
    if (!(t.lat >= -90.0 && t.lat <= 90.0)) throw ParseError(line_no, "lat outside [-90, 90]");
    t.text = string_field("text");
    t.lang = string_field("lang");
    if (auto it = obj.find("created_at"); it != obj.end() && !it->is_null()) {
        if (!it->is_string()) throw ParseError(line_no, "field 'created_at' is not a string");
        t.created_at = parse_rfc3339(it->get_ref<const std::string&>());
        if (!t.created_at) throw ParseError(line_no, "created_at is not an RFC 3339 timestamp");
    }
    return t;
}

/// Serializes to the record format (single line, no trailing newline).
inline std::string serialize_record(const Tweet& t) {
    nlohmann::ordered_json obj;
    obj["id"] = t.id;
    obj["lon"] = t.lon;
    obj["lat"] = t.lat;
    obj["text"] = t.text;
    obj["lang"] = t.lang;
    if (t.created_at) obj["created_at"] = format_rfc3339(*t.created_at);
    return obj.dump();
}

/// Half-open [since, until) window; either end may be open.
struct TimeRange {
    std::optional<Timestamp> since;
    std::optional<Timestamp> until;

    bool contains(Timestamp t) const noexcept {
        return (!since || t >= *since) && (!until || t < *until);
    }
};

struct CorpusFilter {
    Extent extent = caba_extent();
    std::optional<std::string> lang;
    std::optional<TimeRange> time_range;

    void validate() const {
        if (time_range && time_range->since && time_range->until && !(*time_range->since < *time_range->until)) {
            throw ConfigError("time range requires start < end");
        }
    }

    /// Records without a timestamp fail an active time filter.
    bool accepts(const Tweet& t) const {
        if (!extent.contains(t.lon, t.lat)) return false;
        if (lang && t.lang != *lang) return false;
        if (time_range && (!t.created_at || !time_range->contains(*t.created_at))) return false;
        return true;
    }
};

/// Per-line accounting. Blank lines are not records and are tallied separately.
struct IngestReport {
    std::size_t accepted = 0;
    std::size_t rejected_parse = 0;
    std::size_t rejected_filter = 0;
    std::size_t blank_lines = 0;

    std::size_t records() const noexcept { return accepted + rejected_parse + rejected_filter; }
    friend bool operator==(const IngestReport&, const IngestReport&) = default;
};

struct IngestOptions {
    bool strict = false;
    /// Worker threads for parsing; 0 picks the hardware concurrency.
    unsigned threads = 0;
    /// Lines parsed per batch; bounds memory independently of input size.
    std::size_t batch_lines = 1 << 16;
};

struct IngestResult {
    std::vector<Tweet> tweets;
    IngestReport report;
};

namespace detail {

inline bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

enum class LineOutcome : unsigned char { accepted, blank, parse_error, filtered };

struct ParsedLine {
    LineOutcome outcome = LineOutcome::blank;
    Tweet tweet;
    std::optional<ParseError> error;
};

inline ParsedLine classify_line(const std::string& line, std::size_t line_no, const CorpusFilter& filter) {
    ParsedLine out;
    if (is_blank(line)) return out;
    try {
        out.tweet = parse_record(line, line_no);
    } catch (const ParseError& e) {
        out.outcome = LineOutcome::parse_error;
        out.error = e;
        return out;
    }
    out.outcome = filter.accepts(out.tweet) ? LineOutcome::accepted : LineOutcome::filtered;
    return out;
}

}  // namespace detail

/// Parses and filters a newline-delimited stream, keeping input order.
/// Batches are split into contiguous per-thread chunks and merged in order.
inline IngestResult ingest(std::istream& source, const CorpusFilter& filter, const IngestOptions& options = {}) {
    filter.validate();
    if (!source) throw IoError("corpus source is not readable");

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    const std::size_t batch = std::max<std::size_t>(1, options.batch_lines);

    IngestResult result;
    std::vector<std::string> lines;
    std::vector<detail::ParsedLine> parsed;
    std::size_t line_base = 0;  // lines consumed before the current batch

    while (true) {
        lines.clear();
        std::string line;
        while (lines.size() < batch && std::getline(source, line)) lines.push_back(std::move(line));
        if (lines.empty()) break;
        if (source.bad()) throw IoError("error while reading corpus source");

        parsed.assign(lines.size(), {});
        const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, lines.size() / 1024 + 1));
        const auto run = [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k) {
                parsed[k] = detail::classify_line(lines[k], line_base + k + 1, filter);
            }
        };
        if (workers <= 1) {
            run(0, lines.size());
        } else {
            std::vector<std::jthread> pool;
            const std::size_t chunk = (lines.size() + workers - 1) / workers;
            for (unsigned w = 0; w < workers; ++w) {
                const std::size_t begin = w * chunk;
                const std::size_t end = std::min(lines.size(), begin + chunk);
                if (begin < end) pool.emplace_back(run, begin, end);
            }
        }

        for (auto& p : parsed) {
            switch (p.outcome) {
                case detail::LineOutcome::blank: ++result.report.blank_lines; break;
                case detail::LineOutcome::filtered: ++result.report.rejected_filter; break;
                case detail::LineOutcome::parse_error:
                    if (options.strict) throw *p.error;
                    ++result.report.rejected_parse;
                    break;
                case detail::LineOutcome::accepted:
                    ++result.report.accepted;
                    result.tweets.push_back(std::move(p.tweet));
                    break;
            }
        }
        line_base += lines.size();
        if (source.eof()) break;
    }
    if (source.bad()) throw IoError("error while reading corpus source");
    return result;
}

inline IngestResult ingest_file(const std::string& path, const CorpusFilter& filter, const IngestOptions& options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file '" + path + "'");
    return ingest(in, filter, options);
}

inline void write_corpus(std::ostream& os, const std::vector<Tweet>& tweets) {
    for (const auto& t : tweets) os << serialize_record(t) << '\n';
}

}  // namespace microgeo
