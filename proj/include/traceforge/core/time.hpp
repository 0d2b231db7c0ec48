#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "traceforge/core/error.hpp"

namespace traceforge {

/// Point on the project timeline, UTC seconds since the Unix epoch.
struct Timestamp {
    std::int64_t epoch_seconds = 0;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

inline constexpr double kSecondsPerHour = 3600.0;

/// Signed difference (later - earlier) in fractional hours.
inline double hours_between(Timestamp earlier, Timestamp later) {
    return static_cast<double>(later.epoch_seconds - earlier.epoch_seconds) / kSecondsPerHour;
}

inline Timestamp operator+(Timestamp t, std::int64_t seconds) {
    return Timestamp{t.epoch_seconds + seconds};
}

namespace detail {

// Howard Hinnant's days_from_civil / civil_from_days.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
    std::int64_t year;
    unsigned month;
    unsigned day;
};

constexpr Civil civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
}

inline int parse_fixed(std::string_view text, std::size_t pos, std::size_t width,
                       std::string_view whole) {
    int value = 0;
    if (pos + width > text.size()) {
        throw ParseError("truncated timestamp: '" + std::string(whole) + "'");
    }
    const char* first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + width, value);
    if (ec != std::errc{} || ptr != first + width) {
        throw ParseError("malformed timestamp: '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace detail

/// Parses ISO-8601 `YYYY-MM-DD[T ]hh:mm[:ss[.fff]][Z|±hh[:]mm]`, or a bare date.
/// A missing zone designator means UTC. The result is normalised to UTC.
inline Timestamp parse_iso8601(std::string_view text) {
    using detail::parse_fixed;
    const std::string_view whole = text;
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\n' ||
                             text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
        throw ParseError("malformed timestamp: '" + std::string(whole) + "'");
    }
    const int year = parse_fixed(text, 0, 4, whole);
    const int month = parse_fixed(text, 5, 2, whole);
    const int day = parse_fixed(text, 8, 2, whole);
    if (month < 1 || month > 12 || day < 1 || day > 31) {
        throw ParseError("timestamp out of range: '" + std::string(whole) + "'");
    }
    int hour = 0, minute = 0, second = 0;
    std::int64_t offset_seconds = 0;
    std::size_t pos = 10;
    if (pos < text.size()) {
        if (text[pos] != 'T' && text[pos] != ' ') {
            throw ParseError("malformed timestamp: '" + std::string(whole) + "'");
        }
        hour = parse_fixed(text, pos + 1, 2, whole);
        if (pos + 3 >= text.size() || text[pos + 3] != ':') {
            throw ParseError("malformed timestamp: '" + std::string(whole) + "'");
        }
        minute = parse_fixed(text, pos + 4, 2, whole);
        pos += 6;
        if (pos < text.size() && text[pos] == ':') {
            second = parse_fixed(text, pos + 1, 2, whole);
            pos += 3;
            if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
                ++pos;
                while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
            }
        }
        if (hour > 23 || minute > 59 || second > 60) {
            throw ParseError("timestamp out of range: '" + std::string(whole) + "'");
        }
        if (pos < text.size()) {
            const char zone = text[pos];
            if (zone == 'Z' || zone == 'z') {
                ++pos;
            } else if (zone == '+' || zone == '-') {
                const int oh = parse_fixed(text, pos + 1, 2, whole);
                std::size_t mpos = pos + 3;
                if (mpos < text.size() && text[mpos] == ':') ++mpos;
                const int om = mpos < text.size() ? parse_fixed(text, mpos, 2, whole) : 0;
                offset_seconds = (zone == '+' ? 1 : -1) * (oh * 3600 + om * 60);
                pos = mpos < text.size() ? mpos + 2 : mpos;
            }
            if (pos != text.size()) {
                throw ParseError("trailing characters in timestamp: '" + std::string(whole) + "'");
            }
        }
    }
    const std::int64_t days = detail::days_from_civil(year, static_cast<unsigned>(month),
                                                      static_cast<unsigned>(day));
    return Timestamp{days * 86400 + hour * 3600 + minute * 60 + second - offset_seconds};
}

/// Formats as `YYYY-MM-DDThh:mm:ssZ`.
inline std::string format_iso8601(Timestamp t) {
    std::int64_t secs = t.epoch_seconds;
    std::int64_t days = secs / 86400;
    std::int64_t rem = secs % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const auto civil = detail::civil_from_days(days);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(civil.year), civil.month, civil.day,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

}  // namespace traceforge
