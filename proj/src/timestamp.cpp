#include "actortype/timestamp.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>

#include "actortype/errors.hpp"

namespace actortype {

namespace {

bool read_digits(const std::string& s, size_t pos, int count, int& out) {
    if (pos + count > s.size()) return false;
    out = 0;
    for (int i = 0; i < count; ++i) {
        char c = s[pos + i];
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        out = out * 10 + (c - '0');
    }
    return true;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return d[m - 1];
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

} // namespace

std::optional<Timestamp> Timestamp::try_parse(const std::string& text) {
    int year, month, day;
    size_t pos = 0;
    if (!read_digits(text, pos, 4, year)) return std::nullopt;
    pos += 4;
    if (pos >= text.size() || text[pos] != '-') return std::nullopt;
    ++pos;
    if (!read_digits(text, pos, 2, month)) return std::nullopt;
    pos += 2;
    if (pos >= text.size() || text[pos] != '-') return std::nullopt;
    ++pos;
    if (!read_digits(text, pos, 2, day)) return std::nullopt;
    pos += 2;
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) return std::nullopt;

    std::int64_t millis = days_from_civil(year, month, day) * 86400000;

    if (pos == text.size()) { // bare date
        Timestamp t;
        t.text_ = text;
        t.epoch_millis_ = millis;
        return t;
    }

    if (text[pos] != 'T' && text[pos] != 't') return std::nullopt;
    ++pos;
    int hour, minute, second;
    if (!read_digits(text, pos, 2, hour)) return std::nullopt;
    pos += 2;
    if (pos >= text.size() || text[pos] != ':') return std::nullopt;
    ++pos;
    if (!read_digits(text, pos, 2, minute)) return std::nullopt;
    pos += 2;
    if (pos >= text.size() || text[pos] != ':') return std::nullopt;
    ++pos;
    if (!read_digits(text, pos, 2, second)) return std::nullopt;
    pos += 2;
    if (hour > 23 || minute > 59 || second > 60) return std::nullopt; // 60 allows leap seconds
    millis += (hour * 3600 + minute * 60 + second) * 1000LL;

    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        size_t frac_start = pos;
        std::int64_t frac = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            if (pos - frac_start < 3) frac = frac * 10 + (text[pos] - '0');
            ++pos;
        }
        if (pos == frac_start) return std::nullopt;
        size_t read = pos - frac_start < 3 ? pos - frac_start : 3;
        for (size_t i = read; i < 3; ++i) frac *= 10;
        millis += frac;
    }

    if (pos >= text.size()) return std::nullopt; // offset is mandatory after a time
    if (text[pos] == 'Z' || text[pos] == 'z') {
        ++pos;
    } else if (text[pos] == '+' || text[pos] == '-') {
        int sign = text[pos] == '+' ? 1 : -1;
        ++pos;
        int oh, om;
        if (!read_digits(text, pos, 2, oh)) return std::nullopt;
        pos += 2;
        if (pos >= text.size() || text[pos] != ':') return std::nullopt;
        ++pos;
        if (!read_digits(text, pos, 2, om)) return std::nullopt;
        pos += 2;
        if (oh > 23 || om > 59) return std::nullopt;
        millis -= sign * (oh * 3600 + om * 60) * 1000LL;
    } else {
        return std::nullopt;
    }
    if (pos != text.size()) return std::nullopt;

    Timestamp t;
    t.text_ = text;
    t.epoch_millis_ = millis;
    return t;
}

Timestamp Timestamp::parse(const std::string& text) {
    auto t = try_parse(text);
    if (!t) throw ValidationError("malformed RFC 3339 timestamp: \"" + text + "\"");
    return *t;
}

Timestamp now_utc() {
    using namespace std::chrono;
    auto secs = time_point_cast<seconds>(system_clock::now()).time_since_epoch().count();
    std::int64_t days = secs / 86400;
    std::int64_t rem = secs % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    // civil_from_days, inverse of days_from_civil
    std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);

    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y + (m <= 2)), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>(rem % 3600 / 60), static_cast<long long>(rem % 60));
    return Timestamp::parse(buf);
}

bool Validity::before(const Validity& other) const {
    if (start.has_value() != other.start.has_value()) return !start.has_value();
    if (start && other.start && *start != *other.start)
        return start->epoch_millis() < other.start->epoch_millis();
    return false;
}

} // namespace actortype
