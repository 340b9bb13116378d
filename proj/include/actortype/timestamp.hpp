#ifndef ACTORTYPE_TIMESTAMP_HPP
#define ACTORTYPE_TIMESTAMP_HPP

#include <cstdint>
#include <optional>
#include <string>

namespace actortype {

/// An RFC 3339 date or date-time.
///
/// The original text is kept verbatim so stores round-trip byte-for-byte;
/// comparisons use the parsed UTC instant. A bare date counts as midnight UTC.
class Timestamp {
public:
    Timestamp() = default;

    /// Parses "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS[.fff](Z|+-HH:MM)".
    /// Throws ValidationError on malformed input.
    static Timestamp parse(const std::string& text);

    /// Like parse() but returns nullopt instead of throwing.
    static std::optional<Timestamp> try_parse(const std::string& text);

    const std::string& text() const { return text_; }
    std::int64_t epoch_millis() const { return epoch_millis_; }
    bool empty() const { return text_.empty(); }

    /// Ordering by instant; equality by original text (round-trip identity).
    bool operator==(const Timestamp& other) const { return text_ == other.text_; }
    bool operator!=(const Timestamp& other) const { return !(*this == other); }
    bool operator<(const Timestamp& other) const { return epoch_millis_ < other.epoch_millis_; }
    bool operator<=(const Timestamp& other) const { return epoch_millis_ <= other.epoch_millis_; }
    bool operator>(const Timestamp& other) const { return epoch_millis_ > other.epoch_millis_; }
    bool operator>=(const Timestamp& other) const { return epoch_millis_ >= other.epoch_millis_; }

private:
    std::string text_;
    std::int64_t epoch_millis_ = 0;
};

/// Current wall-clock time as a second-resolution UTC timestamp.
Timestamp now_utc();

/// Activity lifetime: a required start and an optional end.
/// A missing end means the activity is ongoing; instantaneous events use start == end.
struct TimeInterval {
    Timestamp start;
    std::optional<Timestamp> end;

    bool operator==(const TimeInterval& other) const {
        return start == other.start && end == other.end;
    }
};

/// Validity window of an inference. Asserted types are valid over the
/// unbounded interval (no start, no end).
struct Validity {
    std::optional<Timestamp> start;
    std::optional<Timestamp> end;

    static Validity unbounded() { return {}; }
    static Validity of(const TimeInterval& interval) {
        return Validity{interval.start, interval.end};
    }

    bool operator==(const Validity& other) const {
        return start == other.start && end == other.end;
    }

    /// Ordering for timelines: missing start sorts first, then by instant.
    bool before(const Validity& other) const;
};

} // namespace actortype

#endif // ACTORTYPE_TIMESTAMP_HPP
