#include "guidelm/util/timestamp.hpp"

#include <charconv>
#include <cstdio>

#include "guidelm/errors.hpp"

namespace guidelm {
namespace {

int digits(std::string_view s, std::size_t pos, std::size_t len, std::string_view whole) {
    if (pos + len > s.size()) throw ValidationError("truncated timestamp: " + std::string(whole));
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') throw ValidationError("bad timestamp: " + std::string(whole));
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

void expect(std::string_view s, std::size_t pos, char c, std::string_view whole) {
    if (pos >= s.size() || s[pos] != c) throw ValidationError("bad timestamp: " + std::string(whole));
}

}  // namespace

Timestamp parse_iso8601(std::string_view s) {
    using namespace std::chrono;
    const int y = digits(s, 0, 4, s);
    expect(s, 4, '-', s);
    const int mo = digits(s, 5, 2, s);
    expect(s, 7, '-', s);
    const int d = digits(s, 8, 2, s);
    if (s.size() <= 10 || (s[10] != 'T' && s[10] != 't' && s[10] != ' '))
        throw ValidationError("bad timestamp: " + std::string(s));
    const int h = digits(s, 11, 2, s);
    expect(s, 13, ':', s);
    const int mi = digits(s, 14, 2, s);
    expect(s, 16, ':', s);
    const int sec = digits(s, 17, 2, s);
    std::size_t pos = 19;
    int ms = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int scale = 100;
        const std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            ms += (s[pos] - '0') * scale;
            scale /= 10;
            ++pos;
        }
        if (pos == start) throw ValidationError("bad timestamp: " + std::string(s));
    }
    int offset_minutes = 0;
    if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
        ++pos;
    } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        const int sign = s[pos] == '-' ? -1 : 1;
        const int oh = digits(s, pos + 1, 2, s);
        expect(s, pos + 3, ':', s);
        const int om = digits(s, pos + 4, 2, s);
        offset_minutes = sign * (oh * 60 + om);
        pos += 6;
    } else {
        throw ValidationError("timestamp lacks a zone designator: " + std::string(s));
    }
    if (pos != s.size()) throw ValidationError("trailing characters in timestamp: " + std::string(s));

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw ValidationError("out-of-range timestamp: " + std::string(s));
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} + milliseconds{ms} - minutes{offset_minutes};
}

std::string format_iso8601(Timestamp t) {
    using namespace std::chrono;
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    hh_mm_ss<milliseconds> tod{t - day_point};
    char buf[40];
    const auto ms = tod.subseconds().count();
    if (ms == 0) {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                      static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                      static_cast<long>(tod.seconds().count()));
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                      static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                      static_cast<long>(tod.seconds().count()), static_cast<long>(ms));
    }
    return buf;
}

Timestamp now_utc() {
    return std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

}  // namespace guidelm
