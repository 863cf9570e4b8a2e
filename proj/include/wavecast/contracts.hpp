#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wavecast {

/// One rental contract. Times are UTC epoch seconds.
struct ContractRecord {
    std::string rider_id;
    std::string bike_id;
    std::int64_t start_time = 0;
    double start_lon = 0.0;
    double start_lat = 0.0;
    std::int64_t end_time = 0;
    double end_lon = 0.0;
    double end_lat = 0.0;
};

// --- ISO-8601 UTC timestamps (YYYY-MM-DDThh:mm:ssZ) ---

namespace detail {

// Howard Hinnant's days-from-civil algorithm.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yr = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = yr + (m <= 2);
}

}  // namespace detail

/// Parse "YYYY-MM-DDThh:mm:ssZ" into UTC epoch seconds.
inline std::optional<std::int64_t> parse_utc_timestamp(std::string_view s) {
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
        s[16] != ':' || s[19] != 'Z')
        return std::nullopt;
    auto num = [&](std::size_t pos, std::size_t len, int& out) {
        auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
        return r.ec == std::errc{} && r.ptr == s.data() + pos + len;
    };
    int y, mo, d, h, mi, sec;
    if (!num(0, 4, y) || !num(5, 2, mo) || !num(8, 2, d) || !num(11, 2, h) || !num(14, 2, mi) ||
        !num(17, 2, sec))
        return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) return std::nullopt;
    return detail::days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
           h * 3600 + mi * 60 + sec;
}

inline std::string format_utc_timestamp(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int y;
    unsigned m, d;
    detail::civil_from_days(days, y, m, d);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return std::string(buf);
}

// --- contract CSV ---

inline constexpr const char* kContractCsvHeader =
    "rider_id,bike_id,start_time,start_lon,start_lat,end_time,end_lon,end_lat";

struct Rejection {
    std::size_t line = 0;
    std::string reason;
};

struct ParseResult {
    std::vector<ContractRecord> records;
    std::vector<Rejection> rejections;
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

inline bool parse_double(std::string_view s, double& out) {
    auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

}  // namespace detail

/// Validate field ranges shared by the parser and the generator.
inline std::optional<std::string> validate_record(const ContractRecord& r) {
    if (r.start_lon < -180.0 || r.start_lon > 180.0 || r.end_lon < -180.0 || r.end_lon > 180.0)
        return "longitude out of range";
    if (r.start_lat < -90.0 || r.start_lat > 90.0 || r.end_lat < -90.0 || r.end_lat > 90.0)
        return "latitude out of range";
    if (r.end_time < r.start_time) return "negative duration";
    return std::nullopt;
}

/// Parse the contract CSV stream. Invalid rows land in the rejection log with
/// their line number; in strict mode the first invalid row throws.
inline ParseResult parse_contracts(std::istream& in, bool strict = false) {
    if (!in) throw std::runtime_error("unreadable contract source");
    ParseResult result;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty contract source");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kContractCsvHeader)
        throw std::runtime_error("malformed contract header: expected \"" +
                                 std::string(kContractCsvHeader) + "\"");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto reject = [&](const std::string& reason) {
            if (strict)
                throw std::runtime_error("line " + std::to_string(lineno) + ": " + reason);
            result.rejections.push_back({lineno, reason});
        };
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 8) {
            reject("expected 8 fields, got " + std::to_string(fields.size()));
            continue;
        }
        ContractRecord r;
        r.rider_id = std::string(fields[0]);
        r.bike_id = std::string(fields[1]);
        auto st = parse_utc_timestamp(fields[2]);
        auto et = parse_utc_timestamp(fields[5]);
        if (!st || !et) {
            reject("malformed timestamp");
            continue;
        }
        r.start_time = *st;
        r.end_time = *et;
        if (!detail::parse_double(fields[3], r.start_lon) ||
            !detail::parse_double(fields[4], r.start_lat) ||
            !detail::parse_double(fields[6], r.end_lon) ||
            !detail::parse_double(fields[7], r.end_lat)) {
            reject("malformed coordinate");
            continue;
        }
        if (auto reason = validate_record(r)) {
            reject(*reason);
            continue;
        }
        result.records.push_back(std::move(r));
    }
    return result;
}

inline ParseResult parse_contracts_file(const std::string& path, bool strict = false) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open contract file: " + path);
    return parse_contracts(in, strict);
}

inline void write_contract_csv(std::ostream& out, const std::vector<ContractRecord>& records) {
    out << kContractCsvHeader << '\n';
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.10g,%.10g,%s,%.10g,%.10g\n",
                      r.rider_id.c_str(), r.bike_id.c_str(),
                      format_utc_timestamp(r.start_time).c_str(), r.start_lon, r.start_lat,
                      format_utc_timestamp(r.end_time).c_str(), r.end_lon, r.end_lat);
        out << buf;
    }
    if (!out) throw std::runtime_error("contract CSV write failed");
}

}  // namespace wavecast
