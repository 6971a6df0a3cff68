#include "qhet/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "qhet/errors.hpp"

namespace qhet {

namespace {

constexpr std::string_view kHeader = "study,n_t,mean_t,sd_t,n_c,mean_c,sd_c";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& what) {
    throw DataError(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

double parse_double(std::string_view s, const std::string& path, std::size_t line,
                    const char* column) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(path, line, std::string("column '") + column + "': malformed number '" +
                             std::string(s) + "'");
    return v;
}

int parse_count(std::string_view s, const std::string& path, std::size_t line,
                const char* column) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(path, line,
             std::string("column '") + column + "': malformed count '" + std::string(s) + "'");
    return v;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

InputDataset parse_csv_text(std::string_view text, const std::string& path_label) {
    InputDataset ds;
    ds.path = path_label;
    std::unordered_set<std::string> seen_ids;

    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = text.find('\n', start);
        const std::string_view raw =
            end == std::string_view::npos ? text.substr(start) : text.substr(start, end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;

        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        if (!header_seen) {
            const auto fields = split_fields(line);
            std::string normalized;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (i) normalized += ',';
                normalized += std::string(fields[i]);
            }
            if (normalized != kHeader)
                fail(path_label, line_no,
                     "expected header '" + std::string(kHeader) + "', got '" + normalized + "'");
            header_seen = true;
            continue;
        }

        const auto fields = split_fields(line);
        if (fields.size() != 7)
            fail(path_label, line_no,
                 "expected 7 columns, got " + std::to_string(fields.size()));

        StudySummary s;
        s.id = std::string(fields[0]);
        if (s.id.empty()) fail(path_label, line_no, "empty study id");
        if (!seen_ids.insert(s.id).second)
            fail(path_label, line_no, "duplicate study id '" + s.id + "'");
        s.n_t = parse_count(fields[1], path_label, line_no, "n_t");
        s.mean_t = parse_double(fields[2], path_label, line_no, "mean_t");
        s.sd_t = parse_double(fields[3], path_label, line_no, "sd_t");
        s.n_c = parse_count(fields[4], path_label, line_no, "n_c");
        s.mean_c = parse_double(fields[5], path_label, line_no, "mean_c");
        s.sd_c = parse_double(fields[6], path_label, line_no, "sd_c");

        if (s.n_t < 2 || s.n_c < 2)
            fail(path_label, line_no, "study '" + s.id + "': arm sizes must be >= 2");
        if (!(s.sd_t > 0.0) || !(s.sd_c > 0.0))
            fail(path_label, line_no, "study '" + s.id + "': arm SDs must be positive");

        ds.studies.push_back(std::move(s));
    }

    if (!header_seen) throw DataError(path_label + ": no data (missing header)");
    if (ds.studies.empty()) throw DataError(path_label + ": no data rows");
    return ds;
}

InputDataset parse_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv_text(buf.str(), path);
}

std::string to_csv(std::span<const StudySummary> studies) {
    std::string out{kHeader};
    out += '\n';
    for (const auto& s : studies) {
        out += s.id;
        out += ',' + std::to_string(s.n_t);
        out += ',' + format_double(s.mean_t);
        out += ',' + format_double(s.sd_t);
        out += ',' + std::to_string(s.n_c);
        out += ',' + format_double(s.mean_c);
        out += ',' + format_double(s.sd_c);
        out += '\n';
    }
    return out;
}

}  // namespace qhet
