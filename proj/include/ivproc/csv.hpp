#pragma once

#include "ivproc/errors.hpp"
#include "ivproc/hawkes.hpp"
#include "ivproc/series.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ivproc {

/// Shortest decimal form that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer a shorter representation when it parses back bit-identically
    for (int precision = 1; precision <= 16; ++precision) {
        char shorter[32];
        std::snprintf(shorter, sizeof(shorter), "%.*g", precision, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline double parse_double(const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw argument_error("cannot parse number from '" + text + "'");
    return v;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw argument_error("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw argument_error("cannot write file: " + path);
    out << content;
}

} // namespace detail

// --------------------------------------------------------------------------
// Series CSV: header "t,x1,...,xn", one row per time point, t starting at 1.
// --------------------------------------------------------------------------

inline std::string series_to_csv(const SeriesData& x) {
    std::ostringstream out;
    out << "t";
    for (int j = 1; j <= x.dim(); ++j) out << ",x" << j;
    out << "\n";
    for (long t = 0; t < x.len(); ++t) {
        out << (t + 1);
        for (int j = 0; j < x.dim(); ++j) out << ',' << format_double(x.values(t, j));
        out << "\n";
    }
    return out.str();
}

inline SeriesData series_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw argument_error("empty series CSV");
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "t")
        throw argument_error("series CSV must start with header t,x1,...");
    const int n = static_cast<int>(header.size()) - 1;

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto fields = detail::split_csv_line(line);
        if (static_cast<int>(fields.size()) != n + 1)
            throw argument_error("series CSV row has wrong field count: " + line);
        std::vector<double> row(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = detail::parse_double(fields[static_cast<std::size_t>(j) + 1]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw argument_error("series CSV has no data rows");
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), n);
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (int j = 0; j < n; ++j) values(static_cast<Eigen::Index>(t), j) = rows[t][static_cast<std::size_t>(j)];
    return make_series(std::move(values));
}

inline void write_series_csv(const std::string& path, const SeriesData& x) {
    detail::spit(path, series_to_csv(x));
}

inline SeriesData read_series_csv(const std::string& path) {
    return series_from_csv(detail::slurp(path));
}

// --------------------------------------------------------------------------
// Event-log CSV: header "process,time", rows sorted by time, process indices
// 1-based. The observation horizon is carried in a leading comment so the
// log round-trips; files without one fall back to the last event time.
// --------------------------------------------------------------------------

inline std::string event_log_to_csv(const EventLog& log) {
    std::vector<std::pair<double, int>> merged;
    for (int p = 0; p < log.dim(); ++p)
        for (double t : log.events[static_cast<std::size_t>(p)]) merged.emplace_back(t, p + 1);
    std::sort(merged.begin(), merged.end());

    std::ostringstream out;
    out << "# horizon=" << format_double(log.horizon) << "\n";
    out << "# processes=" << log.dim() << "\n";
    out << "process,time\n";
    for (const auto& [t, p] : merged) out << p << ',' << format_double(t) << "\n";
    return out.str();
}

inline EventLog event_log_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    double horizon = -1.0;
    int declared_dim = 0;
    bool header_seen = false;
    std::vector<std::pair<int, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                const std::string key = line.substr(1, eq - 1);
                if (key.find("horizon") != std::string::npos)
                    horizon = detail::parse_double(line.substr(eq + 1));
                else if (key.find("processes") != std::string::npos)
                    declared_dim = static_cast<int>(detail::parse_double(line.substr(eq + 1)));
            }
            continue;
        }
        if (!header_seen) {
            const auto header = detail::split_csv_line(line);
            if (header.size() != 2 || header[0] != "process" || header[1] != "time")
                throw argument_error("event CSV must have header process,time");
            header_seen = true;
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 2) throw argument_error("event CSV row has wrong field count: " + line);
        const int process = static_cast<int>(detail::parse_double(fields[0]));
        const double time = detail::parse_double(fields[1]);
        if (process < 1) throw argument_error("process indices are 1-based");
        rows.emplace_back(process, time);
    }
    if (!header_seen) throw argument_error("event CSV missing header");

    int n = declared_dim;
    double last = 0.0;
    for (const auto& [p, t] : rows) {
        n = std::max(n, p);
        last = std::max(last, t);
    }
    if (n < 1) throw argument_error("event CSV contains no processes");
    EventLog log;
    log.horizon = horizon > 0.0 ? horizon : last;
    log.events.assign(static_cast<std::size_t>(n), {});
    for (const auto& [p, t] : rows) log.events[static_cast<std::size_t>(p) - 1].push_back(t);
    for (auto& times : log.events) std::sort(times.begin(), times.end());
    return log;
}

inline void write_event_log_csv(const std::string& path, const EventLog& log) {
    detail::spit(path, event_log_to_csv(log));
}

inline EventLog read_event_log_csv(const std::string& path) {
    return event_log_from_csv(detail::slurp(path));
}

// --------------------------------------------------------------------------
// Labeled covariance CSV for the estimate-cov output.
// --------------------------------------------------------------------------

inline std::string intcov_to_csv(const IntCov& c) {
    std::ostringstream out;
    out << "# provenance=" << (c.provenance == CovProvenance::theoretical ? "theoretical" : "estimated")
        << "\n";
    for (std::size_t j = 0; j < c.labels.size(); ++j)
        out << (j == 0 ? "" : ",") << 'x' << c.labels[j];
    out << "\n";
    for (int i = 0; i < c.dim(); ++i) {
        for (int j = 0; j < c.dim(); ++j) out << (j == 0 ? "" : ",") << format_double(c.c(i, j));
        out << "\n";
    }
    return out.str();
}

/// Detect the payload of a CSV file by its header line: "t,..." marks a
/// series, "process,time" an event log.
inline bool csv_looks_like_event_log(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        return line.rfind("process,", 0) == 0;
    }
    return false;
}

} // namespace ivproc
