#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace contagion {

struct QuoteRow {
    std::string date;  // ISO yyyy-mm-dd
    std::string index_id;
    double open = 0.0;
    double close = 0.0;
};

struct LoadDiagnostic {
    std::size_t line = 0;
    std::string message;
};

struct QuoteDataset {
    std::vector<QuoteRow> rows;  // sorted by (index_id, date)
    std::vector<LoadDiagnostic> diagnostics;
};

namespace detail {

inline bool valid_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == 4 || i == 7) continue;
        if (s[i] < '0' || s[i] > '9') return false;
    }
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    const int day = (s[8] - '0') * 10 + (s[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

inline std::optional<double> parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace detail

// CSV with header date,index_id,open,close. Malformed rows are reported with
// line numbers and skipped; the load fails only if no row survives.
inline QuoteDataset load_quotes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_quotes: cannot open " + path);

    QuoteDataset data;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // first non-comment line is the header
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 4) {
            data.diagnostics.push_back({line_no, "expected 4 fields, got " + std::to_string(fields.size())});
            continue;
        }
        QuoteRow row;
        row.date = fields[0];
        row.index_id = fields[1];
        if (!detail::valid_iso_date(row.date)) {
            data.diagnostics.push_back({line_no, "malformed date '" + row.date + "'"});
            continue;
        }
        const auto open = detail::parse_double(fields[2]);
        const auto close = detail::parse_double(fields[3]);
        if (!open || !close) {
            data.diagnostics.push_back({line_no, "unparseable price"});
            continue;
        }
        if (*open <= 0.0 || *close <= 0.0) {
            data.diagnostics.push_back({line_no, "nonpositive price"});
            continue;
        }
        if (!seen.insert({row.index_id, row.date}).second) {
            data.diagnostics.push_back({line_no, "duplicate (date,index_id) " + row.date + "," + row.index_id});
            continue;
        }
        row.open = *open;
        row.close = *close;
        data.rows.push_back(std::move(row));
    }
    if (!header_seen) throw std::runtime_error("load_quotes: missing header row in " + path);
    if (data.rows.empty()) throw std::runtime_error("load_quotes: no valid rows in " + path);
    std::sort(data.rows.begin(), data.rows.end(), [](const QuoteRow& a, const QuoteRow& b) {
        return a.index_id != b.index_id ? a.index_id < b.index_id : a.date < b.date;
    });
    return data;
}

enum class ReturnKind { OpenClose, CloseOpen };
enum class ReturnConvention { Simple, Log };

struct ReturnSeries {
    std::string index_id;
    ReturnKind kind = ReturnKind::OpenClose;
    std::vector<std::pair<std::string, double>> entries;  // (date, value), dates strictly increasing
};

// OpenClose on day d: (close_d - open_d)/open_d. CloseOpen spanning d -> d+1:
// (open_{d+1} - close_d)/close_d, dated at d; consecutive rows define
// adjacency, calendar gaps are allowed.
inline std::vector<ReturnSeries> compute_returns(const QuoteDataset& data, ReturnKind kind,
                                                 ReturnConvention convention = ReturnConvention::Simple) {
    auto ret = [&](double from, double to) {
        return convention == ReturnConvention::Simple ? (to - from) / from : std::log(to / from);
    };
    std::vector<ReturnSeries> out;
    std::size_t i = 0;
    while (i < data.rows.size()) {
        std::size_t j = i;
        while (j < data.rows.size() && data.rows[j].index_id == data.rows[i].index_id) ++j;
        ReturnSeries series;
        series.index_id = data.rows[i].index_id;
        series.kind = kind;
        if (kind == ReturnKind::OpenClose) {
            for (std::size_t k = i; k < j; ++k)
                series.entries.emplace_back(data.rows[k].date, ret(data.rows[k].open, data.rows[k].close));
        } else {
            for (std::size_t k = i; k + 1 < j; ++k)
                series.entries.emplace_back(data.rows[k].date, ret(data.rows[k].close, data.rows[k + 1].open));
        }
        out.push_back(std::move(series));
        i = j;
    }
    return out;
}

enum class AlignmentLag { SameDay, NextDay };
enum class BinBy { Magnitude, Signed };

struct ConditionalBin {
    double lo = 0.0;
    double hi = 0.0;
    long long count = 0;
    std::optional<double> probability;  // absent for empty bins
};

struct ConditionalBins {
    std::vector<ConditionalBin> bins;
    long long aligned_pairs = 0;   // nonzero pairs that landed in some bin
    long long dropped_zero = 0;    // pairs dropped because either sign was undefined
    long long out_of_range = 0;    // nonzero pairs outside the binned range
};

// Sign-agreement probability of the response return, binned by the
// conditioning return. Zero returns carry no sign and are dropped from both
// sides. NextDay pairs each aligned date with the following aligned date's
// response.
inline ConditionalBins change_blindness(const ReturnSeries& conditioning, const ReturnSeries& response,
                                        const std::vector<double>& edges,
                                        AlignmentLag lag = AlignmentLag::SameDay,
                                        BinBy bin_by = BinBy::Magnitude) {
    if (edges.size() < 2) throw std::invalid_argument("change_blindness: need at least two bin edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (edges[i] <= edges[i - 1]) throw std::invalid_argument("change_blindness: edges must increase");

    std::map<std::string, double> resp;
    for (const auto& [date, value] : response.entries) resp[date] = value;
    std::vector<std::pair<double, double>> pairs;  // (conditioning, response)
    std::vector<std::pair<double, std::string>> cond_aligned;
    std::vector<double> resp_aligned;
    for (const auto& [date, value] : conditioning.entries) {
        auto it = resp.find(date);
        if (it == resp.end()) continue;
        cond_aligned.emplace_back(value, date);
        resp_aligned.push_back(it->second);
    }
    if (cond_aligned.empty()) throw std::runtime_error("change_blindness: no date overlap between series");
    const std::size_t shift = lag == AlignmentLag::SameDay ? 0 : 1;
    for (std::size_t k = 0; k + shift < cond_aligned.size(); ++k)
        pairs.emplace_back(cond_aligned[k].first, resp_aligned[k + shift]);

    ConditionalBins out;
    out.bins.resize(edges.size() - 1);
    std::vector<long long> agree(out.bins.size(), 0);
    for (std::size_t b = 0; b < out.bins.size(); ++b) {
        out.bins[b].lo = edges[b];
        out.bins[b].hi = edges[b + 1];
    }
    for (const auto& [c, r] : pairs) {
        if (c == 0.0 || r == 0.0) {
            ++out.dropped_zero;
            continue;
        }
        const double key = bin_by == BinBy::Magnitude ? std::abs(c) : c;
        const auto it = std::upper_bound(edges.begin(), edges.end(), key);
        if (it == edges.begin() || it == edges.end()) {
            ++out.out_of_range;
            continue;
        }
        const std::size_t b = static_cast<std::size_t>(it - edges.begin()) - 1;
        ++out.bins[b].count;
        ++out.aligned_pairs;
        if ((c > 0.0) == (r > 0.0)) ++agree[b];
    }
    for (std::size_t b = 0; b < out.bins.size(); ++b)
        if (out.bins[b].count > 0)
            out.bins[b].probability = static_cast<double>(agree[b]) / static_cast<double>(out.bins[b].count);
    return out;
}

}  // namespace contagion
