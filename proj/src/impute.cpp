#include "somkit/impute.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "somkit/error.hpp"

namespace somkit {

namespace {

EncodedMatrix transposed(const EncodedMatrix& m) {
    EncodedMatrix t(m.cols, m.rows);
    t.row_ids = m.col_names;
    t.col_names = m.row_ids;
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            t.values[c * m.rows + r] = m.values[r * m.cols + c];
            t.missing[c * m.rows + r] = m.missing[r * m.cols + c];
        }
    }
    return t;
}

struct Candidate {
    double distance;
    std::size_t index;
};

double aggregate(std::vector<double>& vals, Aggregation agg) {
    switch (agg) {
    case Aggregation::Nearest:
        return vals.front();
    case Aggregation::Median: {
        std::sort(vals.begin(), vals.end());
        const std::size_t n = vals.size();
        return n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
    }
    case Aggregation::Mean:
    case Aggregation::Auto:
        break;
    }
    double sum = 0.0;
    for (double v : vals) {
        sum += v;
    }
    return sum / static_cast<double>(vals.size());
}

// Imputes along rows; `what` names the vector kind in error messages.
EncodedMatrix impute_rows(const EncodedMatrix& m, std::size_t k, Aggregation agg, const char* what,
                          const char* other) {
    EncodedMatrix out = m;
    std::vector<Candidate> candidates;
    std::vector<double> picked;
    for (std::size_t i = 0; i < m.rows; ++i) {
        const auto miss_i = std::span(m.missing).subspan(i * m.cols, m.cols);
        if (std::find(miss_i.begin(), miss_i.end(), std::uint8_t{1}) == miss_i.end()) {
            continue;
        }
        if (std::find(miss_i.begin(), miss_i.end(), std::uint8_t{0}) == miss_i.end()) {
            throw DataError(std::string(what) + " '" + m.row_ids[i] + "' has no observed values");
        }
        candidates.clear();
        for (std::size_t j = 0; j < m.rows; ++j) {
            if (j == i) {
                continue;
            }
            const double d = partial_distance(m.row(i), miss_i, m.row(j),
                                              std::span(m.missing).subspan(j * m.cols, m.cols));
            if (d >= 0.0) {
                candidates.push_back({d, j});
            }
        }
        if (candidates.empty()) {
            throw DataError(std::string(what) + " '" + m.row_ids[i] + "' has no comparable neighbour");
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
        });
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (!m.is_missing(i, c)) {
                continue;
            }
            picked.clear();
            for (const auto& cand : candidates) {
                if (!m.is_missing(cand.index, c)) {
                    picked.push_back(m.at(cand.index, c));
                    if (picked.size() == k) {
                        break;
                    }
                }
            }
            if (picked.empty()) {
                throw DataError(std::string(what) + " '" + m.row_ids[i] + "', " + other + " '" + m.col_names[c] +
                                "': no comparable neighbour observes this entry");
            }
            out.at(i, c) = aggregate(picked, agg);
            out.missing[i * m.cols + c] = 0;
        }
    }
    return out;
}

} // namespace

double partial_distance(std::span<const double> a, std::span<const std::uint8_t> a_missing,
                        std::span<const double> b, std::span<const std::uint8_t> b_missing) {
    double sum = 0.0;
    std::size_t shared = 0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        if (a_missing[d] || b_missing[d]) {
            continue;
        }
        const double diff = a[d] - b[d];
        sum += diff * diff;
        ++shared;
    }
    if (shared == 0) {
        return -1.0;
    }
    return std::sqrt(sum * static_cast<double>(a.size()) / static_cast<double>(shared));
}

EncodedMatrix knn_impute(const EncodedMatrix& m, const ImputeConfig& cfg) {
    m.validate();
    const bool by_rows = cfg.axis == ImputeAxis::Rows;
    const std::size_t vectors = by_rows ? m.rows : m.cols;
    if (cfg.k < 1) {
        throw UsageError("impute: k must be at least 1");
    }
    if (m.fully_observed()) {
        return m;
    }
    if (vectors < 2 || cfg.k > vectors - 1) {
        throw UsageError("impute: k=" + std::to_string(cfg.k) + " exceeds the " + std::to_string(vectors ? vectors - 1 : 0) +
                         " available neighbours");
    }
    Aggregation agg = cfg.aggregation;
    if (agg == Aggregation::Auto) {
        agg = cfg.k == 1 ? Aggregation::Nearest : Aggregation::Mean;
    }
    if (by_rows) {
        return impute_rows(m, cfg.k, agg, "record", "column");
    }
    EncodedMatrix t = impute_rows(transposed(m), cfg.k, agg, "variable", "record");
    EncodedMatrix back = transposed(t);
    back.row_ids = m.row_ids;
    back.col_names = m.col_names;
    return back;
}

ImputeAxis parse_axis(const std::string& s) {
    if (s == "rows") return ImputeAxis::Rows;
    if (s == "columns") return ImputeAxis::Columns;
    throw UsageError("unknown impute axis '" + s + "' (expected rows|columns)");
}

Aggregation parse_aggregation(const std::string& s) {
    if (s == "auto") return Aggregation::Auto;
    if (s == "nearest") return Aggregation::Nearest;
    if (s == "mean") return Aggregation::Mean;
    if (s == "median") return Aggregation::Median;
    throw UsageError("unknown aggregation '" + s + "' (expected auto|nearest|mean|median)");
}

const char* to_string(ImputeAxis a) { return a == ImputeAxis::Rows ? "rows" : "columns"; }

const char* to_string(Aggregation a) {
    switch (a) {
    case Aggregation::Nearest: return "nearest";
    case Aggregation::Mean: return "mean";
    case Aggregation::Median: return "median";
    case Aggregation::Auto: break;
    }
    return "auto";
}

} // namespace somkit
