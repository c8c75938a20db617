#include "somkit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "somkit/csv.hpp"
#include "somkit/error.hpp"

namespace somkit {

namespace {

std::string percent(std::size_t count, std::size_t total) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", total ? 100.0 * static_cast<double>(count) / static_cast<double>(total) : 0.0);
    return buf;
}

bool parse_number(std::string_view s, double& out) {
    s = csv::trim(s);
    if (s.empty()) {
        return false;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

} // namespace

EncodingScheme EncodingScheme::likert() {
    EncodingScheme s;
    s.codes = {{"Never", 1}, {"Rarely", 2}, {"Sometimes", 3}, {"Usually", 4}, {"Often", 4}, {"Always", 5}};
    s.na_token = "NA";
    s.missing_tokens = {"", "NaN"};
    return s;
}

void EncodingScheme::validate() const {
    if (codes.empty()) {
        throw UsageError("encoding scheme has no tokens");
    }
    for (const auto& [token, code] : codes) {
        if (code < 0) {
            throw UsageError("encoding scheme: negative code for token '" + token + "'");
        }
        if (code == 0) {
            throw UsageError("encoding scheme: code 0 is reserved for the NA token, got '" + token + "'");
        }
        if (token == na_token || missing_tokens.contains(token)) {
            throw UsageError("encoding scheme: token '" + token + "' is declared twice");
        }
    }
    if (missing_tokens.contains(na_token)) {
        throw UsageError("encoding scheme: NA token '" + na_token + "' is also a missing token");
    }
}

bool EncodingScheme::knows(const std::string& token) const {
    return codes.contains(token) || token == na_token || missing_tokens.contains(token);
}

EncodedMatrix::EncodedMatrix(std::size_t r, std::size_t c)
    : rows(r), cols(c), values(r * c, 0.0), missing(r * c, 0), row_ids(r), col_names(c) {}

void EncodedMatrix::set_missing(std::size_t r, std::size_t c) {
    values[r * cols + c] = sentinel;
    missing[r * cols + c] = 1;
}

std::size_t EncodedMatrix::missing_count() const {
    return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), std::uint8_t{1}));
}

std::size_t EncodedMatrix::column_index(const std::string& name) const {
    const auto it = std::find(col_names.begin(), col_names.end(), name);
    if (it == col_names.end()) {
        throw UsageError("unknown variable '" + name + "'");
    }
    return static_cast<std::size_t>(it - col_names.begin());
}

void EncodedMatrix::validate() const {
    if (values.size() != rows * cols || missing.size() != rows * cols || row_ids.size() != rows ||
        col_names.size() != cols) {
        throw DataError("encoded matrix dimensions are inconsistent");
    }
}

SurveyTable parse_survey(const std::filesystem::path& path, const Schema& schema) {
    if (!std::filesystem::exists(path)) {
        throw DataError("survey file not found: " + path.string());
    }
    try {
        return parse_survey_text(csv::read_text(path), schema);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

SurveyTable parse_survey_text(std::string_view text, const Schema& schema) {
    auto rows = csv::parse(text);
    if (rows.empty()) {
        throw DataError("missing header row");
    }
    const csv::Row header = [&] {
        csv::Row h;
        for (const auto& f : rows.front()) {
            h.emplace_back(csv::trim(f));
        }
        return h;
    }();

    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c].empty()) {
            throw DataError("header column " + std::to_string(c + 1) + " has an empty name");
        }
        if (!column.emplace(header[c], c).second) {
            throw DataError("header repeats column '" + header[c] + "'");
        }
    }

    auto require = [&](const std::string& name, const char* role) {
        if (!column.contains(name)) {
            throw DataError(std::string("declared ") + role + " column '" + name + "' not found in header");
        }
        return column.at(name);
    };

    const std::size_t id_col = require(schema.id_column, "id");
    std::unordered_map<std::string, std::string> claimed{{schema.id_column, "id"}};
    auto claim = [&](const std::vector<std::string>& names, const char* role) {
        for (const auto& n : names) {
            require(n, role);
            if (auto [it, ok] = claimed.emplace(n, role); !ok) {
                throw DataError("column '" + n + "' declared as both " + it->second + " and " + role);
            }
        }
    };
    claim(schema.factors, "factor");
    claim(schema.numeric, "numeric");
    claim(schema.coded, "coded");
    claim(schema.demographics, "demographic");
    claim(schema.ignore, "ignored");

    SurveyTable table;
    table.numeric_columns = schema.numeric;
    table.coded_columns = schema.coded;
    if (!schema.factors.empty()) {
        table.factor_names = schema.factors;
    }
    for (const auto& name : header) {
        const auto it = claimed.find(name);
        if (it == claimed.end()) {
            // Unclaimed columns are factors when none were declared, else demographics.
            if (schema.factors.empty()) {
                table.factor_names.push_back(name);
            } else {
                table.demographic_names.push_back(name);
            }
        } else if (it->second != "id" && it->second != "factor" && it->second != "ignored") {
            table.demographic_names.push_back(name);
        }
    }
    if (table.factor_names.empty() && table.numeric_columns.empty() && table.coded_columns.empty()) {
        throw DataError("schema selects no factor or numeric columns");
    }

    std::vector<std::size_t> factor_idx;
    for (const auto& f : table.factor_names) {
        factor_idx.push_back(column.at(f));
    }

    std::unordered_set<std::string> seen_ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t line = r + 1;
        if (row.size() == 1 && csv::trim(row[0]).empty() && header.size() > 1) {
            continue;
        }
        if (row.size() != header.size()) {
            throw DataError("row " + std::to_string(line) + ": has " + std::to_string(row.size()) +
                            " fields, header has " + std::to_string(header.size()));
        }
        SurveyRecord rec;
        rec.id = std::string(csv::trim(row[id_col]));
        if (rec.id.empty()) {
            throw DataError("row " + std::to_string(line) + ", column '" + schema.id_column + "': empty record id");
        }
        if (!seen_ids.insert(rec.id).second) {
            throw DataError("row " + std::to_string(line) + ", column '" + schema.id_column +
                            "': duplicate record id '" + rec.id + "'");
        }
        for (const auto& d : table.demographic_names) {
            rec.demographics.emplace(d, row[column.at(d)]);
        }
        rec.responses.reserve(factor_idx.size());
        for (auto c : factor_idx) {
            rec.responses.push_back(row[c]);
        }
        table.records.push_back(std::move(rec));
    }
    return table;
}

EncodedMatrix encode(const SurveyTable& table, const EncodingScheme& scheme) {
    scheme.validate();
    const std::size_t nf = table.factor_names.size();
    const std::size_t nn = table.numeric_columns.size();
    const std::size_t nc = table.coded_columns.size();
    EncodedMatrix m(table.size(), nf + nn + nc);

    std::size_t col = 0;
    for (const auto& n : table.factor_names) m.col_names[col++] = n;
    for (const auto& n : table.numeric_columns) m.col_names[col++] = n;
    for (const auto& n : table.coded_columns) m.col_names[col++] = n;

    // Ordinal codes for categorical demographics.
    std::vector<std::map<std::string, int>> coded_levels(nc);
    for (std::size_t j = 0; j < nc; ++j) {
        std::set<std::string> levels;
        for (const auto& rec : table.records) {
            std::string tok(csv::trim(rec.demographics.at(table.coded_columns[j])));
            if (!scheme.missing_tokens.contains(tok)) {
                levels.insert(tok);
            }
        }
        int code = 1;
        for (const auto& l : levels) {
            coded_levels[j][l] = code++;
        }
    }

    for (std::size_t r = 0; r < table.size(); ++r) {
        const auto& rec = table.records[r];
        m.row_ids[r] = rec.id;
        for (std::size_t j = 0; j < nf; ++j) {
            const std::string tok(csv::trim(rec.responses[j]));
            if (scheme.missing_tokens.contains(tok)) {
                m.set_missing(r, j);
            } else if (tok == scheme.na_token) {
                m.at(r, j) = 0.0;
            } else if (auto it = scheme.codes.find(tok); it != scheme.codes.end()) {
                m.at(r, j) = static_cast<double>(it->second);
            } else {
                throw DataError("record '" + rec.id + "', column '" + table.factor_names[j] + "': unknown token '" +
                                rec.responses[j] + "'");
            }
        }
        for (std::size_t j = 0; j < nn; ++j) {
            const auto& name = table.numeric_columns[j];
            const std::string tok(csv::trim(rec.demographics.at(name)));
            double v = 0.0;
            if (scheme.missing_tokens.contains(tok)) {
                m.set_missing(r, nf + j);
            } else if (parse_number(tok, v)) {
                m.at(r, nf + j) = v;
            } else {
                throw DataError("record '" + rec.id + "', column '" + name + "': not a number '" + tok + "'");
            }
        }
        for (std::size_t j = 0; j < nc; ++j) {
            const std::string tok(csv::trim(rec.demographics.at(table.coded_columns[j])));
            if (scheme.missing_tokens.contains(tok)) {
                m.set_missing(r, nf + nn + j);
            } else {
                m.at(r, nf + nn + j) = static_cast<double>(coded_levels[j].at(tok));
            }
        }
    }
    return m;
}

const FrequencyTable* SummaryReport::demographic(const std::string& name) const {
    for (const auto& t : demographics) {
        if (t.variable == name) {
            return &t;
        }
    }
    return nullptr;
}

SummaryReport summarize(const SurveyTable& table, const EncodingScheme& scheme, const std::string& age_column) {
    if (table.records.empty()) {
        throw DataError("cannot summarize an empty survey table");
    }
    SummaryReport rep;
    rep.records = table.size();

    auto blank_label = [](std::string tok) { return tok.empty() ? std::string("(blank)") : tok; };

    for (const auto& d : table.demographic_names) {
        if (d == age_column) {
            rep.has_age = true;
            for (const auto& rec : table.records) {
                double age = 0.0;
                if (!parse_number(rec.demographics.at(d), age)) {
                    ++rep.age_missing;
                } else if (age < 0.0 || age >= 10.0 * SummaryReport::kAgeBins) {
                    ++rep.age_out_of_range;
                } else {
                    ++rep.age_bins[static_cast<std::size_t>(age / 10.0)];
                }
            }
            continue;
        }
        std::map<std::string, std::size_t> counts;
        for (const auto& rec : table.records) {
            ++counts[blank_label(std::string(csv::trim(rec.demographics.at(d))))];
        }
        FrequencyTable ft{d, {counts.begin(), counts.end()}, table.size()};
        rep.demographics.push_back(std::move(ft));
    }

    // Factor levels: coded tokens by code, then NA, then anything else.
    auto rank = [&](const std::string& tok) -> std::pair<int, std::string> {
        if (auto it = scheme.codes.find(tok); it != scheme.codes.end()) {
            return {it->second, tok};
        }
        if (tok == scheme.na_token) {
            return {1000, tok};
        }
        return {2000, tok};
    };
    for (std::size_t j = 0; j < table.factor_names.size(); ++j) {
        std::map<std::string, std::size_t> counts;
        for (const auto& rec : table.records) {
            ++counts[std::string(csv::trim(rec.responses[j]))];
        }
        std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
        std::stable_sort(sorted.begin(), sorted.end(),
                         [&](const auto& a, const auto& b) { return rank(a.first) < rank(b.first); });
        for (auto& [tok, n] : sorted) {
            tok = blank_label(tok);
        }
        rep.factors.push_back({table.factor_names[j], std::move(sorted), table.size()});
    }
    return rep;
}

std::string SummaryReport::to_text() const {
    std::ostringstream out;
    out << "records: " << records << "\n";
    if (has_age) {
        out << "\nage (decade bins)\n";
        for (std::size_t b = 0; b < kAgeBins; ++b) {
            out << "  " << b * 10 << "-" << b * 10 + 9 << ": " << age_bins[b] << " (" << percent(age_bins[b], records)
                << "%)\n";
        }
        if (age_out_of_range) out << "  out of range: " << age_out_of_range << "\n";
        if (age_missing) out << "  missing: " << age_missing << "\n";
    }
    auto emit = [&](const FrequencyTable& t) {
        out << "\n" << t.variable << "\n";
        for (const auto& [level, n] : t.counts) {
            out << "  " << level << ": " << n << " (" << percent(n, t.total) << "%)\n";
        }
    };
    for (const auto& t : demographics) emit(t);
    for (const auto& t : factors) emit(t);
    return out.str();
}

std::string SummaryReport::to_csv() const {
    std::ostringstream out;
    out << "section,variable,level,count,percent\n";
    if (has_age) {
        for (std::size_t b = 0; b < kAgeBins; ++b) {
            out << "age,age," << b * 10 << "-" << b * 10 + 9 << "," << age_bins[b] << "," << percent(age_bins[b], records)
                << "\n";
        }
        out << "age,age,out of range," << age_out_of_range << "," << percent(age_out_of_range, records) << "\n";
        out << "age,age,missing," << age_missing << "," << percent(age_missing, records) << "\n";
    }
    auto emit = [&](const char* section, const FrequencyTable& t) {
        for (const auto& [level, n] : t.counts) {
            out << section << "," << csv::escape(t.variable) << "," << csv::escape(level) << "," << n << ","
                << percent(n, t.total) << "\n";
        }
    };
    for (const auto& t : demographics) emit("demographic", t);
    for (const auto& t : factors) emit("factor", t);
    return out.str();
}

} // namespace somkit
