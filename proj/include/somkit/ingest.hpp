#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace somkit {

/// Column roles for a survey file. Factors are Likert-coded responses;
/// numeric and coded columns are demographics that also enter the matrix;
/// plain demographics are kept for the summary only.
struct Schema {
    std::string id_column = "id";
    /// Empty means every column not claimed by another role.
    std::vector<std::string> factors;
    std::vector<std::string> numeric;
    /// Categorical demographics encoded as 1..L over their sorted distinct tokens.
    std::vector<std::string> coded;
    std::vector<std::string> demographics;
    std::vector<std::string> ignore;
};

struct SurveyRecord {
    std::string id;
    std::map<std::string, std::string> demographics;
    /// Aligned with SurveyTable::factor_names; tokens kept verbatim.
    std::vector<std::string> responses;
};

struct SurveyTable {
    std::vector<std::string> factor_names;
    /// Every non-factor column that was kept, in header order.
    std::vector<std::string> demographic_names;
    std::vector<std::string> numeric_columns;
    std::vector<std::string> coded_columns;
    std::vector<SurveyRecord> records;

    std::size_t size() const noexcept { return records.size(); }
};

struct EncodingScheme {
    std::map<std::string, int> codes;
    std::string na_token = "NA";
    std::set<std::string> missing_tokens;

    /// Never..Always -> 1..5 with both "Usually" and "Often" at 4, "NA" -> 0,
    /// blank and "NaN" missing.
    static EncodingScheme likert();

    void validate() const;
    bool knows(const std::string& token) const;
};

/// Row-major numeric matrix with a missingness mask. Missing cells hold
/// `sentinel` and must never be read as data.
struct EncodedMatrix {
    static constexpr double sentinel = std::numeric_limits<double>::quiet_NaN();

    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_names;

    EncodedMatrix() = default;
    EncodedMatrix(std::size_t r, std::size_t c);

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    bool is_missing(std::size_t r, std::size_t c) const { return missing[r * cols + c] != 0; }
    void set_missing(std::size_t r, std::size_t c);
    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

    std::size_t missing_count() const;
    bool fully_observed() const { return missing_count() == 0; }
    std::size_t column_index(const std::string& name) const;

    /// Throws DataError if the dimensions disagree.
    void validate() const;
};

SurveyTable parse_survey(const std::filesystem::path& path, const Schema& schema);
SurveyTable parse_survey_text(std::string_view text, const Schema& schema);

/// Columns: factors, then numeric, then coded demographics.
EncodedMatrix encode(const SurveyTable& table, const EncodingScheme& scheme);

struct FrequencyTable {
    std::string variable;
    std::vector<std::pair<std::string, std::size_t>> counts;
    std::size_t total = 0;
};

struct SummaryReport {
    static constexpr std::size_t kAgeBins = 10;

    std::size_t records = 0;
    bool has_age = false;
    std::vector<std::size_t> age_bins = std::vector<std::size_t>(kAgeBins, 0);
    std::size_t age_out_of_range = 0;
    std::size_t age_missing = 0;
    std::vector<FrequencyTable> demographics;
    std::vector<FrequencyTable> factors;

    const FrequencyTable* demographic(const std::string& name) const;
    std::string to_text() const;
    std::string to_csv() const;
};

/// Decade age histogram over `age_column` plus frequency tables for every
/// other demographic and every factor. Factor levels are listed in code order.
SummaryReport summarize(const SurveyTable& table, const EncodingScheme& scheme = EncodingScheme::likert(),
                        const std::string& age_column = "age");

} // namespace somkit
