#include "doctest.h"

#include <cmath>
#include <set>

#include "somkit/csv.hpp"
#include "somkit/error.hpp"
#include "somkit/ingest.hpp"
#include "somkit/synth.hpp"

using namespace somkit;

namespace {

const Schema kSchema = [] {
    Schema s;
    s.demographics = {"age", "gender", "education"};
    return s;
}();

// Pearson over rows where both columns hold a 1..5 answer, computed from scratch.
double observed_pearson(const EncodedMatrix& m, const std::string& a, const std::string& b) {
    const auto ca = m.column_index(a), cb = m.column_index(b);
    std::vector<double> x, y;
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (m.is_missing(r, ca) || m.is_missing(r, cb) || m.at(r, ca) == 0 || m.at(r, cb) == 0) continue;
        x.push_back(m.at(r, ca));
        y.push_back(m.at(r, cb));
    }
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

SynthSpec two_cluster_spec(std::size_t records) {
    SynthSpec s;
    s.records = records;
    s.factors = {"f1", "f2", "f3"};
    SynthCluster hi{0.5, {{0, 0, 0, 0.2, 0.8}, {0, 0, 0, 0.2, 0.8}, {0.2, 0.2, 0.2, 0.2, 0.2}}};
    SynthCluster lo{0.5, {{0.8, 0.2, 0, 0, 0}, {0.8, 0.2, 0, 0, 0}, {0.2, 0.2, 0.2, 0.2, 0.2}}};
    s.clusters = {hi, lo};
    s.seed = 9;
    return s;
}

} // namespace

TEST_CASE("zero missingness leaves no blank response cells") {
    auto spec = SynthSpec::survey_like(4);
    spec.missing_rate = 0.0;
    const auto out = generate_synthetic(spec);
    const auto table = parse_survey_text(out.csv, kSchema);
    CHECK(table.records.size() == 611);
    CHECK(table.factor_names == self_care_factors());
    for (const auto& r : table.records)
        for (const auto& v : r.responses) CHECK_FALSE(v.empty());
}

TEST_CASE("two 50/50 clusters give 50+50 memberships") {
    const auto out = generate_synthetic(two_cluster_spec(100));
    const auto rows = csv::parse(out.truth_csv);
    REQUIRE(rows.size() == 101);
    CHECK(rows[0] == std::vector<std::string>{"id", "cluster"});
    std::size_t counts[2] = {0, 0};
    for (std::size_t i = 1; i < rows.size(); ++i) ++counts[std::stoul(rows[i][1])];
    CHECK(counts[0] == 50);
    CHECK(counts[1] == 50);
    CHECK(out.cluster_of.size() == 100);
}

TEST_CASE("cluster structure shows in the responses") {
    const auto out = generate_synthetic(two_cluster_spec(200));
    const auto m = encode(parse_survey_text(out.csv, kSchema), EncodingScheme::likert());
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double f1 = m.at(r, 0);
        if (out.cluster_of[r] == 0) CHECK(f1 >= 4.0);
        else CHECK(f1 <= 2.0);
    }
}

TEST_CASE("planted correlations are recovered in data space") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto spec = SynthSpec::survey_like(seed);
        const auto out = generate_synthetic(spec);
        const auto m = encode(parse_survey_text(out.csv, kSchema), EncodingScheme::likert());
        REQUIRE(m.rows == 611);
        REQUIRE(m.cols == 15);
        for (const auto& t : spec.correlations) {
            const double r = observed_pearson(m, t.a, t.b);
            MESSAGE(t.a << " ~ " << t.b << ": " << r << " (target " << t.rho << ")");
            CHECK(std::abs(r - t.rho) <= 0.1);
        }
    }
}

TEST_CASE("missing and NA cells come out at the requested counts") {
    auto spec = SynthSpec::survey_like(5);
    spec.missing_rate = 0.05;
    spec.na_rate = 0.01;
    const auto out = generate_synthetic(spec);
    const auto m = encode(parse_survey_text(out.csv, kSchema), EncodingScheme::likert());
    std::size_t na = 0;
    for (std::size_t i = 0; i < m.values.size(); ++i)
        if (!m.missing[i] && m.values[i] == 0.0) ++na;
    CHECK(m.missing_count() == static_cast<std::size_t>(std::llround(0.05 * 611 * 15)));
    CHECK(na == static_cast<std::size_t>(std::llround(0.01 * 611 * 15)));
}

TEST_CASE("every emitted token is in the vocabulary or blank") {
    auto spec = SynthSpec::survey_like(6);
    spec.na_rate = 0.02;
    const auto rows = csv::parse(generate_synthetic(spec).csv);
    const auto scheme = EncodingScheme::likert();
    std::set<std::string> ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        ids.insert(rows[r][0]);
        const double age = std::stod(rows[r][1]);
        CHECK(age >= 18);
        CHECK(age <= 85);
        CHECK((rows[r][2] == "M" || rows[r][2] == "F"));
        CHECK((rows[r][3] == "qualified" || rows[r][3] == "none"));
        for (std::size_t c = 4; c < rows[r].size(); ++c) {
            const auto& tok = rows[r][c];
            CHECK((tok.empty() || tok == scheme.na_token || scheme.codes.count(tok) == 1));
        }
    }
    CHECK(ids.size() == 611);
}

TEST_CASE("same seed, same bytes") {
    const auto a = generate_synthetic(SynthSpec::survey_like(8));
    const auto b = generate_synthetic(SynthSpec::survey_like(8));
    CHECK(a.csv == b.csv);
    CHECK(a.truth_csv == b.truth_csv);
    CHECK(generate_synthetic(SynthSpec::survey_like(9)).csv != a.csv);
}

TEST_CASE("invalid and infeasible specs are rejected") {
    auto s = two_cluster_spec(50);
    s.clusters[0].levels[0] = {0.5, 0.5, 0.5, 0, 0};
    CHECK_THROWS_AS(generate_synthetic(s), UsageError);

    s = two_cluster_spec(50);
    s.missing_rate = 1.0;
    CHECK_THROWS_AS(generate_synthetic(s), UsageError);

    s = two_cluster_spec(50);
    s.correlations = {{"f1", "nope", 0.5}};
    CHECK_THROWS_AS(generate_synthetic(s), UsageError);

    // Pairwise targets that no correlation matrix can satisfy.
    s = two_cluster_spec(50);
    s.correlations = {{"f1", "f2", 0.9}, {"f2", "f3", 0.9}, {"f1", "f3", -0.9}};
    CHECK_THROWS_AS(generate_synthetic(s), UsageError);

    s = two_cluster_spec(50);
    s.correlations = {{"f3", "f3", 0.5}};
    CHECK_THROWS_AS(generate_synthetic(s), UsageError);
}

TEST_CASE("spec json round trip") {
    const auto s = SynthSpec::survey_like(12);
    SynthSpec back;
    from_json_into(to_json(s), back);
    CHECK(to_json(back) == to_json(s));
    CHECK(generate_synthetic(back).csv == generate_synthetic(s).csv);
}
