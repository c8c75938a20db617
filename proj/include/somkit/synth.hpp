#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "somkit/config.hpp"

namespace somkit {

/// Response distribution of one cluster: per factor, P(Never..Always).
struct SynthCluster {
    double weight = 1.0;
    std::vector<std::array<double, 5>> levels;
};

struct CorrelationTarget {
    std::string a;
    std::string b;
    /// Pearson correlation of the encoded responses over the whole population.
    double rho = 0.0;
};

struct SynthSpec {
    std::size_t records = 611;
    std::vector<std::string> factors;
    std::vector<SynthCluster> clusters;
    std::vector<CorrelationTarget> correlations;
    /// Exact fraction of response cells left blank, and of cells set to "NA".
    double missing_rate = 0.0;
    double na_rate = 0.0;
    double male_fraction = 0.45;
    double qualified_fraction = 0.91;
    double age_mean = 47.0;
    double age_sd = 14.0;
    double age_min = 18.0;
    double age_max = 85.0;
    std::uint64_t seed = 1;

    void validate() const;

    /// 611 records over the fifteen self-care factors: four well-separated
    /// clusters on ten factors; the other five follow each cluster's mean level
    /// and carry planted correlations (insulin dose/timing, portions/meal
    /// timing, portions/exercise).
    static SynthSpec survey_like(std::uint64_t seed = 1);
};

const std::vector<std::string>& self_care_factors();

/// Likert tokens for levels 1..5.
const std::array<std::string, 5>& likert_tokens();

struct SynthOutput {
    /// id, age, gender, education, then one column per factor.
    std::string csv;
    /// id, cluster
    std::string truth_csv;
    std::vector<std::size_t> cluster_of;
    /// Latent Gaussian correlation used per target, after calibration.
    std::vector<double> latent_rho;
};

/// Throws UsageError for an invalid spec or infeasible correlation targets.
SynthOutput generate_synthetic(const SynthSpec& spec);

json to_json(const SynthSpec& s);
void from_json_into(const json& j, SynthSpec& s);

} // namespace somkit
