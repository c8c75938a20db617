#include "somkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "somkit/csv.hpp"
#include "somkit/error.hpp"
#include "somkit/rng.hpp"

namespace somkit {

namespace {

constexpr std::size_t kCalibrationSamples = 40000;
constexpr double kMaxLatent = 0.999;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Level 1..5 from a uniform draw via the cumulative distribution.
int level_from_uniform(const std::array<double, 5>& p, double u) {
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
        acc += p[static_cast<std::size_t>(k)];
        if (u < acc) {
            return k + 1;
        }
    }
    return 5;
}

std::array<double, 5> peaked(int peak) {
    std::array<double, 5> p{};
    const auto at = [&](int level) -> double& { return p[static_cast<std::size_t>(level - 1)]; };
    at(peak) = 0.8;
    at(peak > 1 ? peak - 1 : peak) += 0.1;
    at(peak < 5 ? peak + 1 : peak) += 0.1;
    return p;
}

// Broad response centred on a level, folded at the ends of the scale.
std::array<double, 5> spread(int centre) {
    const double w[5] = {0.05, 0.2, 0.5, 0.2, 0.05};
    std::array<double, 5> p{};
    for (int o = -2; o <= 2; ++o) {
        p[static_cast<std::size_t>(std::clamp(centre + o, 1, 5) - 1)] += w[o + 2];
    }
    return p;
}

// Largest-remainder apportionment of n items over the given weights.
std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> counts(weights.size());
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = static_cast<double>(n) * weights[i] / total;
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        used += counts[i];
        rem.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; used < n; ++k, ++used) {
        ++counts[rem[k % rem.size()].second];
    }
    return counts;
}

std::size_t factor_index(const SynthSpec& spec, const std::string& name) {
    const auto it = std::find(spec.factors.begin(), spec.factors.end(), name);
    if (it == spec.factors.end()) {
        throw UsageError("synth: correlation target names unknown factor '" + name + "'");
    }
    return static_cast<std::size_t>(it - spec.factors.begin());
}

// Population Pearson correlation of two factors' levels as a function of the
// latent Gaussian correlation, estimated on fixed common random numbers so the
// curve is deterministic and (empirically) monotone.
class PairCalibrator {
public:
    PairCalibrator(const SynthSpec& spec, std::size_t fa, std::size_t fb, std::uint64_t seed) : spec_(spec), fa_(fa), fb_(fb) {
        Rng rng(seed);
        std::vector<double> w;
        for (const auto& c : spec.clusters) {
            w.push_back(c.weight);
        }
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        cluster_.resize(kCalibrationSamples);
        e1_.resize(kCalibrationSamples);
        e2_.resize(kCalibrationSamples);
        for (std::size_t k = 0; k < kCalibrationSamples; ++k) {
            double u = rng.uniform() * total;
            std::size_t c = 0;
            while (c + 1 < w.size() && u >= w[c]) {
                u -= w[c];
                ++c;
            }
            cluster_[k] = c;
            e1_[k] = rng.normal();
            e2_[k] = rng.normal();
        }
    }

    double correlation(double latent) const {
        const double s = std::sqrt(1.0 - latent * latent);
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (std::size_t k = 0; k < kCalibrationSamples; ++k) {
            const auto& cl = spec_.clusters[cluster_[k]];
            const double a = level_from_uniform(cl.levels[fa_], normal_cdf(e1_[k]));
            const double b = level_from_uniform(cl.levels[fb_], normal_cdf(latent * e1_[k] + s * e2_[k]));
            sa += a;
            sb += b;
            saa += a * a;
            sbb += b * b;
            sab += a * b;
        }
        const auto n = static_cast<double>(kCalibrationSamples);
        const double va = saa / n - (sa / n) * (sa / n);
        const double vb = sbb / n - (sb / n) * (sb / n);
        if (va <= 0.0 || vb <= 0.0) {
            throw UsageError("synth: a correlated factor has a degenerate response distribution");
        }
        return (sab / n - (sa / n) * (sb / n)) / std::sqrt(va * vb);
    }

    double solve(double target) const {
        if (target > correlation(kMaxLatent) || target < correlation(-kMaxLatent)) {
            throw UsageError("synth: correlation target " + std::to_string(target) + " between '" +
                             spec_.factors[fa_] + "' and '" + spec_.factors[fb_] + "' is not attainable");
        }
        double lo = -kMaxLatent;
        double hi = kMaxLatent;
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            (correlation(mid) < target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    const SynthSpec& spec_;
    std::size_t fa_;
    std::size_t fb_;
    std::vector<std::size_t> cluster_;
    std::vector<double> e1_;
    std::vector<double> e2_;
};

} // namespace

const std::vector<std::string>& self_care_factors() {
    static const std::vector<std::string> names = {
        "check_glucose",       "record_glucose",    "check_ketones",       "correct_insulin_dose", "insulin_right_time",
        "correct_food_portions", "meals_on_time",   "keep_food_records",   "read_food_labels",     "treat_low_glucose",
        "carry_quick_sugar",   "clinic_appointments", "medic_alert_id",    "exercise",             "adjust_insulin_dosage"};
    return names;
}

const std::array<std::string, 5>& likert_tokens() {
    static const std::array<std::string, 5> tokens = {"Never", "Rarely", "Sometimes", "Usually", "Always"};
    return tokens;
}

void SynthSpec::validate() const {
    if (records < 1) {
        throw UsageError("synth: need at least one record");
    }
    if (factors.empty()) {
        throw UsageError("synth: need at least one factor");
    }
    if (clusters.empty()) {
        throw UsageError("synth: need at least one cluster");
    }
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const auto& cl = clusters[c];
        const std::string where = "synth: cluster " + std::to_string(c);
        if (!(cl.weight > 0.0)) {
            throw UsageError(where + " needs a positive weight");
        }
        if (cl.levels.size() != factors.size()) {
            throw UsageError(where + " must give one distribution per factor");
        }
        for (const auto& p : cl.levels) {
            const double sum = std::accumulate(p.begin(), p.end(), 0.0);
            if (std::any_of(p.begin(), p.end(), [](double v) { return v < 0.0; }) || std::abs(sum - 1.0) > 1e-9) {
                throw UsageError(where + " has a response distribution that does not sum to 1");
            }
        }
    }
    if (!(missing_rate >= 0.0 && missing_rate < 1.0) || !(na_rate >= 0.0 && na_rate < 1.0) || missing_rate + na_rate >= 1.0) {
        throw UsageError("synth: missing and NA rates must lie in [0, 1) and sum below 1");
    }
    if (!(male_fraction >= 0.0 && male_fraction <= 1.0) || !(qualified_fraction >= 0.0 && qualified_fraction <= 1.0)) {
        throw UsageError("synth: demographic fractions must lie in [0, 1]");
    }
    if (!(age_sd >= 0.0) || !(age_max >= age_min)) {
        throw UsageError("synth: invalid age distribution");
    }
    for (const auto& t : correlations) {
        if (factor_index(*this, t.a) == factor_index(*this, t.b)) {
            throw UsageError("synth: correlation target pairs a factor with itself");
        }
        if (!(t.rho > -1.0 && t.rho < 1.0)) {
            throw UsageError("synth: correlation targets must lie in (-1, 1)");
        }
    }
}

SynthSpec SynthSpec::survey_like(std::uint64_t seed) {
    SynthSpec s;
    s.seed = seed;
    s.factors = self_care_factors();
    const std::vector<std::string> correlated = {"correct_insulin_dose", "insulin_right_time", "correct_food_portions",
                                                 "meals_on_time", "exercise"};
    // Peak level per cluster for the first and second half of the clustering
    // factors. The correlated factors centre on the cluster's mean level.
    const int peaks[4][2] = {{5, 5}, {4, 2}, {2, 4}, {1, 1}};
    const double weights[4] = {0.4, 0.3, 0.2, 0.1};
    for (int c = 0; c < 4; ++c) {
        SynthCluster cl;
        cl.weight = weights[c];
        std::size_t k = 0;
        for (const auto& f : s.factors) {
            if (std::find(correlated.begin(), correlated.end(), f) != correlated.end()) {
                cl.levels.push_back(spread((peaks[c][0] + peaks[c][1]) / 2));
            } else {
                cl.levels.push_back(peaked(peaks[c][k < 5 ? 0 : 1]));
                ++k;
            }
        }
        s.clusters.push_back(std::move(cl));
    }
    s.correlations = {{"correct_insulin_dose", "insulin_right_time", 0.8},
                      {"meals_on_time", "correct_food_portions", 0.8},
                      {"correct_food_portions", "exercise", 0.6}};
    s.missing_rate = 0.02;
    return s;
}

SynthOutput generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    const std::size_t nf = spec.factors.size();
    const std::size_t nr = spec.records;
    SynthOutput out;

    // Latent correlation matrix: calibrated targets, one-hop products elsewhere.
    Eigen::MatrixXd latent = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nf));
    std::vector<std::vector<bool>> fixed(nf, std::vector<bool>(nf, false));
    for (std::size_t t = 0; t < spec.correlations.size(); ++t) {
        const auto& target = spec.correlations[t];
        const std::size_t a = factor_index(spec, target.a);
        const std::size_t b = factor_index(spec, target.b);
        const PairCalibrator cal(spec, a, b, spec.seed ^ (0xC0FFEEULL + t));
        const double r = cal.solve(target.rho);
        out.latent_rho.push_back(r);
        latent(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = r;
        latent(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = r;
        fixed[a][b] = fixed[b][a] = true;
    }
    Eigen::MatrixXd completed = latent;
    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = i + 1; j < nf; ++j) {
            if (fixed[i][j]) {
                continue;
            }
            double best = 0.0;
            for (std::size_t k = 0; k < nf; ++k) {
                if (fixed[i][k] && fixed[k][j]) {
                    const double v = latent(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) *
                                     latent(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
                    if (std::abs(v) > std::abs(best)) {
                        best = v;
                    }
                }
            }
            completed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = best;
            completed(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = best;
        }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(completed);
    if (llt.info() != Eigen::Success) {
        throw UsageError("synth: correlation targets are jointly infeasible (latent matrix not positive definite)");
    }
    const Eigen::MatrixXd chol = llt.matrixL();

    Rng rng(spec.seed);

    std::vector<double> weights;
    for (const auto& c : spec.clusters) {
        weights.push_back(c.weight);
    }
    const auto counts = apportion(nr, weights);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        out.cluster_of.insert(out.cluster_of.end(), counts[c], c);
    }
    rng.shuffle(std::span(out.cluster_of));

    // Responses through a Gaussian copula on each record's cluster marginals.
    std::vector<int> level(nr * nf);
    Eigen::VectorXd e(static_cast<Eigen::Index>(nf));
    for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t f = 0; f < nf; ++f) {
            e(static_cast<Eigen::Index>(f)) = rng.normal();
        }
        const Eigen::VectorXd z = chol * e;
        const auto& cl = spec.clusters[out.cluster_of[r]];
        for (std::size_t f = 0; f < nf; ++f) {
            level[r * nf + f] = level_from_uniform(cl.levels[f], normal_cdf(z(static_cast<Eigen::Index>(f))));
        }
    }

    // Exact numbers of blank and NA cells at distinct positions.
    std::vector<std::size_t> cells(nr * nf);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    rng.shuffle(std::span(cells));
    const auto n_missing = static_cast<std::size_t>(std::llround(spec.missing_rate * static_cast<double>(cells.size())));
    const auto n_na = static_cast<std::size_t>(std::llround(spec.na_rate * static_cast<double>(cells.size())));
    for (std::size_t k = 0; k < n_missing + n_na && k < cells.size(); ++k) {
        level[cells[k]] = k < n_missing ? -1 : 0;
    }

    std::vector<std::string> gender(nr, "F");
    const auto males = static_cast<std::size_t>(std::llround(spec.male_fraction * static_cast<double>(nr)));
    std::fill_n(gender.begin(), males, "M");
    rng.shuffle(std::span(gender));
    std::vector<std::string> education(nr, "none");
    const auto qualified = static_cast<std::size_t>(std::llround(spec.qualified_fraction * static_cast<double>(nr)));
    std::fill_n(education.begin(), qualified, "qualified");
    rng.shuffle(std::span(education));

    out.csv = "id,age,gender,education";
    for (const auto& f : spec.factors) {
        out.csv += "," + csv::escape(f);
    }
    out.csv += "\n";
    out.truth_csv = "id,cluster\n";
    for (std::size_t r = 0; r < nr; ++r) {
        const double age = std::clamp(std::round(spec.age_mean + spec.age_sd * rng.normal()), spec.age_min, spec.age_max);
        const std::string id = std::to_string(r + 1);
        out.csv += id + "," + std::to_string(static_cast<long long>(age)) + "," + gender[r] + "," + education[r];
        for (std::size_t f = 0; f < nf; ++f) {
            const int lv = level[r * nf + f];
            out.csv += ",";
            if (lv > 0) {
                out.csv += likert_tokens()[static_cast<std::size_t>(lv - 1)];
            } else if (lv == 0) {
                out.csv += "NA";
            }
        }
        out.csv += "\n";
        out.truth_csv += id + "," + std::to_string(out.cluster_of[r]) + "\n";
    }
    return out;
}

json to_json(const SynthSpec& s) {
    json clusters = json::array();
    for (const auto& c : s.clusters) {
        json lv = json::array();
        for (const auto& p : c.levels) {
            lv.push_back(std::vector<double>(p.begin(), p.end()));
        }
        clusters.push_back({{"weight", c.weight}, {"levels", lv}});
    }
    json corr = json::array();
    for (const auto& t : s.correlations) {
        corr.push_back({{"a", t.a}, {"b", t.b}, {"rho", t.rho}});
    }
    return {{"records", s.records},
            {"seed", s.seed},
            {"factors", s.factors},
            {"clusters", clusters},
            {"correlations", corr},
            {"missing_rate", s.missing_rate},
            {"na_rate", s.na_rate},
            {"demographics",
             {{"male_fraction", s.male_fraction},
              {"qualified_fraction", s.qualified_fraction},
              {"age_mean", s.age_mean},
              {"age_sd", s.age_sd},
              {"age_min", s.age_min},
              {"age_max", s.age_max}}}};
}

void from_json_into(const json& j, SynthSpec& s) {
    try {
        if (j.contains("records")) s.records = j.at("records").get<std::size_t>();
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("factors")) s.factors = j.at("factors").get<std::vector<std::string>>();
        if (j.contains("clusters")) {
            s.clusters.clear();
            for (const auto& c : j.at("clusters")) {
                SynthCluster cl;
                cl.weight = c.value("weight", 1.0);
                for (const auto& p : c.at("levels")) {
                    const auto v = p.get<std::vector<double>>();
                    if (v.size() != 5) {
                        throw UsageError("synth: each response distribution needs five probabilities");
                    }
                    cl.levels.push_back({v[0], v[1], v[2], v[3], v[4]});
                }
                s.clusters.push_back(std::move(cl));
            }
        }
        if (j.contains("correlations")) {
            s.correlations.clear();
            for (const auto& t : j.at("correlations")) {
                s.correlations.push_back({t.at("a").get<std::string>(), t.at("b").get<std::string>(), t.at("rho").get<double>()});
            }
        }
        if (j.contains("missing_rate")) s.missing_rate = j.at("missing_rate").get<double>();
        if (j.contains("na_rate")) s.na_rate = j.at("na_rate").get<double>();
        if (j.contains("demographics")) {
            const auto& d = j.at("demographics");
            s.male_fraction = d.value("male_fraction", s.male_fraction);
            s.qualified_fraction = d.value("qualified_fraction", s.qualified_fraction);
            s.age_mean = d.value("age_mean", s.age_mean);
            s.age_sd = d.value("age_sd", s.age_sd);
            s.age_min = d.value("age_min", s.age_min);
            s.age_max = d.value("age_max", s.age_max);
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("synth: malformed spec (") + e.what() + ")");
    }
}

} // namespace somkit
