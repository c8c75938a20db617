// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <cstring>

#include "CLI11.hpp"
#include "somkit/analysis.hpp"
#include "somkit/csv.hpp"
#include "somkit/impute.hpp"
#include "somkit/ingest.hpp"
#include "somkit/rng.hpp"
#include "somkit/som.hpp"
#include "somkit/synth.hpp"
#include "somkit/viz.hpp"

using namespace somkit;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits.
constexpr double kUpdateTol = 1e-12;
constexpr double kSymmetryTol = 1e-12;
constexpr double kQeRatio = 0.25;
constexpr double kTeMax = 0.15;
constexpr double kRidgeFactor = 2.0;
constexpr double kPlaneCorrMin = 0.5;
constexpr double kLimitAc1 = 1.0;
constexpr double kLimitAc2 = 5.0;
constexpr double kLimitAc3 = 10.0;
constexpr double kLimitAc5 = 60.0;
constexpr std::uint64_t kCorpusSeed = 1;

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

int failures = 0;

void report(const char* id, const char* name, const Outcome& o, double seconds) {
    std::printf("%s %-4s %-34s %7.3fs  %s\n", o.pass ? "PASS" : "FAIL", id, name, seconds, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

void run(const char* id, const char* name, double limit, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit > 0 && s >= limit) {
        o.require(false, "runtime over " + std::to_string(limit) + " s");
    }
    if (o.pass && o.detail.empty()) o.detail = "ok";
    report(id, name, o, s);
}

std::string fmt(double v) {
    char b[64];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

// ---- AC1 -------------------------------------------------------------------

// Centre coordinates in units of half a cell width and the row pitch.
std::pair<double, double> centre(const GridShape& g, std::size_t i) {
    const double c = static_cast<double>(g.col(i)), r = static_cast<double>(g.row(i));
    if (g.topology == Topology::Hexagonal) return {c + ((g.row(i) % 2) ? 0.5 : 0.0), r * std::sqrt(3.0) / 2.0};
    return {c, r};
}

void ac1(Outcome& o) {
    Rng rng(101);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + rng.below(18);
        Codebook cb({1, 1, Topology::Rectangular}, std::vector<std::string>(n, "v"));
        std::vector<double> w(n), x(n);
        for (std::size_t d = 0; d < n; ++d) {
            w[d] = 10.0 * rng.uniform() - 5.0;
            x[d] = 10.0 * rng.uniform() - 5.0;
        }
        const double eta = 0.001 + 0.998 * rng.uniform();
        cb.weights = w;
        update_step(cb, x, 0, 0.0, eta, Neighborhood::Bubble);
        for (std::size_t d = 0; d < n; ++d) {
            const double want = w[d] + eta * (x[d] - w[d]);
            o.require(std::abs(cb.weights[d] - want) <= kUpdateTol, "update arithmetic off at trial " + std::to_string(t));
        }
    }
    std::size_t pairs = 0;
    for (auto topo : {Topology::Rectangular, Topology::Hexagonal}) {
        for (std::size_t side : {1u, 2u, 5u, 12u, 30u}) {
            const GridShape g{side, side == 30 ? 30u : side + 1, topo};
            for (int k = 0; k < 200; ++k) {
                const std::size_t q = rng.below(g.cells()), i = rng.below(g.cells());
                const double radius = 0.5 * static_cast<double>(rng.below(40)) + 0.25 * rng.uniform();
                const double mu = 0.01 + 0.98 * rng.uniform();
                const auto [qx, qy] = centre(g, q);
                const auto [ix, iy] = centre(g, i);
                const double dist = std::hypot(qx - ix, qy - iy);
                if (std::abs(dist - radius) < 1e-9) continue;
                const double got = neighborhood_weight(g, q, i, radius, mu, Neighborhood::Bubble);
                o.require(got == (dist <= radius ? mu : 0.0), "bubble weight not exactly mu/0");
                ++pairs;
            }
        }
    }
    o.detail = "1000 updates, " + std::to_string(pairs) + " grid pairs";
}

// ---- AC2 -------------------------------------------------------------------

void ac2(Outcome& o) {
    Rng rng(202);
    std::size_t ties = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t w = 1 + rng.below(30), h = 1 + rng.below(30), n = 1 + rng.below(18);
        Codebook cb({w, h, Topology::Rectangular}, std::vector<std::string>(n, "v"));
        for (auto& v : cb.weights) v = 5.0 * rng.uniform();
        std::vector<double> x(n);
        for (auto& v : x) v = 5.0 * rng.uniform();
        if (t % 4 == 0 && cb.cells() > 1) {
            // Plant an exact tie: two cells holding the same vector near x.
            const std::size_t a = rng.below(cb.cells()), b = rng.below(cb.cells());
            for (std::size_t d = 0; d < n; ++d) cb.weight(a)[d] = cb.weight(b)[d] = x[d] + 1e-3;
            if (a != b) ++ties;
        }
        std::size_t best = 0;
        double best_sq = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cb.cells(); ++i) {
            double s = 0;
            for (std::size_t d = 0; d < n; ++d) s += (x[d] - cb.weight(i)[d]) * (x[d] - cb.weight(i)[d]);
            if (s < best_sq) {
                best_sq = s;
                best = i;
            }
        }
        const auto b = find_bmu(x, cb);
        o.require(b.cell == best, "bmu mismatch at instance " + std::to_string(t));
        o.require(b.distance == std::sqrt(best_sq), "distance mismatch at instance " + std::to_string(t));
    }
    if (o.pass) o.detail = "1000 instances, " + std::to_string(ties) + " planted ties";
}

// ---- AC3 -------------------------------------------------------------------

EncodedMatrix brute_force_impute(const EncodedMatrix& m) {
    EncodedMatrix out = m;
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (!m.is_missing(i, c)) continue;
            double best = std::numeric_limits<double>::infinity();
            double value = std::numeric_limits<double>::quiet_NaN();
            for (std::size_t j = 0; j < m.rows; ++j) {
                if (j == i || m.is_missing(j, c)) continue;
                double ss = 0.0;
                int shared = 0;
                for (std::size_t d = 0; d < m.cols; ++d) {
                    if (m.is_missing(i, d) || m.is_missing(j, d)) continue;
                    ss += (m.at(i, d) - m.at(j, d)) * (m.at(i, d) - m.at(j, d));
                    ++shared;
                }
                if (shared == 0) continue;
                const double dist = std::sqrt(ss * static_cast<double>(m.cols) / shared);
                if (dist < best) {
                    best = dist;
                    value = m.at(j, c);
                }
            }
            out.at(i, c) = value;
            out.missing[i * m.cols + c] = 0;
        }
    }
    return out;
}

void ac3(Outcome& o) {
    Rng rng(303);
    for (int t = 0; t < 100; ++t) {
        EncodedMatrix m(30, 10);
        for (std::size_t r = 0; r < 30; ++r) m.row_ids[r] = "r" + std::to_string(r);
        for (std::size_t c = 0; c < 10; ++c) m.col_names[c] = "v" + std::to_string(c);
        for (auto& v : m.values) v = 5.0 * rng.uniform();
        std::vector<std::size_t> cells(300);
        std::iota(cells.begin(), cells.end(), std::size_t{0});
        rng.shuffle(std::span(cells));
        for (std::size_t k = 0; k < 30; ++k) m.set_missing(cells[k] / 10, cells[k] % 10);
        const auto got = knn_impute(m, {1, ImputeAxis::Rows, Aggregation::Auto});
        const auto want = brute_force_impute(m);
        o.require(std::memcmp(got.values.data(), want.values.data(), 300 * sizeof(double)) == 0,
                  "mismatch on matrix " + std::to_string(t));
    }
    if (o.pass) o.detail = "100 matrices, exact";
}

// ---- AC4 -------------------------------------------------------------------

int shell(const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = csv::read_text(e.path());
    return files;
}

void ac4(Outcome& o, const std::string& cli, const fs::path& work) {
    const auto input = work / "survey.csv";
    const std::string q = "\"";
    o.require(shell(q + cli + q + " synth --out " + q + input.string() + q + " --seed 1") == 0, "synth failed");
    if (!o.pass) return;
    for (const char* run : {"run1", "run2"}) {
        fs::remove_all(work / run);
        o.require(shell(q + cli + q + " run --input " + q + input.string() + q +
                        " --demographics age,gender,education --seed 7 --out " + q + (work / run).string() + q) == 0,
                  std::string(run) + " failed");
    }
    if (!o.pass) return;
    const auto a = tree(work / "run1"), b = tree(work / "run2");
    o.require(a.size() == b.size(), "file sets differ");
    std::size_t svgs = 0;
    for (const auto& [path, bytes] : a) {
        auto it = b.find(path);
        o.require(it != b.end() && it->second == bytes, "differs: " + path);
        if (path.ends_with(".svg")) ++svgs;
    }
    o.require(a.count("manifest.json") && a.count("codebook.json"), "manifest or codebook missing");
    if (o.pass) o.detail = std::to_string(a.size()) + " files identical (" + std::to_string(svgs) + " SVGs)";
}

// ---- AC5-7 share one trained map of the planted corpus ----------------------

struct Corpus {
    SynthSpec spec;
    EncodedMatrix data;
    TrainResult trained;
    BmuAssignment assign;
    double seconds = 0;
};

Corpus& corpus() {
    static Corpus c = [] {
        Corpus k;
        const auto t0 = std::chrono::steady_clock::now();
        k.spec = SynthSpec::survey_like(kCorpusSeed);
        const auto out = generate_synthetic(k.spec);
        Schema schema;
        schema.demographics = {"age", "gender", "education"};
        k.data = knn_impute(encode(parse_survey_text(out.csv, schema), EncodingScheme::likert()));
        TrainingConfig cfg;  // 30x30, 10R ordering + 40R convergence presentations
        cfg.seed = kCorpusSeed;
        k.trained = train(k.data, cfg);
        k.assign = assign_bmus(k.data, k.trained.codebook);
        k.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return k;
    }();
    return c;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void ac5(Outcome& o) {
    auto& c = corpus();
    const auto& cb = c.trained.codebook;
    o.require(c.data.rows == 611 && c.data.cols == 15, "corpus is not 611x15");
    o.require(c.trained.log.iterations == 50 * 611, "presentations != 50R");
    const double q0 = c.trained.log.initial_quantization_error(), q1 = c.trained.log.final_quantization_error();
    const double te = topographic_error(c.data, cb);
    const auto u = u_matrix(cb).values;
    const double umax = *std::max_element(u.begin(), u.end()), umed = median(u);
    o.require(q1 <= kQeRatio * q0, "QE ratio " + fmt(q1 / q0));
    o.require(te <= kTeMax, "topographic error " + fmt(te));
    o.require(umax >= kRidgeFactor * umed, "ridge " + fmt(umax / umed) + "x median");
    o.require(c.seconds < kLimitAc5, "training took " + fmt(c.seconds) + " s");
    const std::string metrics = "QE " + fmt(q0) + "->" + fmt(q1) + " (" + fmt(q1 / q0) + "), TE " + fmt(te) +
                                ", ridge " + fmt(umax / umed) + "x, train " + fmt(c.seconds) + " s";
    o.detail = o.pass ? metrics : o.detail + "; " + metrics;
}

void ac6(Outcome& o) {
    auto& c = corpus();
    const auto& cb = c.trained.codebook;
    const double r = plane_correlation(cb, "meals_on_time", "correct_food_portions");
    o.require(r >= kPlaneCorrMin, "plane correlation " + fmt(r));
    const auto rep = correlation_report(cb);
    for (std::size_t i = 0; i < rep.names.size(); ++i) {
        o.require(std::abs(rep.at(i, i) - 1.0) <= kSymmetryTol, "diagonal not 1");
        for (std::size_t j = 0; j < rep.names.size(); ++j)
            o.require(std::abs(rep.at(i, j) - rep.at(j, i)) <= kSymmetryTol, "report not symmetric");
    }
    if (o.pass) o.detail = "plane r(meals_on_time, correct_food_portions) = " + fmt(r);
}

using Partition = std::set<std::set<std::string>>;

void ac7(Outcome& o) {
    auto& c = corpus();
    const auto hits = hit_map(c.assign, c.trained.codebook);
    double total = 0;
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < hits.values.size(); ++i) {
        total += hits.values[i];
        for (const auto& id : hits.labels[i]) ++seen[id];
    }
    o.require(total == 611.0, "hit total " + fmt(total));
    o.require(seen.size() == 611, "distinct labelled ids " + std::to_string(seen.size()));
    for (const auto& [id, n] : seen) o.require(n == 1, "id " + id + " appears " + std::to_string(n) + " times");

    std::vector<Partition> parts;
    for (double radius : {0.0, 2.0}) {
        Partition p;
        std::multiset<std::string> all;
        for (const auto& g : similar_groups(c.assign, c.trained.codebook.grid, radius)) {
            p.insert(std::set<std::string>(g.begin(), g.end()));
            all.insert(g.begin(), g.end());
        }
        o.require(all.size() == 611 && std::set<std::string>(all.begin(), all.end()).size() == 611,
                  "groups at radius " + fmt(radius) + " are not a partition");
        parts.push_back(std::move(p));
    }
    for (const auto& fine : parts[0]) {
        const bool inside = std::any_of(parts[1].begin(), parts[1].end(), [&](const auto& coarse) {
            return std::includes(coarse.begin(), coarse.end(), fine.begin(), fine.end());
        });
        o.require(inside, "radius-0 group not inside a radius-2 group");
    }
    if (o.pass)
        o.detail = std::to_string(parts[0].size()) + " groups at r=0, " + std::to_string(parts[1].size()) + " at r=2";
}

// ---- AC8 -------------------------------------------------------------------

void ac8(Outcome& o) {
    const std::pair<const char*, int> table[] = {{"Never", 1},   {"Rarely", 2}, {"Sometimes", 3}, {"Usually", 4},
                                                 {"Often", 4},   {"Always", 5}, {"NA", 0}};
    std::string text = "id";
    for (const auto& [tok, code] : table) text += std::string(",") + tok;
    text += "\n1";
    for (const auto& [tok, code] : table) text += std::string(",") + tok;
    text += "\n";
    const auto m = encode(parse_survey_text(text, Schema{}), EncodingScheme::likert());
    for (std::size_t c = 0; c < std::size(table); ++c) {
        o.require(!m.is_missing(0, c) && m.at(0, c) == table[c].second,
                  std::string(table[c].first) + " encoded as " + fmt(m.at(0, c)));
    }
    if (o.pass) o.detail = "7 tokens";
}

// ---- AC9 -------------------------------------------------------------------

void ac9(Outcome& o) {
    GridMap m({3, 3, Topology::Rectangular});
    m.values = {1, 2, 3, 4, 5, 3, 2, 1, 4.6};
    m.labels[0] = {"260", "9"};
    m.labels[4] = {"24"};
    m.labels[8] = {"402", "435", "281"};
    m.title = "Exercise";
    m.legend = likert_legend();
    const auto scale = default_likert_scale();
    const auto svg = render(m, scale, {"Exercise", 24, true}).svg;
    const auto golden = csv::read_text(fs::path(SOMKIT_GOLDEN_DIR) / "likert_3x3.svg");
    o.require(svg == golden, "SVG differs from golden file");
    o.require(scale.stop_at(1).color_name == "dark blue", "stop 1 is " + scale.stop_at(1).color_name);
    o.require(scale.stop_at(5).color_name == "orange", "stop 5 is " + scale.stop_at(5).color_name);
    if (o.pass) o.detail = std::to_string(golden.size()) + " bytes match";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::string cli_path;
    std::string work = "acceptance_work";
    app.add_option("--cli", cli_path, "Path to the somkit executable")->required();
    app.add_option("--work", work, "Scratch directory");
    CLI11_PARSE(app, argc, argv);
    fs::remove_all(work);
    fs::create_directories(work);

    run("AC1", "update and bubble gate fidelity", kLimitAc1, ac1);
    run("AC2", "BMU oracle equivalence", kLimitAc2, ac2);
    run("AC3", "imputation oracle equivalence", kLimitAc3, ac3);
    run("AC4", "end-to-end determinism", 0, [&](Outcome& o) { ac4(o, cli_path, work); });
    run("AC5", "convergence regression", 0, ac5);
    run("AC6", "correlation recovery", 0, ac6);
    run("AC7", "pipeline conservation", 0, ac7);
    run("AC8", "encoding contract", 0, ac8);
    run("AC9", "golden SVG", 0, ac9);

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
