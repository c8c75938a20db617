#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "somkit/csv.hpp"
#include "somkit/error.hpp"
#include "somkit/hash.hpp"
#include "somkit/matrix_io.hpp"
#include "somkit/pipeline.hpp"
#include "somkit/synth.hpp"
#include "test_util.hpp"

using namespace somkit;
namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + SOMKIT_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

PipelineConfig small_pipeline(const fs::path& input, const fs::path& out) {
    PipelineConfig cfg;
    cfg.input = input;
    cfg.schema.demographics = {"age", "gender", "education"};
    cfg.training.width = 8;
    cfg.training.height = 6;
    cfg.training.ordering.sweeps = 3;
    cfg.training.convergence.sweeps = 4;
    cfg.training.seed = 21;
    cfg.output_dir = out;
    return cfg;
}

std::size_t count_svgs(const fs::path& dir) {
    if (!fs::exists(dir)) return 0;
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.path().extension() == ".svg") ++n;
    return n;
}

} // namespace

TEST_CASE("pipeline on the synthetic corpus lists every artifact with a matching digest") {
    testutil::TempDir tmp("pipe");
    const auto input = tmp / "survey.csv";
    csv::write_text(input, generate_synthetic(SynthSpec::survey_like(3)).csv);
    const auto m = run_pipeline(small_pipeline(input, tmp / "out"));

    CHECK(m.count("component-plane") == 15);
    CHECK(m.count("u-matrix") == 1);
    CHECK(m.count("hit-map") == 1);
    CHECK(m.count("correlation") == 1);
    CHECK(m.input_sha256 == sha256_hex(csv::read_text(input)));

    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(tmp / "out")) {
        if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
        ++files;
    }
    CHECK(files == m.artifacts.size());
    for (const auto& a : m.artifacts) {
        const auto p = tmp.path / "out" / a.path;
        REQUIRE(fs::exists(p));
        CHECK(sha256_hex(csv::read_text(p)) == a.sha256);
    }

    const auto hits = read_matrix(tmp / "out" / "imputed.csv");
    CHECK(hits.rows == 611);
    CHECK(hits.fully_observed());

    double records = -1;
    for (const auto& [k, v] : m.metrics)
        if (k == "records") records = v;
    CHECK(records == 611);
}

TEST_CASE("re-running from a manifest reproduces every artifact") {
    testutil::TempDir tmp("rerun");
    const auto input = tmp / "survey.csv";
    csv::write_text(input, generate_synthetic(SynthSpec::survey_like(4)).csv);
    const auto first = run_pipeline(small_pipeline(input, tmp / "a"));
    const auto text = csv::read_text(tmp / "a" / "manifest.json");
    auto cfg = config_from_manifest(Manifest::from_json(text));
    cfg.output_dir = tmp / "b";
    const auto second = run_pipeline(cfg);
    CHECK(csv::read_text(tmp / "b" / "manifest.json") == text);
    REQUIRE(first.artifacts.size() == second.artifacts.size());
    for (std::size_t i = 0; i < first.artifacts.size(); ++i) {
        CHECK(first.artifacts[i].path == second.artifacts[i].path);
        CHECK(first.artifacts[i].sha256 == second.artifacts[i].sha256);
    }

    // A changed input no longer matches the recorded digest.
    csv::write_text(input, csv::read_text(input) + "\n");
    CHECK_THROWS_AS(config_from_manifest(Manifest::from_json(text)), DataError);
}

TEST_CASE("an unknown token aborts at encode and writes nothing") {
    testutil::TempDir tmp("bad");
    const auto input = tmp / "survey.csv";
    csv::write_text(input, "id,f1,f2\n1,Never,Always\n2,Sometimes,Maybe\n3,Rarely,Usually\n");
    PipelineConfig cfg;
    cfg.input = input;
    cfg.training.width = 2;
    cfg.training.height = 2;
    cfg.output_dir = tmp / "out";
    try {
        run_pipeline(cfg);
        FAIL("expected a data error");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.rfind("encode:", 0) == 0);
        CHECK(what.find("Maybe") != std::string::npos);
    }
    CHECK(count_svgs(tmp / "out") == 0);
    CHECK_FALSE(fs::exists(tmp / "out" / "manifest.json"));
}

TEST_CASE("pipeline config json round trip") {
    PipelineConfig cfg = small_pipeline("in.csv", "out");
    cfg.impute.k = 3;
    cfg.labels = false;
    cfg.interpolation = Interpolation::Linear;
    cfg.training.topology = Topology::Hexagonal;
    const auto back = PipelineConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK(back.impute.k == 3);
    CHECK_FALSE(back.labels);
    json bad = cfg.to_json();
    bad["trainig"] = json::object();
    CHECK_THROWS_AS(PipelineConfig::from_json(bad), UsageError);
}

TEST_CASE("safe file names") {
    CHECK(safe_file_name("check_glucose") == "check_glucose");
    CHECK(safe_file_name("a b/c") == "a_b_c");
}

TEST_CASE("cli exit codes") {
    testutil::TempDir tmp("cli");
    CHECK(cli("--help") == 0);
    CHECK(cli("") == 1);
    CHECK(cli("train --nonsense") == 1);
    CHECK(cli("synth --out " + q(tmp / "s.csv") + " --records 60 --seed 2") == 0);
    CHECK(fs::exists(tmp / "s.csv"));
    CHECK(fs::exists(tmp / "s.truth.csv"));

    csv::write_text(tmp / "bad.csv", "id,f1\n1,Never\n2,Maybe\n");
    CHECK(cli("ingest --input " + q(tmp / "bad.csv") + " --out " + q(tmp / "bad_enc.csv")) == 2);
    CHECK(cli("ingest --input " + q(tmp / "missing.csv")) == 2);
    CHECK(cli("run --input " + q(tmp / "bad.csv") + " --out " + q(tmp / "badrun")) == 2);
    CHECK(count_svgs(tmp / "badrun") == 0);

    // Invalid learning rate is a usage error.
    CHECK(cli("run --input " + q(tmp / "s.csv") + " --demographics age,gender,education --out " + q(tmp / "r") +
              " --ordering-mu-start 1.5") == 1);
}

TEST_CASE("cli stages chain and agree with the run subcommand") {
    testutil::TempDir tmp("chain");
    const auto s = tmp / "s.csv";
    REQUIRE(cli("synth --out " + q(s) + " --records 80 --seed 5 --missing 0.05") == 0);
    const std::string schema = " --demographics age,gender,education";
    const std::string grid = " --width 5 --height 4 --ordering-sweeps 3 --convergence-sweeps 3 --seed 8";
    REQUIRE(cli("ingest --input " + q(s) + schema + " --out " + q(tmp / "enc.csv") + " --summary " +
                q(tmp / "summary.txt")) == 0);
    CHECK(csv::read_text(tmp / "summary.txt").find("gender") != std::string::npos);
    REQUIRE(cli("impute --input " + q(tmp / "enc.csv") + " --out " + q(tmp / "imp.csv") + " --k 1") == 0);
    REQUIRE(cli("train --input " + q(tmp / "imp.csv") + " --out " + q(tmp / "cb.json") + " --log " +
                q(tmp / "log.csv") + grid) == 0);
    REQUIRE(cli("map --codebook " + q(tmp / "cb.json") + " --input " + q(tmp / "imp.csv") + " --out " +
                q(tmp / "assign.csv") + " --hits " + q(tmp / "hits.json") + " --groups " + q(tmp / "groups.csv")) == 0);
    REQUIRE(cli("plot --codebook " + q(tmp / "cb.json") + " --variable exercise --assignment " + q(tmp / "assign.csv") +
                " --out " + q(tmp / "ex.svg")) == 0);
    REQUIRE(cli("plot --codebook " + q(tmp / "cb.json") + " --umatrix --out " + q(tmp / "u.svg") + " --labels off") == 0);
    REQUIRE(cli("correlate --codebook " + q(tmp / "cb.json") + " --out " + q(tmp / "corr.csv")) == 0);
    CHECK(cli("plot --codebook " + q(tmp / "cb.json") + " --variable nope --out " + q(tmp / "x.svg")) == 1);

    REQUIRE(cli("run --input " + q(s) + schema + grid + " --out " + q(tmp / "run")) == 0);
    for (const char* f : {"encoded.csv", "imputed.csv", "codebook.json", "training_log.csv", "assignment.csv",
                          "correlations.csv"}) {
        INFO(f);
        const std::string staged = std::string(f) == "encoded.csv"    ? "enc.csv"
                                   : std::string(f) == "imputed.csv"   ? "imp.csv"
                                   : std::string(f) == "codebook.json" ? "cb.json"
                                   : std::string(f) == "training_log.csv" ? "log.csv"
                                   : std::string(f) == "assignment.csv"   ? "assign.csv"
                                                                          : "corr.csv";
        if (std::string(f) == "codebook.json") {
            const auto a = json::parse(csv::read_text(tmp / "run" / f));
            const auto b = json::parse(csv::read_text(tmp / staged));
            CHECK(a["weights"] == b["weights"]);
            continue;
        }
        CHECK(csv::read_text(tmp / "run" / f) == csv::read_text(tmp / staged));
    }
    CHECK(csv::read_text(tmp / "run" / "planes" / "exercise.svg") == csv::read_text(tmp / "ex.svg"));

    REQUIRE(cli("run --manifest " + q(tmp / "run" / "manifest.json") + " --out " + q(tmp / "again")) == 0);
    CHECK(csv::read_text(tmp / "again" / "manifest.json") == csv::read_text(tmp / "run" / "manifest.json"));
}
