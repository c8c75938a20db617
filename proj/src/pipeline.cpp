#include "somkit/pipeline.hpp"

#include <algorithm>

#include "somkit/analysis.hpp"
#include "somkit/csv.hpp"
#include "somkit/error.hpp"
#include "somkit/hash.hpp"
#include "somkit/matrix_io.hpp"

namespace somkit {

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw_error(e.kind(), std::string(name) + ": " + e.what());
    } catch (const std::exception& e) {
        throw DataError(std::string(name) + ": " + e.what());
    }
}

struct PendingFile {
    std::string kind;
    std::string path;
    std::string content;
};

} // namespace

void PipelineConfig::validate() const {
    if (input.empty()) {
        throw UsageError("pipeline: no input file given");
    }
    encoding.validate();
    if (impute.k < 1) {
        throw UsageError("pipeline: impute k must be at least 1");
    }
    training.grid().validate();
    if (!(cell_size > 0.0) || !(group_radius >= 0.0)) {
        throw UsageError("pipeline: cell size must be positive and group radius non-negative");
    }
}

json PipelineConfig::to_json() const {
    return {{"input", input.generic_string()},
            {"schema", somkit::to_json(schema)},
            {"encoding", somkit::to_json(encoding)},
            {"impute", somkit::to_json(impute)},
            {"training", somkit::to_json(training)},
            {"render",
             {{"labels", labels},
              {"interp", interpolation == Interpolation::Discrete ? "discrete" : "linear"},
              {"cell_size", cell_size}}},
            {"groups", {{"radius", group_radius}}}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    if (!j.is_object()) {
        throw UsageError("pipeline config: expected a JSON object");
    }
    for (const auto& [key, _] : j.items()) {
        static const std::vector<std::string> known = {"input", "output", "schema", "encoding", "impute", "training", "render", "groups"};
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw UsageError("pipeline config: unknown key '" + key + "'");
        }
    }
    try {
        if (j.contains("input")) c.input = j.at("input").get<std::string>();
        if (j.contains("output")) c.output_dir = j.at("output").get<std::string>();
        if (j.contains("schema")) from_json_into(j.at("schema"), c.schema);
        if (j.contains("encoding")) from_json_into(j.at("encoding"), c.encoding);
        if (j.contains("impute")) from_json_into(j.at("impute"), c.impute);
        if (j.contains("training")) from_json_into(j.at("training"), c.training);
        if (j.contains("render")) {
            const auto& r = j.at("render");
            c.labels = r.value("labels", c.labels);
            if (r.contains("interp")) c.interpolation = parse_interpolation(r.at("interp").get<std::string>());
            c.cell_size = r.value("cell_size", c.cell_size);
        }
        if (j.contains("groups")) {
            c.group_radius = j.at("groups").value("radius", c.group_radius);
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("pipeline config: ") + e.what());
    }
    return c;
}

std::string safe_file_name(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "_" : out;
}

std::string Manifest::to_json() const {
    json metrics_j = json::object();
    for (const auto& [k, v] : metrics) {
        metrics_j[k] = v;
    }
    json arts = json::array();
    for (const auto& a : artifacts) {
        arts.push_back({{"kind", a.kind}, {"path", a.path}, {"sha256", a.sha256}});
    }
    const json j = {{"format", "somkit.manifest"}, {"version", 1},       {"input_sha256", input_sha256},
                    {"config", config},            {"metrics", metrics_j}, {"artifacts", arts}};
    return j.dump(1) + "\n";
}

Manifest Manifest::from_json(std::string_view text) {
    const json j = parse_json(text, "manifest");
    Manifest m;
    try {
        if (j.at("format") != "somkit.manifest") {
            throw DataError("not a somkit manifest");
        }
        m.config = j.at("config");
        m.input_sha256 = j.at("input_sha256").get<std::string>();
        for (const auto& [k, v] : j.at("metrics").items()) {
            m.metrics.emplace_back(k, v.get<double>());
        }
        for (const auto& a : j.at("artifacts")) {
            m.artifacts.push_back({a.at("kind").get<std::string>(), a.at("path").get<std::string>(), a.at("sha256").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("manifest: malformed document (") + e.what() + ")");
    }
    return m;
}

std::size_t Manifest::count(const std::string& kind) const {
    return static_cast<std::size_t>(std::count_if(artifacts.begin(), artifacts.end(), [&](const Artifact& a) { return a.kind == kind; }));
}

PipelineConfig config_from_manifest(const Manifest& m) {
    PipelineConfig c = PipelineConfig::from_json(m.config);
    const std::string digest = sha256_hex(csv::read_text(c.input));
    if (digest != m.input_sha256) {
        throw DataError("input file " + c.input.string() + " does not match the digest recorded in the manifest");
    }
    return c;
}

Manifest run_pipeline(const PipelineConfig& cfg) {
    stage("config", [&] { cfg.validate(); return 0; });
    if (cfg.output_dir.empty()) {
        throw UsageError("pipeline: no output directory given");
    }

    const std::string input_text = stage("parse", [&] { return csv::read_text(cfg.input); });
    const SurveyTable table = stage("parse", [&] {
        if (!std::filesystem::exists(cfg.input)) {
            throw DataError("survey file not found: " + cfg.input.string());
        }
        return parse_survey_text(input_text, cfg.schema);
    });
    const EncodedMatrix encoded = stage("encode", [&] { return encode(table, cfg.encoding); });
    const SummaryReport summary = stage("summarize", [&] { return summarize(table, cfg.encoding); });
    const EncodedMatrix imputed = stage("impute", [&] { return knn_impute(encoded, cfg.impute); });
    const TrainingConfig training = cfg.training.resolved(imputed.rows);
    const TrainResult trained = stage("train", [&] { return train(imputed, cfg.training); });
    const Codebook& cb = trained.codebook;
    const BmuAssignment assign = stage("assign", [&] { return assign_bmus(imputed, cb); });

    std::vector<PendingFile> files;
    Manifest manifest;
    manifest.config = cfg.to_json();
    manifest.input_sha256 = sha256_hex(input_text);

    stage("analysis", [&] {
        const double te = topographic_error(imputed, cb);
        manifest.metrics = {{"records", static_cast<double>(imputed.rows)},
                            {"variables", static_cast<double>(imputed.cols)},
                            {"missing_entries", static_cast<double>(encoded.missing_count())},
                            {"iterations", static_cast<double>(trained.log.iterations)},
                            {"sweeps", static_cast<double>(trained.log.sweeps.size() - 1)},
                            {"quantization_error_initial", trained.log.initial_quantization_error()},
                            {"quantization_error_final", trained.log.final_quantization_error()},
                            {"topographic_error", te}};

        CodebookDocument doc{cb, training, {{"quantization_error", trained.log.final_quantization_error()}, {"topographic_error", te}}};
        files.push_back({"summary", "summary.txt", summary.to_text()});
        files.push_back({"encoded-matrix", "encoded.csv", matrix_to_csv(encoded)});
        files.push_back({"imputed-matrix", "imputed.csv", matrix_to_csv(imputed)});
        files.push_back({"codebook", "codebook.json", codebook_to_json(doc)});
        files.push_back({"training-log", "training_log.csv", trained.log.to_csv()});
        files.push_back({"assignment", "assignment.csv", assign.to_csv(cb.grid)});
        files.push_back({"groups", "groups.csv", groups_to_csv(similar_groups(assign, cb.grid, cfg.group_radius))});
        files.push_back({"correlation", "correlations.csv", correlation_report(cb).to_csv()});

        const GridMap hits = hit_map(assign, cb);
        const GridMap umat = u_matrix(cb);
        files.push_back({"gridmap", "maps/hits.json", hits.to_json().dump(1) + "\n"});
        files.push_back({"gridmap", "maps/u_matrix.json", umat.to_json().dump(1) + "\n"});

        std::size_t clamped = 0;
        for (const auto& var : cb.col_names) {
            GridMap plane = component_plane(cb, var);
            plane.labels = hits.labels;
            ColorScale scale = default_likert_scale();
            scale.interpolation = cfg.interpolation;
            const RenderResult rr = render(plane, scale, {var, cfg.cell_size, cfg.labels});
            clamped += rr.clamped;
            files.push_back({"component-plane", "planes/" + safe_file_name(var) + ".svg", rr.svg});
        }
        auto range_of = [](const GridMap& m) { return std::minmax_element(m.values.begin(), m.values.end()); };
        const auto [ulo, uhi] = range_of(umat);
        files.push_back({"u-matrix", "u_matrix.svg", render(umat, range_scale(*ulo, *uhi), {"U-matrix", cfg.cell_size, false}).svg});
        const auto [hlo, hhi] = range_of(hits);
        files.push_back({"hit-map", "hits.svg", render(hits, range_scale(*hlo, *hhi), {"Hits", cfg.cell_size, cfg.labels}).svg});
        manifest.metrics.emplace_back("clamped_cells", static_cast<double>(clamped));
        return 0;
    });

    stage("write", [&] {
        std::filesystem::create_directories(cfg.output_dir);
        for (const auto& f : files) {
            csv::write_text(cfg.output_dir / f.path, f.content);
            manifest.artifacts.push_back({f.kind, f.path, sha256_hex(f.content)});
        }
        csv::write_text(cfg.output_dir / "manifest.json", manifest.to_json());
        return 0;
    });
    return manifest;
}

} // namespace somkit
