// somkit: survey -> self-organizing map pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "somkit/analysis.hpp"
#include "somkit/config.hpp"
#include "somkit/csv.hpp"
#include "somkit/error.hpp"
#include "somkit/impute.hpp"
#include "somkit/ingest.hpp"
#include "somkit/kernels.hpp"
#include "somkit/matrix_io.hpp"
#include "somkit/pipeline.hpp"
#include "somkit/som.hpp"
#include "somkit/synth.hpp"
#include "somkit/viz.hpp"

namespace fs = std::filesystem;
using namespace somkit;

namespace {

template <typename T>
void apply(const CLI::Option* opt, T& dst, const T& src) {
    if (opt->count() > 0) {
        dst = src;
    }
}

json load_json(const fs::path& p) { return parse_json(csv::read_text(p), p.string()); }

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        csv::write_text(path, text);
    }
}

struct SchemaFlags {
    std::string file;
    Schema flags;
    CLI::Option *id = nullptr, *factors = nullptr, *numeric = nullptr, *coded = nullptr, *demographics = nullptr,
                *ignore = nullptr;

    void add(CLI::App* app) {
        app->add_option("--schema", file, "JSON file with column roles");
        id = app->add_option("--id-column", flags.id_column, "Record id column");
        factors = app->add_option("--factors", flags.factors, "Factor columns (default: all unclaimed)")->delimiter(',');
        numeric = app->add_option("--numeric", flags.numeric, "Numeric demographic columns entering the matrix")->delimiter(',');
        coded = app->add_option("--coded", flags.coded, "Categorical demographic columns coded 1..L into the matrix")->delimiter(',');
        demographics = app->add_option("--demographics", flags.demographics, "Summary-only demographic columns")->delimiter(',');
        ignore = app->add_option("--ignore", flags.ignore, "Columns to drop")->delimiter(',');
    }

    void resolve(Schema& s) const {
        if (!file.empty()) {
            from_json_into(load_json(file), s);
        }
        apply(id, s.id_column, flags.id_column);
        apply(factors, s.factors, flags.factors);
        apply(numeric, s.numeric, flags.numeric);
        apply(coded, s.coded, flags.coded);
        apply(demographics, s.demographics, flags.demographics);
        apply(ignore, s.ignore, flags.ignore);
    }
};

struct ImputeFlags {
    std::size_t k = 1;
    std::string axis = "rows";
    std::string aggregation = "auto";
    CLI::Option *k_opt = nullptr, *axis_opt = nullptr, *agg_opt = nullptr;

    void add(CLI::App* app) {
        k_opt = app->add_option("--k", k, "Neighbours per missing entry");
        axis_opt = app->add_option("--axis", axis, "rows|columns")->check(CLI::IsMember({"rows", "columns"}));
        agg_opt = app->add_option("--aggregation", aggregation, "auto|nearest|mean|median")
                      ->check(CLI::IsMember({"auto", "nearest", "mean", "median"}));
    }

    void resolve(ImputeConfig& c) const {
        apply(k_opt, c.k, k);
        if (axis_opt->count()) c.axis = parse_axis(axis);
        if (agg_opt->count()) c.aggregation = parse_aggregation(aggregation);
    }
};

struct PhaseFlags {
    PhaseSchedule v;
    CLI::Option *iters = nullptr, *sweeps = nullptr, *mu0 = nullptr, *mu1 = nullptr, *r0 = nullptr, *r1 = nullptr;

    void add(CLI::App* app, const std::string& phase) {
        iters = app->add_option("--" + phase + "-iterations", v.iterations, "Record presentations in the " + phase + " phase");
        sweeps = app->add_option("--" + phase + "-sweeps", v.sweeps, "Passes over the data when iterations is 0");
        mu0 = app->add_option("--" + phase + "-mu-start", v.mu_start);
        mu1 = app->add_option("--" + phase + "-mu-end", v.mu_end);
        r0 = app->add_option("--" + phase + "-radius-start", v.radius_start);
        r1 = app->add_option("--" + phase + "-radius-end", v.radius_end);
    }

    void resolve(PhaseSchedule& p) const {
        apply(iters, p.iterations, v.iterations);
        apply(sweeps, p.sweeps, v.sweeps);
        apply(mu0, p.mu_start, v.mu_start);
        apply(mu1, p.mu_end, v.mu_end);
        apply(r0, p.radius_start, v.radius_start);
        apply(r1, p.radius_end, v.radius_end);
    }
};

struct TrainingFlags {
    TrainingConfig v;
    std::string topology = "rectangular", neighborhood = "bubble", init = "random-uniform", stop = "fixed-iterations";
    CLI::Option *w = nullptr, *h = nullptr, *topo = nullptr, *nb = nullptr, *in = nullptr, *seed = nullptr, *st = nullptr,
                *eps = nullptr;
    PhaseFlags ordering, convergence;

    void add(CLI::App* app) {
        w = app->add_option("--width", v.width, "Grid width (default 30)");
        h = app->add_option("--height", v.height, "Grid height (default 30)");
        topo = app->add_option("--topology", topology)->check(CLI::IsMember({"rectangular", "hexagonal"}));
        nb = app->add_option("--neighborhood", neighborhood)->check(CLI::IsMember({"bubble", "gaussian"}));
        in = app->add_option("--init", init)->check(CLI::IsMember({"random-uniform", "linear"}));
        seed = app->add_option("--seed", v.seed, "Seed for initialisation and presentation order");
        st = app->add_option("--stop", stop)->check(CLI::IsMember({"fixed-iterations", "weight-delta"}));
        eps = app->add_option("--epsilon", v.epsilon, "Weight-delta stop threshold");
        ordering.add(app, "ordering");
        convergence.add(app, "convergence");
    }

    void resolve(TrainingConfig& c) const {
        apply(w, c.width, v.width);
        apply(h, c.height, v.height);
        apply(seed, c.seed, v.seed);
        apply(eps, c.epsilon, v.epsilon);
        if (topo->count()) c.topology = parse_topology(topology);
        if (nb->count()) c.neighborhood = parse_neighborhood(neighborhood);
        if (in->count()) c.init = parse_init(init);
        if (st->count()) c.stop = parse_stop(stop);
        ordering.resolve(c.ordering);
        convergence.resolve(c.convergence);
    }
};

bool parse_on_off(const std::string& s) { return s == "on"; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"somkit - self-organizing maps for categorical survey data"};
    app.require_subcommand(1);
    std::string simd = "auto";
    app.add_option("--simd", simd, "Kernel variant: auto|scalar|avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic survey CSV with planted structure");
    std::string synth_out, synth_truth, synth_spec;
    std::size_t synth_records = 611;
    std::uint64_t synth_seed = 1;
    double synth_missing = 0.02, synth_na = 0.0;
    synth->add_option("--out", synth_out, "Survey CSV to write")->required();
    synth->add_option("--truth", synth_truth, "Cluster membership sidecar (default <stem>.truth.csv next to --out)");
    synth->add_option("--spec", synth_spec, "JSON generator spec");
    auto* o_records = synth->add_option("--records", synth_records);
    auto* o_seed = synth->add_option("--seed", synth_seed);
    auto* o_missing = synth->add_option("--missing", synth_missing, "Fraction of blank response cells");
    auto* o_na = synth->add_option("--na", synth_na, "Fraction of NA response cells");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse and encode a survey; optionally summarise it");
    std::string ingest_in, ingest_out, ingest_summary, ingest_format = "text", encoding_file;
    SchemaFlags ingest_schema;
    ingest->add_option("--input", ingest_in)->required();
    ingest->add_option("--out", ingest_out, "Encoded matrix CSV");
    ingest->add_option("--summary", ingest_summary, "Summary report path ('-' for stdout)");
    ingest->add_option("--format", ingest_format, "Summary format")->check(CLI::IsMember({"text", "csv"}));
    ingest->add_option("--encoding", encoding_file, "JSON token->code scheme");
    ingest_schema.add(ingest);

    // impute
    auto* impute = app.add_subcommand("impute", "k-nearest-neighbour imputation of a matrix");
    std::string impute_in, impute_out;
    ImputeFlags impute_flags;
    impute->add_option("--input", impute_in)->required();
    impute->add_option("--out", impute_out)->required();
    impute_flags.add(impute);

    // train
    auto* trainc = app.add_subcommand("train", "Train a map on a fully observed matrix");
    std::string train_in, train_out, train_log, train_config;
    TrainingFlags train_flags;
    trainc->add_option("--input", train_in)->required();
    trainc->add_option("--out", train_out, "Codebook JSON")->required();
    trainc->add_option("--log", train_log, "Training log CSV");
    trainc->add_option("--config", train_config, "JSON file with a 'training' section");
    train_flags.add(trainc);

    // map
    auto* mapc = app.add_subcommand("map", "Assign records to cells; write hit map, U-matrix and groups");
    std::string map_cb, map_in, map_out, map_hits, map_umat, map_groups;
    double map_radius = 1.0;
    mapc->add_option("--codebook", map_cb)->required();
    mapc->add_option("--input", map_in, "Fully observed matrix CSV")->required();
    mapc->add_option("--out", map_out, "Assignment CSV")->required();
    mapc->add_option("--hits", map_hits, "Hit map JSON");
    mapc->add_option("--umatrix", map_umat, "U-matrix JSON");
    mapc->add_option("--groups", map_groups, "Similar-record groups CSV");
    mapc->add_option("--radius", map_radius, "Grid radius for groups");

    // plot
    auto* plot = app.add_subcommand("plot", "Render a component plane, U-matrix or hit map as SVG");
    std::string plot_cb, plot_var, plot_assign, plot_out, plot_labels = "on", plot_interp = "discrete", plot_title;
    bool plot_umat = false, plot_hits = false;
    double plot_cell = 24.0;
    plot->add_option("--codebook", plot_cb)->required();
    auto* o_var = plot->add_option("--variable", plot_var, "Component plane to draw");
    auto* o_umat = plot->add_flag("--umatrix", plot_umat, "Draw the U-matrix");
    auto* o_hits = plot->add_flag("--hits", plot_hits, "Draw the hit map (needs --assignment)");
    o_var->excludes(o_umat)->excludes(o_hits);
    o_umat->excludes(o_hits);
    plot->add_option("--assignment", plot_assign, "Assignment CSV for labels and hits");
    plot->add_option("--out", plot_out, "SVG path")->required();
    plot->add_option("--labels", plot_labels)->check(CLI::IsMember({"on", "off"}));
    plot->add_option("--interp", plot_interp)->check(CLI::IsMember({"discrete", "linear"}));
    plot->add_option("--cell-size", plot_cell);
    plot->add_option("--title", plot_title);

    // correlate
    auto* correlate = app.add_subcommand("correlate", "Pairwise component-plane correlations");
    std::string corr_cb, corr_out, corr_in;
    std::vector<std::string> corr_pair;
    bool corr_raw = false;
    correlate->add_option("--codebook", corr_cb);
    correlate->add_option("--out", corr_out, "CSV path (default stdout)");
    correlate->add_flag("--raw", corr_raw, "Correlate data columns instead (needs --input)");
    correlate->add_option("--input", corr_in, "Matrix CSV for --raw");
    correlate->add_option("--pair", corr_pair, "Print a single correlation: a,b")->delimiter(',')->expected(2);

    // run
    auto* run = app.add_subcommand("run", "Full pipeline with a manifest of every artifact");
    std::string run_config, run_in, run_out, run_manifest, run_labels = "on", run_interp = "discrete";
    double run_radius = 1.0;
    SchemaFlags run_schema;
    ImputeFlags run_impute;
    TrainingFlags run_training;
    run->add_option("--config", run_config, "JSON pipeline config");
    auto* o_run_in = run->add_option("--input", run_in);
    auto* o_run_out = run->add_option("--out", run_out, "Output directory");
    run->add_option("--manifest", run_manifest, "Re-run the configuration recorded in a manifest");
    run->add_option("--encoding", encoding_file, "JSON token->code scheme");
    auto* o_run_labels = run->add_option("--labels", run_labels)->check(CLI::IsMember({"on", "off"}));
    auto* o_run_interp = run->add_option("--interp", run_interp)->check(CLI::IsMember({"discrete", "linear"}));
    auto* o_run_radius = run->add_option("--group-radius", run_radius);
    run_schema.add(run);
    run_impute.add(run);
    run_training.add(run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (!kernels::set_active(simd)) {
            throw UsageError("kernel variant '" + simd + "' is not available on this machine");
        }

        if (*synth) {
            SynthSpec spec = SynthSpec::survey_like(synth_seed);
            if (!synth_spec.empty()) {
                from_json_into(load_json(synth_spec), spec);
            }
            apply(o_records, spec.records, synth_records);
            apply(o_seed, spec.seed, synth_seed);
            apply(o_missing, spec.missing_rate, synth_missing);
            apply(o_na, spec.na_rate, synth_na);
            const SynthOutput out = generate_synthetic(spec);
            if (synth_truth.empty()) {
                fs::path p(synth_out);
                synth_truth = (p.parent_path() / (p.stem().string() + ".truth.csv")).string();
            }
            csv::write_text(synth_out, out.csv);
            csv::write_text(synth_truth, out.truth_csv);
            std::cerr << "wrote " << spec.records << " records x " << spec.factors.size() << " factors to " << synth_out
                      << " (demographic columns: age,gender,education)\n";
            return 0;
        }

        if (*ingest) {
            Schema schema;
            ingest_schema.resolve(schema);
            EncodingScheme scheme = EncodingScheme::likert();
            if (!encoding_file.empty()) {
                from_json_into(load_json(encoding_file), scheme);
            }
            const SurveyTable table = parse_survey(ingest_in, schema);
            const EncodedMatrix m = encode(table, scheme);
            if (!ingest_out.empty()) {
                write_matrix(ingest_out, m);
            }
            if (!ingest_summary.empty() || ingest_out.empty()) {
                const SummaryReport rep = summarize(table, scheme);
                emit(ingest_summary, ingest_format == "csv" ? rep.to_csv() : rep.to_text());
            }
            std::cerr << "encoded " << m.rows << " x " << m.cols << " (" << m.missing_count() << " missing)\n";
            return 0;
        }

        if (*impute) {
            ImputeConfig cfg;
            impute_flags.resolve(cfg);
            const EncodedMatrix out = knn_impute(read_matrix(impute_in), cfg);
            write_matrix(impute_out, out);
            return 0;
        }

        if (*trainc) {
            TrainingConfig cfg;
            if (!train_config.empty()) {
                const json j = load_json(train_config);
                from_json_into(j.contains("training") ? j.at("training") : j, cfg);
            }
            train_flags.resolve(cfg);
            const EncodedMatrix data = read_matrix(train_in);
            const TrainResult res = train(data, cfg);
            const double te = topographic_error(data, res.codebook);
            CodebookDocument doc{res.codebook, cfg.resolved(data.rows),
                                 {{"quantization_error", res.log.final_quantization_error()}, {"topographic_error", te}}};
            csv::write_text(train_out, codebook_to_json(doc));
            if (!train_log.empty()) {
                csv::write_text(train_log, res.log.to_csv());
            }
            std::cerr << "quantization error " << res.log.initial_quantization_error() << " -> "
                      << res.log.final_quantization_error() << ", topographic error " << te << "\n";
            return 0;
        }

        if (*mapc) {
            const Codebook cb = codebook_from_json(csv::read_text(map_cb)).codebook;
            const BmuAssignment a = assign_bmus(read_matrix(map_in), cb);
            csv::write_text(map_out, a.to_csv(cb.grid));
            if (!map_hits.empty()) csv::write_text(map_hits, hit_map(a, cb).to_json().dump(1) + "\n");
            if (!map_umat.empty()) csv::write_text(map_umat, u_matrix(cb).to_json().dump(1) + "\n");
            if (!map_groups.empty()) csv::write_text(map_groups, groups_to_csv(similar_groups(a, cb.grid, map_radius)));
            return 0;
        }

        if (*plot) {
            const Codebook cb = codebook_from_json(csv::read_text(plot_cb)).codebook;
            std::optional<GridMap> hits;
            if (!plot_assign.empty()) {
                hits = hit_map(BmuAssignment::from_csv(csv::read_text(plot_assign)), cb);
            }
            GridMap map;
            ColorScale scale;
            if (plot_umat) {
                map = u_matrix(cb);
                const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
                scale = range_scale(*lo, *hi);
            } else if (plot_hits) {
                if (!hits) throw UsageError("plot --hits needs --assignment");
                map = *hits;
                const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
                scale = range_scale(*lo, *hi);
            } else {
                if (plot_var.empty()) throw UsageError("plot needs --variable, --umatrix or --hits");
                map = component_plane(cb, plot_var);
                scale = default_likert_scale();
                scale.interpolation = parse_interpolation(plot_interp);
                if (hits) map.labels = hits->labels;
            }
            const RenderResult rr = render(map, scale, {plot_title.empty() ? map.title : plot_title, plot_cell, parse_on_off(plot_labels)});
            csv::write_text(plot_out, rr.svg);
            if (rr.clamped) {
                std::cerr << "warning: " << rr.clamped << " cell values outside the colour scale were clamped\n";
            }
            return 0;
        }

        if (*correlate) {
            if (corr_raw) {
                if (corr_in.empty()) throw UsageError("correlate --raw needs --input");
                const EncodedMatrix m = read_matrix(corr_in);
                if (!corr_pair.empty()) {
                    const auto ca = m.column_index(corr_pair[0]);
                    const auto cbi = m.column_index(corr_pair[1]);
                    std::cout << csv::format_double(raw_correlation_report(m).at(ca, cbi)) << "\n";
                } else {
                    emit(corr_out, raw_correlation_report(m).to_csv());
                }
                return 0;
            }
            if (corr_cb.empty()) throw UsageError("correlate needs --codebook (or --raw --input)");
            const Codebook cb = codebook_from_json(csv::read_text(corr_cb)).codebook;
            if (!corr_pair.empty()) {
                std::cout << csv::format_double(plane_correlation(cb, corr_pair[0], corr_pair[1])) << "\n";
            } else {
                emit(corr_out, correlation_report(cb).to_csv());
            }
            return 0;
        }

        if (*run) {
            PipelineConfig cfg;
            if (!run_manifest.empty()) {
                cfg = config_from_manifest(Manifest::from_json(csv::read_text(run_manifest)));
            } else if (!run_config.empty()) {
                cfg = PipelineConfig::from_json(load_json(run_config));
            }
            apply(o_run_in, cfg.input, fs::path(run_in));
            apply(o_run_out, cfg.output_dir, fs::path(run_out));
            if (!encoding_file.empty()) {
                from_json_into(load_json(encoding_file), cfg.encoding);
            }
            run_schema.resolve(cfg.schema);
            run_impute.resolve(cfg.impute);
            run_training.resolve(cfg.training);
            if (o_run_labels->count()) cfg.labels = parse_on_off(run_labels);
            if (o_run_interp->count()) cfg.interpolation = parse_interpolation(run_interp);
            apply(o_run_radius, cfg.group_radius, run_radius);
            const Manifest m = run_pipeline(cfg);
            std::cerr << "wrote " << m.artifacts.size() << " artifacts and manifest.json to " << cfg.output_dir.string() << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
