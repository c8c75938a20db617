#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "somkit/config.hpp"
#include "somkit/impute.hpp"
#include "somkit/ingest.hpp"
#include "somkit/som.hpp"
#include "somkit/viz.hpp"

namespace somkit {

struct PipelineConfig {
    std::filesystem::path input;
    Schema schema;
    EncodingScheme encoding = EncodingScheme::likert();
    ImputeConfig impute;
    TrainingConfig training;
    bool labels = true;
    Interpolation interpolation = Interpolation::Discrete;
    double cell_size = 24.0;
    /// Grid radius for the similar-record groups listing.
    double group_radius = 1.0;
    std::filesystem::path output_dir;

    void validate() const;
    /// Everything except the output directory, so manifests do not depend on it.
    json to_json() const;
    static PipelineConfig from_json(const json& j);
};

struct Artifact {
    std::string kind;
    /// Relative to the output directory, '/'-separated.
    std::string path;
    std::string sha256;
};

struct Manifest {
    json config;
    std::string input_sha256;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<Artifact> artifacts;

    std::string to_json() const;
    static Manifest from_json(std::string_view text);
    std::size_t count(const std::string& kind) const;
};

/// parse -> encode -> impute -> train -> assign -> maps, correlations and SVGs.
/// Every artifact is computed before anything is written; a failing stage
/// throws an Error prefixed with the stage name and leaves no output.
/// Writes manifest.json last and returns it.
Manifest run_pipeline(const PipelineConfig& cfg);

/// Reloads the configuration echoed in a manifest. Throws DataError if the
/// input file no longer matches the recorded digest.
PipelineConfig config_from_manifest(const Manifest& m);

/// File-system safe form of a variable name.
std::string safe_file_name(const std::string& name);

} // namespace somkit
