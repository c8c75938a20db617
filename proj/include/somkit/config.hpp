#pragma once

// JSON (de)serialisation of the configuration structs. Readers accept partial
// objects: absent keys keep their defaults, unknown keys are rejected.

#include <optional>

#include "json.hpp"

#include "somkit/impute.hpp"
#include "somkit/ingest.hpp"
#include "somkit/som.hpp"

namespace somkit {

using json = nlohmann::ordered_json;

json to_json(const Schema& s);
json to_json(const EncodingScheme& s);
json to_json(const ImputeConfig& c);
json to_json(const PhaseSchedule& p);
json to_json(const TrainingConfig& c);

void from_json_into(const json& j, Schema& s);
void from_json_into(const json& j, EncodingScheme& s);
void from_json_into(const json& j, ImputeConfig& c);
void from_json_into(const json& j, PhaseSchedule& p);
void from_json_into(const json& j, TrainingConfig& c);

json parse_json(std::string_view text, const std::string& what);

struct CodebookDocument {
    Codebook codebook;
    std::optional<TrainingConfig> config;
    /// Name -> value, written in insertion order.
    std::vector<std::pair<std::string, double>> metrics;
};

std::string codebook_to_json(const CodebookDocument& doc);
CodebookDocument codebook_from_json(std::string_view text);

} // namespace somkit
