#include "somkit/config.hpp"

#include <set>

#include "somkit/error.hpp"

namespace somkit {

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
    if (!j.is_object()) {
        throw UsageError(std::string(what) + ": expected a JSON object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.contains(key)) {
            throw UsageError(std::string(what) + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const char* what) {
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string(what) + ": key '" + key + "' has the wrong type");
    }
}

} // namespace

json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(what + ": invalid JSON (" + e.what() + ")");
    }
}

json to_json(const Schema& s) {
    return {{"id", s.id_column}, {"factors", s.factors}, {"numeric", s.numeric},
            {"coded", s.coded},  {"demographics", s.demographics}, {"ignore", s.ignore}};
}

void from_json_into(const json& j, Schema& s) {
    check_keys(j, {"id", "factors", "numeric", "coded", "demographics", "ignore"}, "schema");
    read(j, "id", s.id_column, "schema");
    read(j, "factors", s.factors, "schema");
    read(j, "numeric", s.numeric, "schema");
    read(j, "coded", s.coded, "schema");
    read(j, "demographics", s.demographics, "schema");
    read(j, "ignore", s.ignore, "schema");
}

json to_json(const EncodingScheme& s) {
    // Sort by code, then token, so the echo reads Never..Always.
    std::vector<std::pair<std::string, int>> codes(s.codes.begin(), s.codes.end());
    std::stable_sort(codes.begin(), codes.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    json tokens = json::object();
    for (const auto& [tok, code] : codes) {
        tokens[tok] = code;
    }
    return {{"tokens", tokens},
            {"na_token", s.na_token},
            {"missing_tokens", std::vector<std::string>(s.missing_tokens.begin(), s.missing_tokens.end())}};
}

void from_json_into(const json& j, EncodingScheme& s) {
    check_keys(j, {"tokens", "na_token", "missing_tokens"}, "encoding");
    if (j.contains("tokens")) {
        std::map<std::string, int> codes;
        read(j, "tokens", codes, "encoding");
        s.codes = std::move(codes);
    }
    read(j, "na_token", s.na_token, "encoding");
    if (j.contains("missing_tokens")) {
        std::vector<std::string> m;
        read(j, "missing_tokens", m, "encoding");
        s.missing_tokens = {m.begin(), m.end()};
    }
}

json to_json(const ImputeConfig& c) {
    return {{"k", c.k}, {"axis", to_string(c.axis)}, {"aggregation", to_string(c.aggregation)}};
}

void from_json_into(const json& j, ImputeConfig& c) {
    check_keys(j, {"k", "axis", "aggregation"}, "impute");
    read(j, "k", c.k, "impute");
    std::string s;
    if (j.contains("axis")) {
        read(j, "axis", s, "impute");
        c.axis = parse_axis(s);
    }
    if (j.contains("aggregation")) {
        read(j, "aggregation", s, "impute");
        c.aggregation = parse_aggregation(s);
    }
}

json to_json(const PhaseSchedule& p) {
    return {{"iterations", p.iterations}, {"sweeps", p.sweeps},           {"mu_start", p.mu_start},
            {"mu_end", p.mu_end},         {"radius_start", p.radius_start}, {"radius_end", p.radius_end}};
}

void from_json_into(const json& j, PhaseSchedule& p) {
    check_keys(j, {"iterations", "sweeps", "mu_start", "mu_end", "radius_start", "radius_end"}, "phase");
    read(j, "iterations", p.iterations, "phase");
    read(j, "sweeps", p.sweeps, "phase");
    read(j, "mu_start", p.mu_start, "phase");
    read(j, "mu_end", p.mu_end, "phase");
    read(j, "radius_start", p.radius_start, "phase");
    read(j, "radius_end", p.radius_end, "phase");
}

json to_json(const TrainingConfig& c) {
    return {{"width", c.width},
            {"height", c.height},
            {"topology", to_string(c.topology)},
            {"neighborhood", to_string(c.neighborhood)},
            {"init", to_string(c.init)},
            {"seed", c.seed},
            {"stop", to_string(c.stop)},
            {"epsilon", c.epsilon},
            {"ordering", to_json(c.ordering)},
            {"convergence", to_json(c.convergence)}};
}

void from_json_into(const json& j, TrainingConfig& c) {
    check_keys(j, {"width", "height", "topology", "neighborhood", "init", "seed", "stop", "epsilon", "ordering", "convergence"},
               "training");
    read(j, "width", c.width, "training");
    read(j, "height", c.height, "training");
    read(j, "seed", c.seed, "training");
    read(j, "epsilon", c.epsilon, "training");
    std::string s;
    if (j.contains("topology")) {
        read(j, "topology", s, "training");
        c.topology = parse_topology(s);
    }
    if (j.contains("neighborhood")) {
        read(j, "neighborhood", s, "training");
        c.neighborhood = parse_neighborhood(s);
    }
    if (j.contains("init")) {
        read(j, "init", s, "training");
        c.init = parse_init(s);
    }
    if (j.contains("stop")) {
        read(j, "stop", s, "training");
        c.stop = parse_stop(s);
    }
    if (j.contains("ordering")) from_json_into(j.at("ordering"), c.ordering);
    if (j.contains("convergence")) from_json_into(j.at("convergence"), c.convergence);
}

std::string codebook_to_json(const CodebookDocument& doc) {
    const Codebook& cb = doc.codebook;
    cb.validate();
    json weights = json::array();
    for (std::size_t i = 0; i < cb.cells(); ++i) {
        const auto w = cb.weight(i);
        weights.push_back(std::vector<double>(w.begin(), w.end()));
    }
    json j = {{"format", "somkit.codebook"},
              {"version", 1},
              {"width", cb.grid.width},
              {"height", cb.grid.height},
              {"topology", to_string(cb.grid.topology)},
              {"columns", cb.col_names},
              {"weights", weights}};
    if (doc.config) {
        j["training"] = to_json(*doc.config);
        j["seed"] = doc.config->seed;
    }
    json metrics = json::object();
    for (const auto& [k, v] : doc.metrics) {
        metrics[k] = v;
    }
    j["metrics"] = metrics;
    return j.dump(1) + "\n";
}

CodebookDocument codebook_from_json(std::string_view text) {
    const json j = parse_json(text, "codebook");
    CodebookDocument doc;
    try {
        if (j.at("format") != "somkit.codebook") {
            throw DataError("not a somkit codebook document");
        }
        GridShape g{j.at("width").get<std::size_t>(), j.at("height").get<std::size_t>(),
                    parse_topology(j.at("topology").get<std::string>())};
        g.validate();
        Codebook cb(g, j.at("columns").get<std::vector<std::string>>());
        const auto& w = j.at("weights");
        if (!w.is_array() || w.size() != g.cells()) {
            throw DataError("codebook: expected " + std::to_string(g.cells()) + " weight vectors");
        }
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const auto v = w[i].get<std::vector<double>>();
            if (v.size() != cb.dim) {
                throw DataError("codebook: weight vector " + std::to_string(i) + " has the wrong dimension");
            }
            std::copy(v.begin(), v.end(), cb.weight(i).begin());
        }
        cb.validate();
        doc.codebook = std::move(cb);
        if (j.contains("training")) {
            TrainingConfig cfg;
            from_json_into(j.at("training"), cfg);
            doc.config = cfg;
        }
        if (j.contains("metrics")) {
            for (const auto& [k, v] : j.at("metrics").items()) {
                doc.metrics.emplace_back(k, v.get<double>());
            }
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("codebook: malformed document (") + e.what() + ")");
    }
    return doc;
}

} // namespace somkit
