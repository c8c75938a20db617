#include "somkit/analysis.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "somkit/csv.hpp"
#include "somkit/error.hpp"

namespace somkit {

void GridMap::validate() const {
    grid.validate();
    if (values.size() != grid.cells() || labels.size() != grid.cells()) {
        throw DataError("grid map: value or label count does not match the grid");
    }
}

json GridMap::to_json() const {
    json legend_j = json::array();
    for (const auto& [v, name] : legend) {
        legend_j.push_back({{"value", v}, {"meaning", name}});
    }
    return {{"format", "somkit.gridmap"}, {"version", 1},      {"title", title},   {"width", grid.width},
            {"height", grid.height},      {"topology", to_string(grid.topology)}, {"values", values},
            {"labels", labels},           {"legend", legend_j}};
}

GridMap GridMap::from_json(const json& j) {
    try {
        GridMap m(GridShape{j.at("width").get<std::size_t>(), j.at("height").get<std::size_t>(),
                            parse_topology(j.at("topology").get<std::string>())});
        m.values = j.at("values").get<std::vector<double>>();
        if (j.contains("labels")) {
            m.labels = j.at("labels").get<std::vector<std::vector<std::string>>>();
        }
        if (j.contains("title")) {
            m.title = j.at("title").get<std::string>();
        }
        if (j.contains("legend")) {
            for (const auto& e : j.at("legend")) {
                m.legend.emplace_back(e.at("value").get<double>(), e.at("meaning").get<std::string>());
            }
        }
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("grid map: malformed document (") + e.what() + ")");
    }
}

std::vector<std::pair<double, std::string>> likert_legend() {
    return {{1.0, "Never"}, {2.0, "Rarely"}, {3.0, "Sometimes"}, {4.0, "Usually"}, {5.0, "Always"}};
}

GridMap component_plane(const Codebook& cb, const std::string& variable) {
    const std::size_t v = cb.column_index(variable);
    GridMap m(cb.grid);
    for (std::size_t i = 0; i < cb.cells(); ++i) {
        m.values[i] = cb.weight(i)[v];
    }
    m.legend = likert_legend();
    m.title = variable;
    return m;
}

GridMap u_matrix(const Codebook& cb) {
    GridMap m(cb.grid);
    for (std::size_t i = 0; i < cb.cells(); ++i) {
        const auto nbrs = cb.grid.neighbors(i);
        if (nbrs.empty()) {
            continue;
        }
        double sum = 0.0;
        for (auto j : nbrs) {
            double s = 0.0;
            for (std::size_t d = 0; d < cb.dim; ++d) {
                const double diff = cb.weight(i)[d] - cb.weight(j)[d];
                s += diff * diff;
            }
            sum += std::sqrt(s);
        }
        m.values[i] = sum / static_cast<double>(nbrs.size());
    }
    m.title = "U-matrix";
    return m;
}

GridMap hit_map(const BmuAssignment& assign, const Codebook& cb) {
    GridMap m(cb.grid);
    for (std::size_t k = 0; k < assign.size(); ++k) {
        const std::size_t c = assign.cells[k];
        if (c >= cb.cells()) {
            throw DataError("assignment of '" + assign.record_ids[k] + "' points outside the grid");
        }
        m.values[c] += 1.0;
        m.labels[c].push_back(assign.record_ids[k]);
    }
    m.title = "Hits";
    return m;
}

namespace {

struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }
};

} // namespace

std::vector<std::vector<std::string>> similar_groups(const BmuAssignment& assign, const GridShape& grid, double radius) {
    if (!(radius >= 0.0)) {
        throw UsageError("similar_groups: radius must be non-negative");
    }
    std::vector<std::size_t> occupied;
    std::vector<std::uint8_t> seen(grid.cells(), 0);
    for (std::size_t k = 0; k < assign.size(); ++k) {
        const std::size_t c = assign.cells[k];
        if (c >= grid.cells()) {
            throw DataError("assignment of '" + assign.record_ids[k] + "' points outside the grid");
        }
        if (!seen[c]) {
            seen[c] = 1;
            occupied.push_back(c);
        }
    }
    // Records sharing a cell are always linked; distinct cells link within the radius.
    DisjointSet cells(grid.cells());
    for (std::size_t a = 0; a < occupied.size(); ++a) {
        for (std::size_t b = a + 1; b < occupied.size(); ++b) {
            if (grid.distance(occupied[a], occupied[b]) <= radius) {
                cells.unite(occupied[a], occupied[b]);
            }
        }
    }
    std::vector<std::vector<std::string>> groups;
    std::vector<std::size_t> slot(grid.cells(), SIZE_MAX);
    for (std::size_t k = 0; k < assign.size(); ++k) {
        const std::size_t root = cells.find(assign.cells[k]);
        if (slot[root] == SIZE_MAX) {
            slot[root] = groups.size();
            groups.emplace_back();
        }
        groups[slot[root]].push_back(assign.record_ids[k]);
    }
    return groups;
}

std::string groups_to_csv(const std::vector<std::vector<std::string>>& groups) {
    std::string out = "group,size,id\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (const auto& id : groups[g]) {
            out += std::to_string(g) + "," + std::to_string(groups[g].size()) + "," + csv::escape(id) + "\n";
        }
    }
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw UsageError("pearson: need two equally sized series with at least two points");
    }
    const auto n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        throw NumericError("correlation undefined: zero-variance series");
    }
    const double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

namespace {

std::vector<double> plane_values(const Codebook& cb, std::size_t v) {
    std::vector<double> out(cb.cells());
    for (std::size_t i = 0; i < cb.cells(); ++i) {
        out[i] = cb.weight(i)[v];
    }
    return out;
}

std::vector<double> data_column(const EncodedMatrix& m, std::size_t c) {
    std::vector<double> out(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        out[r] = m.at(r, c);
    }
    return out;
}

CorrelationMatrix build_report(const std::vector<std::string>& names, const std::vector<std::vector<double>>& series) {
    const std::size_t n = names.size();
    CorrelationMatrix cm{names, std::vector<double>(n * n, std::numeric_limits<double>::quiet_NaN())};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double r = std::numeric_limits<double>::quiet_NaN();
            try {
                r = pearson(series[i], series[j]);
            } catch (const NumericError&) {
            }
            cm.values[i * n + j] = r;
            cm.values[j * n + i] = r;
        }
    }
    return cm;
}

} // namespace

double plane_correlation(const Codebook& cb, const std::string& var_a, const std::string& var_b) {
    const auto a = plane_values(cb, cb.column_index(var_a));
    const auto b = plane_values(cb, cb.column_index(var_b));
    try {
        return pearson(a, b);
    } catch (const NumericError&) {
        throw NumericError("correlation of '" + var_a + "' and '" + var_b + "' is undefined: a plane is constant");
    }
}

CorrelationMatrix correlation_report(const Codebook& cb) {
    std::vector<std::vector<double>> series;
    for (std::size_t v = 0; v < cb.dim; ++v) {
        series.push_back(plane_values(cb, v));
    }
    return build_report(cb.col_names, series);
}

CorrelationMatrix raw_correlation_report(const EncodedMatrix& data) {
    if (!data.fully_observed()) {
        throw DataError("raw correlation needs fully observed data");
    }
    std::vector<std::vector<double>> series;
    for (std::size_t c = 0; c < data.cols; ++c) {
        series.push_back(data_column(data, c));
    }
    return build_report(data.col_names, series);
}

std::string CorrelationMatrix::to_csv() const {
    std::string out = "variable";
    for (const auto& n : names) {
        out += "," + csv::escape(n);
    }
    out += "\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
        out += csv::escape(names[i]);
        for (std::size_t j = 0; j < names.size(); ++j) {
            out += "," + csv::format_double(at(i, j));
        }
        out += "\n";
    }
    return out;
}

} // namespace somkit
