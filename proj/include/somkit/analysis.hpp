#pragma once

#include <string>
#include <utility>
#include <vector>

#include "somkit/config.hpp"
#include "somkit/som.hpp"

namespace somkit {

/// A scalar per map cell, optional record labels per cell and a value legend.
struct GridMap {
    GridShape grid;
    std::vector<double> values;
    std::vector<std::vector<std::string>> labels;
    std::vector<std::pair<double, std::string>> legend;
    std::string title;

    GridMap() = default;
    explicit GridMap(GridShape g) : grid(g), values(g.cells(), 0.0), labels(g.cells()) {}

    void validate() const;
    json to_json() const;
    static GridMap from_json(const json& j);
};

/// Likert legend, 1 -> "Never" through 5 -> "Always".
std::vector<std::pair<double, std::string>> likert_legend();

GridMap component_plane(const Codebook& cb, const std::string& variable);

/// Mean distance from each weight vector to its grid neighbours' vectors.
GridMap u_matrix(const Codebook& cb);

/// Record counts per cell, labelled with the record ids.
GridMap hit_map(const BmuAssignment& assign, const Codebook& cb);

/// Connected components of records whose BMUs lie within `radius` grid units.
/// Groups are ordered by their first record in assignment order.
std::vector<std::vector<std::string>> similar_groups(const BmuAssignment& assign, const GridShape& grid, double radius);
std::string groups_to_csv(const std::vector<std::vector<std::string>>& groups);

/// Pearson correlation. Throws NumericError when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Correlation of two component planes across all cells.
double plane_correlation(const Codebook& cb, const std::string& var_a, const std::string& var_b);

struct CorrelationMatrix {
    std::vector<std::string> names;
    /// Row-major; NaN marks an undefined (zero-variance) entry.
    std::vector<double> values;

    double at(std::size_t i, std::size_t j) const { return values[i * names.size() + j]; }
    std::string to_csv() const;
};

CorrelationMatrix correlation_report(const Codebook& cb);

/// Same statistic over the data columns instead of the codebook.
CorrelationMatrix raw_correlation_report(const EncodedMatrix& data);

} // namespace somkit
