#pragma once

#include <cstddef>

#include "somkit/ingest.hpp"

namespace somkit {

enum class ImputeAxis { Rows, Columns };
enum class Aggregation { Auto, Nearest, Mean, Median };

struct ImputeConfig {
    std::size_t k = 1;
    /// Rows: neighbours are other records. Columns: neighbours are other variables.
    ImputeAxis axis = ImputeAxis::Rows;
    /// Auto resolves to Nearest for k == 1 and Mean otherwise.
    Aggregation aggregation = Aggregation::Auto;
};

/// Nan-aware Euclidean distance between two vectors over their jointly
/// observed coordinates, scaled by total/observed before the square root.
/// Returns a negative value when no coordinate is shared.
double partial_distance(std::span<const double> a, std::span<const std::uint8_t> a_missing,
                        std::span<const double> b, std::span<const std::uint8_t> b_missing);

/// k-nearest-neighbour imputation. Observed entries are copied bit-for-bit;
/// each missing entry is filled from the k nearest vectors that observe that
/// coordinate. Distance ties go to the lower index.
EncodedMatrix knn_impute(const EncodedMatrix& m, const ImputeConfig& cfg = {});

ImputeAxis parse_axis(const std::string& s);
Aggregation parse_aggregation(const std::string& s);
const char* to_string(ImputeAxis a);
const char* to_string(Aggregation a);

} // namespace somkit
