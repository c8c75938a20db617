#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "somkit/grid.hpp"
#include "somkit/ingest.hpp"

namespace somkit {

enum class Neighborhood { Bubble, Gaussian };
enum class InitMethod { RandomUniform, Linear };
enum class StopRule { FixedIterations, WeightDelta };

Neighborhood parse_neighborhood(const std::string& s);
InitMethod parse_init(const std::string& s);
StopRule parse_stop(const std::string& s);
const char* to_string(Neighborhood n);
const char* to_string(InitMethod i);
const char* to_string(StopRule s);

/// A grid of weight vectors, one per cell, stored row-major (cell-major).
struct Codebook {
    GridShape grid;
    std::size_t dim = 0;
    std::vector<std::string> col_names;
    std::vector<double> weights;

    Codebook() = default;
    Codebook(GridShape g, std::vector<std::string> names);

    std::size_t cells() const noexcept { return grid.cells(); }
    std::span<const double> weight(std::size_t i) const { return {weights.data() + i * dim, dim}; }
    std::span<double> weight(std::size_t i) { return {weights.data() + i * dim, dim}; }
    std::size_t column_index(const std::string& name) const;

    /// Sizes agree and every component is finite.
    void validate() const;
};

/// Linear interpolation of the learning rate and radius over one phase.
struct PhaseSchedule {
    /// Record presentations; 0 means `sweeps` times the record count.
    std::size_t iterations = 0;
    std::size_t sweeps = 0;
    double mu_start = 0.5;
    double mu_end = 0.5;
    /// Negative means half the longer grid side (never below radius_end).
    double radius_start = 1.0;
    double radius_end = 1.0;

    double mu_at(std::size_t t) const noexcept;
    double radius_at(std::size_t t) const noexcept;
    void validate(const char* phase) const;
};

struct TrainingConfig {
    std::size_t width = 30;
    std::size_t height = 30;
    Topology topology = Topology::Rectangular;
    Neighborhood neighborhood = Neighborhood::Bubble;
    /// Rough phase: mu close to one, radius shrinking from half the grid to 1.
    PhaseSchedule ordering{0, 10, 0.9, 0.05, -1.0, 1.0};
    /// Fine phase: mu of order 0.01 at radius 1.
    PhaseSchedule convergence{0, 40, 0.01, 0.01, 1.0, 1.0};
    InitMethod init = InitMethod::RandomUniform;
    std::uint64_t seed = 1;
    StopRule stop = StopRule::FixedIterations;
    /// Threshold on the largest weight-vector displacement over one sweep.
    double epsilon = 1e-6;

    GridShape grid() const { return {width, height, topology}; }
    /// Copy with automatic iteration counts and radii filled in.
    TrainingConfig resolved(std::size_t records) const;
    void validate() const;
};

struct Bmu {
    std::size_t cell = 0;
    double distance = 0.0;
};

struct BmuAssignment {
    std::vector<std::string> record_ids;
    std::vector<std::size_t> cells;
    std::vector<double> distances;

    std::size_t size() const noexcept { return cells.size(); }
    std::string to_csv(const GridShape& grid) const;
    static BmuAssignment from_csv(std::string_view text);
};

struct SweepLog {
    std::size_t sweep = 0;
    std::size_t iterations = 0;
    double quantization_error = 0.0;
    double max_weight_delta = 0.0;
    double mu = 0.0;
    double radius = 0.0;
    const char* phase = "init";
};

struct TrainingLog {
    /// Entry 0 describes the initial codebook.
    std::vector<SweepLog> sweeps;
    std::size_t iterations = 0;
    bool stopped_on_delta = false;

    double initial_quantization_error() const { return sweeps.front().quantization_error; }
    double final_quantization_error() const { return sweeps.back().quantization_error; }
    std::string to_csv() const;
};

struct TrainResult {
    Codebook codebook;
    TrainingLog log;
};

Codebook init_codebook(const EncodedMatrix& data, const TrainingConfig& cfg);

Bmu find_bmu(std::span<const double> x, const Codebook& cb);

/// Best and second-best cells (ties to the lower index). Requires >= 2 cells.
std::pair<Bmu, Bmu> find_two_bmus(std::span<const double> x, const Codebook& cb);

/// Bubble: mu inside the radius, 0 outside. Gaussian: mu * exp(-d^2 / (2 r^2)).
double neighborhood_weight(const GridShape& grid, std::size_t q, std::size_t i, double radius, double mu,
                           Neighborhood kind);

/// One sequential update around winner q. Cells with zero weight are untouched.
void update_step(Codebook& cb, std::span<const double> x, std::size_t q, double radius, double mu,
                 Neighborhood kind);

/// Ordering then convergence phase over seeded per-sweep shuffles.
TrainResult train(const EncodedMatrix& data, const TrainingConfig& cfg);

double quantization_error(const EncodedMatrix& data, const Codebook& cb);
double topographic_error(const EncodedMatrix& data, const Codebook& cb);
BmuAssignment assign_bmus(const EncodedMatrix& data, const Codebook& cb);

} // namespace somkit
