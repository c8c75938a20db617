#include "somkit/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "somkit/csv.hpp"
#include "somkit/error.hpp"
#include "somkit/kernels.hpp"
#include "somkit/rng.hpp"

namespace somkit {

Neighborhood parse_neighborhood(const std::string& s) {
    if (s == "bubble") return Neighborhood::Bubble;
    if (s == "gaussian") return Neighborhood::Gaussian;
    throw UsageError("unknown neighborhood '" + s + "' (expected bubble|gaussian)");
}

InitMethod parse_init(const std::string& s) {
    if (s == "random-uniform" || s == "random") return InitMethod::RandomUniform;
    if (s == "linear") return InitMethod::Linear;
    throw UsageError("unknown init '" + s + "' (expected random-uniform|linear)");
}

StopRule parse_stop(const std::string& s) {
    if (s == "fixed-iterations" || s == "iterations") return StopRule::FixedIterations;
    if (s == "weight-delta" || s == "delta") return StopRule::WeightDelta;
    throw UsageError("unknown stop rule '" + s + "' (expected fixed-iterations|weight-delta)");
}

const char* to_string(Neighborhood n) { return n == Neighborhood::Bubble ? "bubble" : "gaussian"; }
const char* to_string(InitMethod i) { return i == InitMethod::RandomUniform ? "random-uniform" : "linear"; }
const char* to_string(StopRule s) { return s == StopRule::FixedIterations ? "fixed-iterations" : "weight-delta"; }

Codebook::Codebook(GridShape g, std::vector<std::string> names)
    : grid(g), dim(names.size()), col_names(std::move(names)), weights(g.cells() * dim, 0.0) {}

std::size_t Codebook::column_index(const std::string& name) const {
    const auto it = std::find(col_names.begin(), col_names.end(), name);
    if (it == col_names.end()) {
        throw UsageError("unknown variable '" + name + "'");
    }
    return static_cast<std::size_t>(it - col_names.begin());
}

void Codebook::validate() const {
    grid.validate();
    if (dim < 1 || col_names.size() != dim || weights.size() != grid.cells() * dim) {
        throw DataError("codebook dimensions are inconsistent");
    }
    for (double w : weights) {
        if (!std::isfinite(w)) {
            throw NumericError("codebook holds a non-finite weight");
        }
    }
}

double PhaseSchedule::mu_at(std::size_t t) const noexcept {
    const double frac = iterations > 1 ? static_cast<double>(t) / static_cast<double>(iterations - 1) : 0.0;
    return mu_start + (mu_end - mu_start) * frac;
}

double PhaseSchedule::radius_at(std::size_t t) const noexcept {
    const double frac = iterations > 1 ? static_cast<double>(t) / static_cast<double>(iterations - 1) : 0.0;
    return radius_start + (radius_end - radius_start) * frac;
}

void PhaseSchedule::validate(const char* phase) const {
    const std::string p = phase;
    if (iterations < 1) {
        throw UsageError(p + " phase needs at least one iteration");
    }
    if (!(mu_start > 0.0 && mu_start < 1.0 && mu_end > 0.0 && mu_end < 1.0)) {
        throw UsageError(p + " phase learning rates must lie in (0, 1)");
    }
    if (mu_end > mu_start) {
        throw UsageError(p + " phase learning rate must not increase");
    }
    if (!(radius_start >= 0.0 && radius_end >= 0.0) || !std::isfinite(radius_start)) {
        throw UsageError(p + " phase radii must be non-negative");
    }
    if (radius_end > radius_start) {
        throw UsageError(p + " phase radius must not increase");
    }
}

TrainingConfig TrainingConfig::resolved(std::size_t records) const {
    TrainingConfig c = *this;
    for (auto* ph : {&c.ordering, &c.convergence}) {
        if (ph->iterations == 0) {
            ph->iterations = ph->sweeps * records;
        }
        if (ph->radius_start < 0.0) {
            ph->radius_start = std::max(static_cast<double>(std::max(width, height)) / 2.0, ph->radius_end);
        }
    }
    return c;
}

void TrainingConfig::validate() const {
    grid().validate();
    ordering.validate("ordering");
    convergence.validate("convergence");
    if (stop == StopRule::WeightDelta && !(epsilon > 0.0)) {
        throw UsageError("weight-delta stop needs a positive epsilon");
    }
}

namespace {

void require_observed(const EncodedMatrix& data, const char* op) {
    data.validate();
    if (!data.fully_observed()) {
        throw DataError(std::string(op) + ": data has missing entries; run impute first");
    }
}

void require_finite(std::span<const double> x) {
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw NumericError("input vector has a non-finite component");
        }
    }
}

Bmu argmin(std::span<const double> sq) {
    Bmu best{0, sq[0]};
    for (std::size_t i = 1; i < sq.size(); ++i) {
        if (sq[i] < best.distance) {
            best = {i, sq[i]};
        }
    }
    return best;
}

// Sign convention for eigenvectors: largest-magnitude component positive.
Eigen::VectorXd canonical(Eigen::VectorXd v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    return v(k) < 0 ? Eigen::VectorXd(-v) : v;
}

void linear_init(const EncodedMatrix& data, Codebook& cb) {
    const auto n = static_cast<Eigen::Index>(data.cols);
    const auto r = static_cast<Eigen::Index>(data.rows);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
        data.values.data(), r, n);
    const Eigen::VectorXd mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(std::max<Eigen::Index>(r - 1, 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    // Eigenvalues ascend; the last two span the principal plane.
    const Eigen::VectorXd e1 = canonical(eig.eigenvectors().col(n - 1)) * std::sqrt(std::max(0.0, eig.eigenvalues()(n - 1)));
    const Eigen::VectorXd e2 = n > 1
        ? Eigen::VectorXd(canonical(eig.eigenvectors().col(n - 2)) * std::sqrt(std::max(0.0, eig.eigenvalues()(n - 2))))
        : Eigen::VectorXd::Zero(n);

    // The principal direction runs along the longer grid side.
    const bool along_width = cb.grid.width >= cb.grid.height;
    auto coord = [](std::size_t k, std::size_t len) {
        return len > 1 ? 2.0 * static_cast<double>(k) / static_cast<double>(len - 1) - 1.0 : 0.0;
    };
    for (std::size_t i = 0; i < cb.cells(); ++i) {
        const double a = coord(cb.grid.col(i), cb.grid.width);
        const double b = coord(cb.grid.row(i), cb.grid.height);
        const Eigen::VectorXd w = along_width ? Eigen::VectorXd(mean + a * e1 + b * e2) : Eigen::VectorXd(mean + b * e1 + a * e2);
        std::copy(w.data(), w.data() + n, cb.weight(i).begin());
    }
}

} // namespace

Codebook init_codebook(const EncodedMatrix& data, const TrainingConfig& cfg) {
    require_observed(data, "init_codebook");
    if (data.cols < 1 || data.rows < 1) {
        throw DataError("init_codebook: need at least one record and one variable");
    }
    cfg.grid().validate();
    Codebook cb(cfg.grid(), data.col_names);

    if (cfg.init == InitMethod::Linear) {
        linear_init(data, cb);
        return cb;
    }

    std::vector<double> lo(data.cols, std::numeric_limits<double>::infinity());
    std::vector<double> hi(data.cols, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < data.rows; ++r) {
        for (std::size_t c = 0; c < data.cols; ++c) {
            lo[c] = std::min(lo[c], data.at(r, c));
            hi[c] = std::max(hi[c], data.at(r, c));
        }
    }
    Rng rng(cfg.seed);
    for (std::size_t i = 0; i < cb.cells(); ++i) {
        auto w = cb.weight(i);
        for (std::size_t c = 0; c < data.cols; ++c) {
            const double u = rng.uniform();
            w[c] = lo[c] == hi[c] ? lo[c] : std::min(hi[c], lo[c] + (hi[c] - lo[c]) * u);
        }
    }
    return cb;
}

Bmu find_bmu(std::span<const double> x, const Codebook& cb) {
    if (x.size() != cb.dim) {
        throw UsageError("find_bmu: vector has " + std::to_string(x.size()) + " components, codebook has " +
                         std::to_string(cb.dim));
    }
    require_finite(x);
    std::vector<double> sq(cb.cells());
    kernels::squared_distances(cb.weights, cb.dim, x, sq);
    Bmu b = argmin(sq);
    b.distance = std::sqrt(b.distance);
    return b;
}

std::pair<Bmu, Bmu> find_two_bmus(std::span<const double> x, const Codebook& cb) {
    if (cb.cells() < 2) {
        throw UsageError("find_two_bmus: codebook needs at least two cells");
    }
    if (x.size() != cb.dim) {
        throw UsageError("find_two_bmus: dimension mismatch");
    }
    require_finite(x);
    std::vector<double> sq(cb.cells());
    kernels::squared_distances(cb.weights, cb.dim, x, sq);
    Bmu first{0, sq[0]};
    Bmu second{1, sq[1]};
    if (second.distance < first.distance) {
        std::swap(first, second);
    }
    for (std::size_t i = 2; i < sq.size(); ++i) {
        if (sq[i] < first.distance) {
            second = first;
            first = {i, sq[i]};
        } else if (sq[i] < second.distance) {
            second = {i, sq[i]};
        }
    }
    first.distance = std::sqrt(first.distance);
    second.distance = std::sqrt(second.distance);
    return {first, second};
}

double neighborhood_weight(const GridShape& grid, std::size_t q, std::size_t i, double radius, double mu,
                           Neighborhood kind) {
    const double d = grid.distance(q, i);
    if (kind == Neighborhood::Bubble) {
        return d <= radius ? mu : 0.0;
    }
    if (radius == 0.0) {
        return d == 0.0 ? mu : 0.0;
    }
    return mu * std::exp(-(d * d) / (2.0 * radius * radius));
}

void update_step(Codebook& cb, std::span<const double> x, std::size_t q, double radius, double mu,
                 Neighborhood kind) {
    if (q >= cb.cells() || x.size() != cb.dim) {
        throw UsageError("update_step: winner index or vector dimension out of range");
    }
    const auto& blend = kernels::active().blend;
    for (std::size_t i = 0; i < cb.cells(); ++i) {
        const double eta = neighborhood_weight(cb.grid, q, i, radius, mu, kind);
        if (eta != 0.0) {
            blend(cb.weights.data() + i * cb.dim, x.data(), cb.dim, eta);
        }
    }
}

TrainResult train(const EncodedMatrix& data, const TrainingConfig& config) {
    require_observed(data, "train");
    if (data.rows == 0) {
        throw DataError("train: no records");
    }
    for (double v : data.values) {
        if (!std::isfinite(v)) {
            throw NumericError("train: data holds a non-finite value");
        }
    }
    const TrainingConfig cfg = config.resolved(data.rows);
    cfg.validate();

    TrainResult result{init_codebook(data, cfg), {}};
    Codebook& cb = result.codebook;
    TrainingLog& log = result.log;

    // The shuffle stream is separate from the initialisation stream.
    Rng order_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    std::vector<std::size_t> order(data.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> sq(cb.cells());
    std::vector<double> snapshot;
    const auto& kt = kernels::active();

    log.sweeps.push_back({0, 0, quantization_error(data, cb), 0.0, cfg.ordering.mu_at(0), cfg.ordering.radius_at(0), "init"});

    const std::size_t total = cfg.ordering.iterations + cfg.convergence.iterations;
    std::size_t t = 0;
    std::size_t sweep = 0;
    while (t < total) {
        order_rng.shuffle(std::span(order));
        snapshot = cb.weights;
        double mu = 0.0;
        double radius = 0.0;
        const char* phase = "ordering";
        for (std::size_t p = 0; p < data.rows && t < total; ++p, ++t) {
            const bool ordering = t < cfg.ordering.iterations;
            const PhaseSchedule& ph = ordering ? cfg.ordering : cfg.convergence;
            const std::size_t local = ordering ? t : t - cfg.ordering.iterations;
            mu = ph.mu_at(local);
            radius = ph.radius_at(local);
            phase = ordering ? "ordering" : "convergence";

            const double* x = data.values.data() + order[p] * data.cols;
            kt.squared_distances(cb.weights.data(), cb.cells(), cb.dim, x, sq.data());
            const std::size_t q = argmin(sq).cell;
            update_step(cb, {x, data.cols}, q, radius, mu, cfg.neighborhood);
        }
        double max_delta = 0.0;
        for (std::size_t i = 0; i < cb.cells(); ++i) {
            double s = 0.0;
            for (std::size_t d = 0; d < cb.dim; ++d) {
                const double diff = cb.weights[i * cb.dim + d] - snapshot[i * cb.dim + d];
                s += diff * diff;
            }
            max_delta = std::max(max_delta, std::sqrt(s));
        }
        ++sweep;
        log.sweeps.push_back({sweep, t, quantization_error(data, cb), max_delta, mu, radius, phase});
        if (cfg.stop == StopRule::WeightDelta && max_delta < cfg.epsilon) {
            log.stopped_on_delta = true;
            break;
        }
    }
    log.iterations = t;
    cb.validate();
    return result;
}

double quantization_error(const EncodedMatrix& data, const Codebook& cb) {
    require_observed(data, "quantization_error");
    if (data.cols != cb.dim) {
        throw UsageError("quantization_error: data and codebook dimensions differ");
    }
    if (data.rows == 0) {
        return 0.0;
    }
    std::vector<double> sq(cb.cells());
    double sum = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) {
        kernels::squared_distances(cb.weights, cb.dim, data.row(r), sq);
        sum += std::sqrt(argmin(sq).distance);
    }
    return sum / static_cast<double>(data.rows);
}

double topographic_error(const EncodedMatrix& data, const Codebook& cb) {
    require_observed(data, "topographic_error");
    if (data.rows == 0 || cb.cells() < 2) {
        return 0.0;
    }
    std::size_t errors = 0;
    for (std::size_t r = 0; r < data.rows; ++r) {
        const auto [first, second] = find_two_bmus(data.row(r), cb);
        if (!cb.grid.adjacent(first.cell, second.cell)) {
            ++errors;
        }
    }
    return static_cast<double>(errors) / static_cast<double>(data.rows);
}

BmuAssignment assign_bmus(const EncodedMatrix& data, const Codebook& cb) {
    require_observed(data, "assign_bmus");
    if (data.rows && data.cols != cb.dim) {
        throw UsageError("assign_bmus: data and codebook dimensions differ");
    }
    BmuAssignment a;
    a.record_ids = data.row_ids;
    a.cells.reserve(data.rows);
    a.distances.reserve(data.rows);
    for (std::size_t r = 0; r < data.rows; ++r) {
        const Bmu b = find_bmu(data.row(r), cb);
        a.cells.push_back(b.cell);
        a.distances.push_back(b.distance);
    }
    return a;
}

std::string BmuAssignment::to_csv(const GridShape& grid) const {
    std::string out = "id,cell,col,row,distance\n";
    for (std::size_t k = 0; k < size(); ++k) {
        out += csv::escape(record_ids[k]) + "," + std::to_string(cells[k]) + "," + std::to_string(grid.col(cells[k])) +
               "," + std::to_string(grid.row(cells[k])) + "," + csv::format_double(distances[k]) + "\n";
    }
    return out;
}

BmuAssignment BmuAssignment::from_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front().size() < 2 || rows.front()[0] != "id" || rows.front()[1] != "cell") {
        throw DataError("assignment file must start with an 'id,cell' header");
    }
    BmuAssignment a;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() < 2) {
            throw DataError("assignment row " + std::to_string(r + 1) + " is truncated");
        }
        a.record_ids.push_back(row[0]);
        try {
            a.cells.push_back(static_cast<std::size_t>(std::stoull(row[1])));
            a.distances.push_back(row.size() >= 5 ? std::stod(row[4]) : 0.0);
        } catch (const std::exception&) {
            throw DataError("assignment row " + std::to_string(r + 1) + " has a malformed number");
        }
    }
    return a;
}

std::string TrainingLog::to_csv() const {
    std::string out = "sweep,quantization_error,max_weight_delta,mu,radius,phase\n";
    for (const auto& s : sweeps) {
        out += std::to_string(s.sweep) + "," + csv::format_double(s.quantization_error) + "," +
               csv::format_double(s.max_weight_delta) + "," + csv::format_double(s.mu) + "," +
               csv::format_double(s.radius) + "," + s.phase + "\n";
    }
    return out;
}

} // namespace somkit
