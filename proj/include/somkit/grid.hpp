#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace somkit {

enum class Topology { Rectangular, Hexagonal };

Topology parse_topology(const std::string& s);
const char* to_string(Topology t);

/// Cell layout of a 2-D map. Cells are numbered row-major: index = row * width + col.
/// Hexagonal grids use offset rows (odd rows shifted right by half a cell, row
/// pitch sqrt(3)/2), so every interior cell has six neighbours at distance 1.
struct GridShape {
    std::size_t width = 1;
    std::size_t height = 1;
    Topology topology = Topology::Rectangular;

    std::size_t cells() const noexcept { return width * height; }
    std::size_t col(std::size_t i) const noexcept { return i % width; }
    std::size_t row(std::size_t i) const noexcept { return i / width; }
    std::size_t index(std::size_t col, std::size_t row) const noexcept { return row * width + col; }

    /// Euclidean distance between cell centres in grid units.
    double distance(std::size_t a, std::size_t b) const noexcept;

    /// 4-neighbourhood (rectangular) or 6-neighbourhood (hexagonal).
    bool adjacent(std::size_t a, std::size_t b) const noexcept;
    std::vector<std::size_t> neighbors(std::size_t i) const;

    /// Cell centre in grid units, for drawing.
    std::pair<double, double> position(std::size_t i) const noexcept;

    void validate() const;

private:
    // Four times the squared distance; an exact integer for both topologies.
    long long quad_distance(std::size_t a, std::size_t b) const noexcept;
};

} // namespace somkit
