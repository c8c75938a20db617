#include "somkit/grid.hpp"

#include <cmath>

#include "somkit/error.hpp"

namespace somkit {

Topology parse_topology(const std::string& s) {
    if (s == "rectangular" || s == "rect") return Topology::Rectangular;
    if (s == "hexagonal" || s == "hex") return Topology::Hexagonal;
    throw UsageError("unknown topology '" + s + "' (expected rectangular|hexagonal)");
}

const char* to_string(Topology t) { return t == Topology::Rectangular ? "rectangular" : "hexagonal"; }

long long GridShape::quad_distance(std::size_t a, std::size_t b) const noexcept {
    const auto ra = static_cast<long long>(row(a));
    const auto rb = static_cast<long long>(row(b));
    const long long dy = ra - rb;
    if (topology == Topology::Rectangular) {
        const long long dx = static_cast<long long>(col(a)) - static_cast<long long>(col(b));
        return 4 * (dx * dx + dy * dy);
    }
    // Doubled x so the half-cell offset stays integral: x2 = 2*col + (row & 1).
    const long long dx2 = (2 * static_cast<long long>(col(a)) + (ra & 1)) - (2 * static_cast<long long>(col(b)) + (rb & 1));
    return dx2 * dx2 + 3 * dy * dy;
}

double GridShape::distance(std::size_t a, std::size_t b) const noexcept {
    return std::sqrt(static_cast<double>(quad_distance(a, b))) / 2.0;
}

bool GridShape::adjacent(std::size_t a, std::size_t b) const noexcept { return quad_distance(a, b) == 4; }

std::vector<std::size_t> GridShape::neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    const std::size_t r = row(i);
    const std::size_t c = col(i);
    const std::size_t r0 = r > 0 ? r - 1 : 0;
    const std::size_t r1 = r + 1 < height ? r + 1 : r;
    const std::size_t c0 = c > 0 ? c - 1 : 0;
    const std::size_t c1 = c + 1 < width ? c + 1 : c;
    for (std::size_t rr = r0; rr <= r1; ++rr) {
        for (std::size_t cc = c0; cc <= c1; ++cc) {
            const std::size_t j = index(cc, rr);
            if (j != i && adjacent(i, j)) {
                out.push_back(j);
            }
        }
    }
    return out;
}

std::pair<double, double> GridShape::position(std::size_t i) const noexcept {
    const auto c = static_cast<double>(col(i));
    const auto r = static_cast<double>(row(i));
    if (topology == Topology::Rectangular) {
        return {c, r};
    }
    return {c + ((row(i) & 1) ? 0.5 : 0.0), r * std::sqrt(3.0) / 2.0};
}

void GridShape::validate() const {
    if (width < 1 || height < 1) {
        throw UsageError("grid dimensions must be at least 1x1");
    }
}

} // namespace somkit
