#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "somkit/analysis.hpp"

namespace somkit {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    std::string hex() const;
    static Rgb from_hex(const std::string& s);
    bool operator==(const Rgb&) const = default;
};

struct ColorStop {
    double value;
    Rgb color;
    std::string label;
    std::string color_name;
};

enum class Interpolation { Discrete, Linear };

Interpolation parse_interpolation(const std::string& s);

struct ColorScale {
    std::vector<ColorStop> stops;
    Interpolation interpolation = Interpolation::Discrete;

    /// Stops strictly increasing, at least two.
    void validate() const;

    /// Discrete: nearest stop, halfway ties to the upper stop. Linear: per-channel
    /// blend of the bracketing stops, rounded half away from zero. Values outside
    /// the stop range clamp; `clamped` is set when that happens.
    Rgb color_for(double v, bool* clamped = nullptr) const;

    const ColorStop& stop_at(double value) const;
};

/// Never..Always on 1..5: dark blue, light blue, green, yellow, orange.
ColorScale default_likert_scale();

/// The same five colours spread evenly over [lo, hi], linear interpolation.
ColorScale range_scale(double lo, double hi);

struct RenderOptions {
    std::string title;
    double cell_size = 24.0;
    bool labels = true;
};

struct RenderResult {
    std::string svg;
    std::size_t clamped = 0;
};

/// SVG 1.1 document: one shape per cell, colour bar with the stop labels,
/// optional record-id labels centred in their cells.
RenderResult render(const GridMap& map, const ColorScale& scale, const RenderOptions& opts = {});

} // namespace somkit
