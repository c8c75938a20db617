#include "somkit/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "somkit/error.hpp"

namespace somkit {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::uint8_t lerp_channel(std::uint8_t a, std::uint8_t b, double t) {
    const double v = static_cast<double>(a) + (static_cast<double>(b) - static_cast<double>(a)) * t;
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

const Rgb kDarkBlue = Rgb::from_hex("#00007F");
const Rgb kLightBlue = Rgb::from_hex("#4DA6FF");
const Rgb kGreen = Rgb::from_hex("#2CA02C");
const Rgb kYellow = Rgb::from_hex("#FFD700");
const Rgb kOrange = Rgb::from_hex("#FF7F0E");

} // namespace

std::string Rgb::hex() const {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02X%02X%02X", r, g, b);
    return buf;
}

Rgb Rgb::from_hex(const std::string& s) {
    unsigned r = 0, g = 0, b = 0;
    if (s.size() != 7 || s[0] != '#' || std::sscanf(s.c_str() + 1, "%2x%2x%2x", &r, &g, &b) != 3) {
        throw UsageError("bad colour '" + s + "' (expected #RRGGBB)");
    }
    return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
}

Interpolation parse_interpolation(const std::string& s) {
    if (s == "discrete") return Interpolation::Discrete;
    if (s == "linear") return Interpolation::Linear;
    throw UsageError("unknown interpolation '" + s + "' (expected discrete|linear)");
}

void ColorScale::validate() const {
    if (stops.size() < 2) {
        throw UsageError("colour scale needs at least two stops");
    }
    for (std::size_t i = 1; i < stops.size(); ++i) {
        if (!(stops[i].value > stops[i - 1].value)) {
            throw UsageError("colour scale stops must be strictly increasing");
        }
    }
}

Rgb ColorScale::color_for(double v, bool* clamped) const {
    bool out_of_range = false;
    if (std::isnan(v) || v < stops.front().value) {
        out_of_range = true;
        v = stops.front().value;
    } else if (v > stops.back().value) {
        out_of_range = true;
        v = stops.back().value;
    }
    if (clamped) {
        *clamped = out_of_range;
    }
    std::size_t hi = 1;
    while (hi + 1 < stops.size() && v > stops[hi].value) {
        ++hi;
    }
    const ColorStop& a = stops[hi - 1];
    const ColorStop& b = stops[hi];
    if (interpolation == Interpolation::Discrete) {
        return (v - a.value) < (b.value - v) ? a.color : b.color;
    }
    const double t = (v - a.value) / (b.value - a.value);
    return {lerp_channel(a.color.r, b.color.r, t), lerp_channel(a.color.g, b.color.g, t),
            lerp_channel(a.color.b, b.color.b, t)};
}

const ColorStop& ColorScale::stop_at(double value) const {
    for (const auto& s : stops) {
        if (s.value == value) {
            return s;
        }
    }
    throw UsageError("colour scale has no stop at " + num(value));
}

ColorScale default_likert_scale() {
    return {{{1.0, kDarkBlue, "Never", "dark blue"},
             {2.0, kLightBlue, "Rarely", "light blue"},
             {3.0, kGreen, "Sometimes", "green"},
             {4.0, kYellow, "Usually", "yellow"},
             {5.0, kOrange, "Always", "orange"}},
            Interpolation::Discrete};
}

ColorScale range_scale(double lo, double hi) {
    if (!(hi > lo)) {
        hi = lo + 1.0;
    }
    ColorScale s = default_likert_scale();
    s.interpolation = Interpolation::Linear;
    for (std::size_t i = 0; i < s.stops.size(); ++i) {
        s.stops[i].value = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(s.stops.size() - 1);
        s.stops[i].label = num(s.stops[i].value);
    }
    return s;
}

RenderResult render(const GridMap& map, const ColorScale& scale, const RenderOptions& opts) {
    map.validate();
    scale.validate();
    if (!(opts.cell_size > 0.0)) {
        throw UsageError("render: cell size must be positive");
    }
    const GridShape& g = map.grid;
    const double cs = opts.cell_size;
    const double margin = 10.0;
    const double title_h = opts.title.empty() ? 0.0 : 28.0;
    const bool hex = g.topology == Topology::Hexagonal;
    const double hex_r = cs / std::sqrt(3.0);

    // Map extent in pixels.
    double map_w = static_cast<double>(g.width) * cs;
    double map_h = static_cast<double>(g.height) * cs;
    if (hex) {
        map_w = (static_cast<double>(g.width) + (g.height > 1 ? 0.5 : 0.0)) * cs;
        map_h = (static_cast<double>(g.height) - 1.0) * cs * std::sqrt(3.0) / 2.0 + 2.0 * hex_r;
    }
    const double swatch = 16.0;
    const double bar_x = margin + map_w + 20.0;
    const double bar_w = 110.0;
    const double bar_h = static_cast<double>(scale.stops.size()) * (swatch + 6.0);
    const double total_w = bar_x + bar_w + margin;
    const double total_h = margin + title_h + std::max(map_h, bar_h) + margin;
    const double ox = margin;
    const double oy = margin + title_h;

    RenderResult res;
    std::string& s = res.svg;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(total_w) + "\" height=\"" +
         num(total_h) + "\" viewBox=\"0 0 " + num(total_w) + " " + num(total_h) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + num(total_w) + "\" height=\"" + num(total_h) + "\" fill=\"#FFFFFF\"/>\n";
    if (!opts.title.empty()) {
        s += "<text x=\"" + num(ox) + "\" y=\"" + num(margin + 18.0) +
             "\" font-family=\"sans-serif\" font-size=\"16\">" + xml_escape(opts.title) + "</text>\n";
    }

    s += "<g id=\"cells\" stroke=\"#FFFFFF\" stroke-width=\"0.5\">\n";
    std::vector<std::pair<double, double>> centres(g.cells());
    for (std::size_t i = 0; i < g.cells(); ++i) {
        bool clamped = false;
        const std::string fill = scale.color_for(map.values[i], &clamped).hex();
        res.clamped += clamped ? 1 : 0;
        if (hex) {
            const auto [px, py] = g.position(i);
            const double cx = ox + (px + 0.5) * cs;
            const double cy = oy + hex_r + py * cs;
            centres[i] = {cx, cy};
            std::string pts;
            for (int k = 0; k < 6; ++k) {
                const double a = std::numbers::pi / 180.0 * (60.0 * k - 90.0);
                pts += (k ? " " : "") + num(cx + hex_r * std::cos(a)) + "," + num(cy + hex_r * std::sin(a));
            }
            s += "<polygon class=\"cell\" points=\"" + pts + "\" fill=\"" + fill + "\"/>\n";
        } else {
            const double x = ox + static_cast<double>(g.col(i)) * cs;
            const double y = oy + static_cast<double>(g.row(i)) * cs;
            centres[i] = {x + cs / 2.0, y + cs / 2.0};
            s += "<rect class=\"cell\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cs) + "\" height=\"" +
                 num(cs) + "\" fill=\"" + fill + "\"/>\n";
        }
    }
    s += "</g>\n";

    if (opts.labels) {
        const double fs = std::max(4.0, cs / 4.0);
        s += "<g id=\"labels\" font-family=\"sans-serif\" font-size=\"" + num(fs) +
             "\" text-anchor=\"middle\" fill=\"#000000\">\n";
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const auto& ids = map.labels[i];
            if (ids.empty()) {
                continue;
            }
            const auto [cx, cy] = centres[i];
            const double first_y = cy - fs * 0.5 * static_cast<double>(ids.size() - 1) + fs * 0.35;
            s += "<text class=\"label\" x=\"" + num(cx) + "\" y=\"" + num(first_y) + "\">";
            for (std::size_t k = 0; k < ids.size(); ++k) {
                s += "<tspan x=\"" + num(cx) + "\" dy=\"" + num(k ? fs : 0.0) + "\">" + xml_escape(ids[k]) + "</tspan>";
            }
            s += "</text>\n";
        }
        s += "</g>\n";
    }

    // Colour bar, highest stop on top.
    s += "<g id=\"colorbar\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t k = 0; k < scale.stops.size(); ++k) {
        const ColorStop& st = scale.stops[scale.stops.size() - 1 - k];
        const double y = oy + static_cast<double>(k) * (swatch + 6.0);
        s += "<rect class=\"swatch\" x=\"" + num(bar_x) + "\" y=\"" + num(y) + "\" width=\"" + num(swatch) +
             "\" height=\"" + num(swatch) + "\" fill=\"" + st.color.hex() + "\" stroke=\"#000000\" stroke-width=\"0.5\"/>\n";
        s += "<text x=\"" + num(bar_x + swatch + 6.0) + "\" y=\"" + num(y + swatch - 4.0) + "\">" +
             xml_escape(st.label) + "</text>\n";
    }
    s += "</g>\n";
    s += "</svg>\n";
    return res;
}

} // namespace somkit
