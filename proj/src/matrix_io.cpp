#include "somkit/matrix_io.hpp"

#include <charconv>
#include <cmath>

#include "somkit/csv.hpp"
#include "somkit/error.hpp"

namespace somkit {

std::string matrix_to_csv(const EncodedMatrix& m) {
    m.validate();
    std::string out = "id";
    for (const auto& c : m.col_names) {
        out += ',';
        out += csv::escape(c);
    }
    out += '\n';
    for (std::size_t r = 0; r < m.rows; ++r) {
        out += csv::escape(m.row_ids[r]);
        for (std::size_t c = 0; c < m.cols; ++c) {
            out += ',';
            if (!m.is_missing(r, c)) {
                out += csv::format_double(m.at(r, c));
            }
        }
        out += '\n';
    }
    return out;
}

EncodedMatrix matrix_from_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front().size() < 2) {
        throw DataError("matrix file needs a header with an id column and at least one variable");
    }
    EncodedMatrix m(rows.size() - 1, rows.front().size() - 1);
    for (std::size_t c = 0; c < m.cols; ++c) {
        m.col_names[c] = std::string(csv::trim(rows.front()[c + 1]));
    }
    for (std::size_t r = 0; r < m.rows; ++r) {
        const auto& row = rows[r + 1];
        if (row.size() != m.cols + 1) {
            throw DataError("matrix row " + std::to_string(r + 2) + ": expected " + std::to_string(m.cols + 1) +
                            " fields, got " + std::to_string(row.size()));
        }
        m.row_ids[r] = std::string(csv::trim(row[0]));
        for (std::size_t c = 0; c < m.cols; ++c) {
            const auto cell = csv::trim(row[c + 1]);
            if (cell.empty()) {
                m.set_missing(r, c);
                continue;
            }
            double v = 0.0;
            const auto* end = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(cell.data(), end, v);
            if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
                throw DataError("matrix row " + std::to_string(r + 2) + ", column '" + m.col_names[c] +
                                "': not a finite number '" + std::string(cell) + "'");
            }
            m.at(r, c) = v;
        }
    }
    return m;
}

void write_matrix(const std::filesystem::path& path, const EncodedMatrix& m) {
    csv::write_text(path, matrix_to_csv(m));
}

EncodedMatrix read_matrix(const std::filesystem::path& path) {
    return matrix_from_csv(csv::read_text(path));
}

} // namespace somkit
