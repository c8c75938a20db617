#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "somkit/ingest.hpp"

namespace somkit {

// Matrix interchange: CSV whose first column holds record ids and whose
// remaining header names the variables. An empty cell is a missing entry;
// every other cell is a finite number written with round-trip precision.
std::string matrix_to_csv(const EncodedMatrix& m);
EncodedMatrix matrix_from_csv(std::string_view text);

void write_matrix(const std::filesystem::path& path, const EncodedMatrix& m);
EncodedMatrix read_matrix(const std::filesystem::path& path);

} // namespace somkit
