#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rmtcov/population_spectrum.hpp"
#include "rmtcov/support.hpp"

namespace rmtcov {

// Population spectrum from a one-column CSV of eigenvalues, or a compact
// two-column (value, weight) CSV whose weights are fractions summing to 1
// (expanded against `dimension`, which is then required). A header line is
// skipped when non-numeric. Throws IoError carrying the offending line.
PopulationSpectrum load_spectrum_csv(const std::string& path, std::size_t sample_size,
                                     std::size_t dimension = 0);

// Data matrix from CSV, rows = variables, columns = observations.
Eigen::MatrixXd load_matrix_csv(const std::string& path);

// Binary column-major float64 blob: 16-byte header = magic "SHRK",
// u32 rows, u32 cols (little endian), 4 reserved bytes; then the payload.
void save_matrix_blob(const std::string& path, const Eigen::MatrixXd& mat);
Eigen::MatrixXd load_matrix_blob(const std::string& path);

// True when the first 4 bytes of the file are the blob magic.
bool is_blob_file(const std::string& path);

// Support export: header (index,gamma,gamma_squared,bulk_index).
void save_support_csv(const std::string& path, const SupportStructure& support);

// Deterministic float formatting used for all emitted files.
std::string format_double(double v);

// Writes lines joined with '\n' (plus trailing newline) atomically enough
// for byte-identical reruns.
void write_text_file(const std::string& path, const std::vector<std::string>& lines);

}  // namespace rmtcov
