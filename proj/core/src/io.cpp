#include "rmtcov/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rmtcov/errors.hpp"

namespace rmtcov {

namespace {

constexpr char kMagic[4] = {'S', 'H', 'R', 'K'};

std::vector<double> parse_csv_line(const std::string& line, long lineno) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        // trim whitespace
        std::size_t b = cell.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = cell.find_last_not_of(" \t\r");
        std::string tok = cell.substr(b, e - b + 1);
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw IoError("unparsable numeric field '" + tok + "' at line " +
                              std::to_string(lineno),
                          lineno);
        }
    }
    return out;
}

bool line_is_numeric(const std::string& line) {
    try {
        parse_csv_line(line, 0);
        return true;
    } catch (const IoError&) {
        return false;
    }
}

}  // namespace

PopulationSpectrum load_spectrum_csv(const std::string& path, std::size_t sample_size,
                                     std::size_t dimension) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spectrum file: " + path);
    std::string line;
    long lineno = 0;
    bool first_content = true;
    std::size_t width = 0;
    std::vector<double> ones;
    std::vector<std::pair<double, double>> weighted;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (first_content) {
            first_content = false;
            if (!line_is_numeric(line)) continue;  // header
        }
        std::vector<double> row = parse_csv_line(line, lineno);
        if (row.empty()) continue;
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw IoError("inconsistent column count at line " + std::to_string(lineno),
                          lineno);
        if (width == 1) {
            ones.push_back(row[0]);
        } else if (width == 2) {
            weighted.emplace_back(row[0], row[1]);
        } else {
            throw IoError("spectrum CSV must have one or two columns (line " +
                              std::to_string(lineno) + ")",
                          lineno);
        }
    }
    if (width == 1) {
        if (ones.empty()) throw IoError("no eigenvalues in " + path);
        return PopulationSpectrum(std::move(ones), sample_size);
    }
    if (weighted.empty()) throw IoError("no spectrum rows in " + path);
    if (dimension == 0)
        throw IoError("two-column (value, weight) spectrum needs an explicit dimension");
    return PopulationSpectrum::from_weights(weighted, dimension, sample_size);
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open data file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (first_content && !line_is_numeric(line)) {
            first_content = false;
            continue;  // header
        }
        first_content = false;
        std::vector<double> row = parse_csv_line(line, lineno);
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("inconsistent column count at line " + std::to_string(lineno),
                          lineno);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("no data rows in " + path);
    Eigen::MatrixXd mat(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return mat;
}

void save_matrix_blob(const std::string& path, const Eigen::MatrixXd& mat) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open blob for writing: " + path);
    std::uint32_t rows = static_cast<std::uint32_t>(mat.rows());
    std::uint32_t cols = static_cast<std::uint32_t>(mat.cols());
    std::uint32_t reserved = 0;
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    out.write(reinterpret_cast<const char*>(&reserved), 4);
    out.write(reinterpret_cast<const char*>(mat.data()),
              static_cast<std::streamsize>(sizeof(double)) * mat.size());
    if (!out) throw IoError("short write to blob: " + path);
}

Eigen::MatrixXd load_matrix_blob(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open blob: " + path);
    char magic[4];
    std::uint32_t rows = 0, cols = 0, reserved = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("bad blob header in " + path);
    Eigen::MatrixXd mat(rows, cols);
    in.read(reinterpret_cast<char*>(mat.data()),
            static_cast<std::streamsize>(sizeof(double)) * mat.size());
    if (!in) throw IoError("truncated blob payload in " + path);
    return mat;
}

bool is_blob_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    return in && std::memcmp(magic, kMagic, 4) == 0;
}

void save_support_csv(const std::string& path, const SupportStructure& support) {
    std::vector<std::string> lines;
    lines.push_back("index,gamma,gamma_squared,bulk_index");
    for (std::size_t i = 0; i < support.classical_locations.size(); ++i) {
        double g = support.classical_locations[i];
        auto [k, j] = support.relabel(static_cast<int>(i) + 1);
        (void)j;
        lines.push_back(std::to_string(i + 1) + "," + format_double(g) + "," +
                        format_double(g * g) + "," + std::to_string(k));
    }
    write_text_file(path, lines);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);  // binary: fixed LF endings
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const auto& l : lines) {
        out << l << '\n';
    }
    if (!out) throw IoError("short write: " + path);
}

}  // namespace rmtcov
