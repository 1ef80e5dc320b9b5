#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rmtcov/population_spectrum.hpp"
#include "rmtcov/sample.hpp"
#include "rmtcov/shrinkage.hpp"
#include "rmtcov/support.hpp"

namespace rmtcov {

enum class EntryDistribution { Gaussian, Rademacher, Uniform };

struct EtaRule {
    enum class Kind { Fixed, InvSqrtN, Power } kind = Kind::InvSqrtN;
    double value = 0.0;     // Fixed
    double exponent = -0.5; // Power: eta = N^exponent
    double eta_for(std::size_t N) const;
    std::string describe() const;
};

// Study configuration; loadable from a key = value text file with keys
// spectrum, c, n_grid, eta_rule, distribution, replications, seed, out_dir.
struct SimulationConfig {
    std::vector<std::pair<double, double>> spectrum;  // (value, fraction)
    std::vector<int> n_grid;
    double ratio_c = 0.5;
    EntryDistribution distribution = EntryDistribution::Gaussian;
    EtaRule eta_rule;
    int replications = 20;
    std::uint64_t seed = 1;
    std::string out_dir;

    static SimulationConfig load(const std::string& path);
    void validate() const;
    PopulationSpectrum make_spectrum(int N) const;  // M = round(c N)
};

// Y = sqrt(N) Sigma^{1/2} X in the population eigenbasis; X entries are
// independent, mean zero, variance 1/N, drawn per the chosen law. Fill
// order is row-major, so a fixed seed yields a bit-identical matrix.
Eigen::MatrixXd generate_sample(const PopulationSpectrum& spectrum, std::size_t N,
                                EntryDistribution dist, std::uint64_t seed);

// --- rigidity -------------------------------------------------------------

struct RigidityRow {
    int index;            // global rank i
    double s_deviation;   // |s_i - gamma_i|
    double l_deviation;   // |lambda_i - gamma_i^2|
    double normalized_s;  // N^{2/3} n_i^{1/3} |s_i - gamma_i|
    double normalized_l;  // N^{2/3} n_i^{1/3} |lambda_i - gamma_i^2|
};

std::vector<RigidityRow> rigidity_report(const Eigen::VectorXd& lambdas,
                                         const SupportStructure& support,
                                         std::size_t N);

// --- entrywise / rate studies ---------------------------------------------

struct StudyRecord {
    int N = 0;
    int rep = 0;
    double eta = 0.0;
    double loss_f = 0.0;         // L^F(algorithmic, oracle), eigen-gap route
    double loss_f_matrix = -1.0; // matrix route cross-check (-1 = skipped)
    double loss_finv = 0.0;
    double opnorm_f = 0.0;       // max_i |algo_i - oracle_i|
    double opnorm_finv = 0.0;
    double max_norm_gap_f = 0.0; // max_i n_i^{1/3} |gap_i|
    double max_norm_gap_finv = 0.0;
    double coverage_f = 0.0;     // fraction of i with n^{1/3}|gap| <= slack
    double coverage_finv = 0.0;
};

struct ScatterRow {
    int index;
    double lambda;
    double oracle_f, algo_f;
    double oracle_finv, algo_finv;
};

struct EntrywiseStudy {
    SimulationConfig config;
    std::vector<int> bulk_counts;              // of the N-independent shape
    std::vector<StudyRecord> records;          // |n_grid| * replications
    std::vector<std::vector<ScatterRow>> scatters;  // first replication per N
    // written files (when out_dir set): report.csv, scatter_N*.csv/svg,
    // summary.json
    std::vector<std::string> written;
};

EntrywiseStudy run_entrywise_study(const SimulationConfig& config);

struct RateFit {
    std::vector<int> n_values;
    std::vector<double> median_loss_f;
    std::vector<double> median_opnorm_f;
    double slope_loss = 0.0;
    double slope_loss_se = 0.0;   // bootstrap over replications
    double slope_opnorm = 0.0;
    double slope_opnorm_se = 0.0;
    bool eta_outside_supported_range = false;  // 1/(N eta) regime flag
    std::vector<double> coverage_by_n;       // median coverage per N
};

RateFit run_rate_study(const SimulationConfig& config);
RateFit rate_fit_from_study(const EntrywiseStudy& study);

// --- overlap study ----------------------------------------------------------

struct OverlapObservables {
    // uu observables are given by dense symmetric matrices in the population
    // eigenbasis plus labels; I, Sigma, Sigma^{-1} and a seeded random
    // bounded matrix by default.
    static OverlapObservables defaults(const PopulationSpectrum& spectrum,
                                       std::uint64_t seed);
    std::vector<std::string> uu_labels;
    std::vector<Eigen::MatrixXd> uu;  // M x M
    std::vector<std::string> vv_labels;
    std::vector<Eigen::VectorXd> vv_diag;  // N-length diagonals
    std::vector<std::string> uv_labels;
    std::vector<Eigen::MatrixXd> uv;  // M x N
};

struct OverlapIndexRow {
    int index;
    std::string family;  // "uu:Sigma", "vv:I", ...
    double empirical;
    double predicted;
    double envelope;          // (N n_i^2)^{-1/6}
    double normalized_error;  // |emp - pred| / envelope
};

struct OverlapStudyResult {
    int N = 0;
    int replications = 0;
    std::vector<std::vector<OverlapIndexRow>> per_rep_rows;
    // fraction of indices within 10 * envelope * N^{0.1}, per rep per family
    std::vector<std::vector<std::pair<std::string, double>>> per_rep_coverage;
    std::vector<std::string> written;
};

OverlapStudyResult run_overlap_study(const SimulationConfig& config,
                                     const OverlapObservables& observables);

// Parallel map over [0, count) with a deterministic result layout.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace rmtcov
