#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "rmtcov/population_spectrum.hpp"
#include "rmtcov/sample.hpp"
#include "rmtcov/stieltjes.hpp"
#include "rmtcov/support.hpp"

namespace rmtcov {

enum class LossKind { Frobenius, InverseFrobenius };
enum class ShrinkageMode { Oracle, Transitional, Algorithmic };

// Shrunk eigenvalues for one (loss, mode) combination. Nothing is reordered
// or clamped: order inversions relative to the sample eigenvalues and
// nonpositive outputs are reported through the diagnostics fields.
struct ShrinkageResult {
    LossKind loss_kind;
    ShrinkageMode mode;
    Eigen::VectorXd shrunk_eigenvalues;
    double eta = 0.0;                       // algorithmic mode only
    std::vector<Complex> per_eigenvalue_z;  // z_i = lambda_i (1 + i eta)
    int order_inversions = 0;               // adjacent pairs out of order
    int nonpositive_count = 0;
    std::vector<std::string> warnings;
};

// Empirical Stieltjes transform of the N-normalized sample eigenvalue law,
//   g(z) = (1/N) sum_j 1/(lambda_j - z) - (1 - M/N)/z.
// Throws PoleHit when z is within 1e-14 of an eigenvalue or of zero.
Complex empirical_stieltjes(const Eigen::VectorXd& lambdas, std::size_t M,
                            std::size_t N, Complex z);

// Loss-optimal scale parameter eta = N^{-1/2}.
double default_eta(std::size_t N);

// Adds a warning when eta leaves [N^{-2/3+0.01}, N^{-0.01}], the range the
// entrywise error guarantees cover.
void check_eta_range(double eta, std::size_t N, std::vector<std::string>& warnings);

// Algorithmic shrinkage, Frobenius loss:
//   z_i = lambda_i (1 + i eta),   shrunk_i = 1 / (lambda_i |g(z_i)|^2).
ShrinkageResult shrink_frobenius(const SampleDecomposition& decomp, double eta);

// Algorithmic shrinkage, inverse Frobenius loss:
//   shrunk_i = -lambda_i / (1 - M/N + 2 lambda_i Re g(z_i)).
ShrinkageResult shrink_inverse_frobenius(const SampleDecomposition& decomp, double eta);

// Finite-sample optimal (infeasible) shrinkages from the true population
// matrix expressed in the sample frame: u_i' Sigma u_i, resp.
// 1/(u_i' Sigma^{-1} u_i).
ShrinkageResult oracle_shrinkage(const SampleDecomposition& decomp,
                                 const Eigen::MatrixXd& population_in_sample_frame,
                                 LossKind loss);

// Oracle against a diagonal population matrix (simulation frame).
ShrinkageResult oracle_shrinkage_diag(const SampleDecomposition& decomp,
                                      const Eigen::VectorXd& population_eigenvalues,
                                      LossKind loss);

// Deterministic-limit surrogate: the Table-1 transitional formulas with the
// boundary Stieltjes transform evaluated at the given eigenvalue locations.
ShrinkageResult transitional_shrinkage(const Eigen::VectorXd& lambdas,
                                       const PopulationSpectrum& spectrum,
                                       LossKind loss, const SolverOptions& opts = {});

// M^{-1} ||A - B||_F^2, or the same for the inverses.
double loss(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, LossKind kind);

// Mean squared eigenvalue gap: the loss between two co-diagonal estimators.
double loss_codiagonal(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Sigma-hat = sum_i shrunk_i u_i u_i'.
Eigen::MatrixXd assemble_estimator(const SampleDecomposition& decomp,
                                   const ShrinkageResult& result);

}  // namespace rmtcov
