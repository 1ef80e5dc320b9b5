#pragma once

#include <optional>

#include <Eigen/Core>

#include "rmtcov/stieltjes.hpp"

namespace rmtcov {

// Spectral data of an observed M x N data matrix Y: the eigenvalues
// lambda_1 >= ... >= lambda_M >= 0 and eigenvectors of the sample covariance
// YY^T/N, the singular values s_i = sqrt(lambda_i) of Y/sqrt(N), and
// optionally the right singular vectors (needed on the overlap/simulation
// path only).
class SampleDecomposition {
  public:
    // Symmetric eigensolve of YY^T/N; right singular vectors are recovered
    // as v_i = Y^T u_i / (sqrt(N) s_i) when requested.
    static SampleDecomposition from_data(const Eigen::MatrixXd& Y,
                                         bool with_right_vectors = false);

    // Eigenvalue-only constructor for synthetic inputs (eigenvectors = I).
    static SampleDecomposition from_eigenvalues(Eigen::VectorXd lambdas,
                                                std::size_t sample_size);

    std::size_t dim() const { return static_cast<std::size_t>(lambdas_.size()); }  // M
    std::size_t sample_size() const { return sample_size_; }                       // N

    const Eigen::VectorXd& eigenvalues() const { return lambdas_; }
    const Eigen::VectorXd& singular_values() const { return svals_; }
    const Eigen::MatrixXd& eigenvectors() const { return U_; }
    const std::optional<Eigen::MatrixXd>& right_singular_vectors() const { return V_; }

  private:
    SampleDecomposition() = default;
    Eigen::VectorXd lambdas_;  // descending
    Eigen::VectorXd svals_;    // s_i = sqrt(lambda_i)
    Eigen::MatrixXd U_;        // M x M, columns u_i
    std::optional<Eigen::MatrixXd> V_;  // N x (M^N), columns v_i
    std::size_t sample_size_ = 0;
};

// Sample covariance YY^T/N via a symmetric rank-k update.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& Y);

}  // namespace rmtcov
