#pragma once

#include <Eigen/Core>

#include "rmtcov/sample.hpp"

namespace rmtcov {

// Spectral data of the self-adjoint dilation
//
//   H = [ 0, Y/sqrt(N); Y'/sqrt(N), 0 ],
//
// in the signed-index convention: for 1 <= i <= M^N the eigenpairs are
// (±s_i, xi_{±i}) with xi_{±i} = (u_i; ±v_i)/sqrt(2); for M^N < i <= MvN the
// eigenvalue is 0 and xi_i lives in the null block of the larger dimension.
// The index set is J = [-M^N, MvN] \ {0}.
class DilationSpectrum {
  public:
    static DilationSpectrum from_data(const Eigen::MatrixXd& Y);

    std::size_t dim_m() const { return M_; }
    std::size_t dim_n() const { return N_; }
    std::size_t min_dim() const { return std::min(M_, N_); }
    std::size_t max_dim() const { return std::max(M_, N_); }

    bool in_index_set(long i) const {
        return i != 0 && i >= -static_cast<long>(min_dim()) &&
               i <= static_cast<long>(max_dim());
    }

    // Signed singular value s_i (s_{-i} = -s_i; zero in the null range).
    double singular_value(long i) const;

    // Dilation eigenvector xi_i, length M+N.
    Eigen::VectorXd xi(long i) const;

    const Eigen::VectorXd& positive_singular_values() const { return svals_; }
    const Eigen::MatrixXd& left_vectors() const { return U_; }    // M x M^N
    const Eigen::MatrixXd& right_vectors() const { return V_; }   // N x M^N
    const Eigen::MatrixXd& null_vectors() const { return null_; } // (MvN - M^N) cols

  private:
    std::size_t M_ = 0, N_ = 0;
    Eigen::VectorXd svals_;  // descending, size M^N
    Eigen::MatrixXd U_, V_;
    Eigen::MatrixXd null_;   // embedded in R^{M+N}
};

// xi_i' D xi_j, a plain inner product (no trace normalization).
double empirical_overlap(const DilationSpectrum& dilation, long i, long j,
                         const Eigen::MatrixXd& D);

}  // namespace rmtcov
