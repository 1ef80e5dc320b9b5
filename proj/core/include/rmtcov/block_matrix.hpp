#pragma once

#include <Eigen/Core>

#include "rmtcov/population_spectrum.hpp"
#include "rmtcov/stieltjes.hpp"

namespace rmtcov {

// Dense (M+N) x (M+N) complex observable with tagged diagonal blocks: A_M is
// the top-left M x M block, A_N the bottom-right N x N block. Normalized
// traces divide by N regardless of the matrix dimension.
class BlockObservable {
  public:
    BlockObservable(Eigen::MatrixXcd mat, Eigen::Index M, Eigen::Index N);
    static BlockObservable zero(Eigen::Index M, Eigen::Index N);

    // Canonical embeddings and signature matrices.
    static BlockObservable identity_plus(Eigen::Index M, Eigen::Index N);   // I^+
    static BlockObservable identity_minus(Eigen::Index M, Eigen::Index N);  // I^-
    static BlockObservable embed_im(Eigen::Index M, Eigen::Index N);        // I_M
    static BlockObservable embed_in(Eigen::Index M, Eigen::Index N);        // I_N
    static BlockObservable embed_sigma(const PopulationSpectrum& s);        // Sigma_M
    static BlockObservable sigma_pm(const PopulationSpectrum& s, int sign); // Sigma^{+-}

    // Block-diagonal matrix from a full (M+N)-length diagonal.
    static BlockObservable diagonal(const Eigen::VectorXcd& diag,
                                    Eigen::Index M, Eigen::Index N);

    Eigen::Index m() const { return M_; }
    Eigen::Index n() const { return N_; }
    Eigen::Index size() const { return M_ + N_; }

    const Eigen::MatrixXcd& mat() const { return mat_; }
    Eigen::MatrixXcd& mat() { return mat_; }

    auto block_m() const { return mat_.topLeftCorner(M_, M_); }
    auto block_n() const { return mat_.bottomRightCorner(N_, N_); }
    auto block_m() { return mat_.topLeftCorner(M_, M_); }
    auto block_n() { return mat_.bottomRightCorner(N_, N_); }

    // tr(A)/N, the N-normalized trace used throughout.
    Complex ntrace() const { return mat_.trace() / static_cast<double>(N_); }
    Complex ntrace_block_n() const {
        return block_n().trace() / static_cast<double>(N_);
    }
    // (1/N) tr(A_M diag(sigma)) = <A Sigma_M>.
    Complex ntrace_m_weighted(const Eigen::VectorXd& sigma) const;

    double op_norm() const;  // largest singular value

    BlockObservable transposed() const { return {mat_.transpose(), M_, N_}; }
    BlockObservable conjugated() const { return {mat_.conjugate(), M_, N_}; }
    BlockObservable adjointed() const { return {mat_.adjoint(), M_, N_}; }

    BlockObservable operator+(const BlockObservable& o) const;
    BlockObservable operator-(const BlockObservable& o) const;
    BlockObservable operator*(const BlockObservable& o) const;  // matrix product
    friend BlockObservable operator*(Complex s, const BlockObservable& a) {
        return {s * a.mat_, a.M_, a.N_};
    }

  private:
    Eigen::MatrixXcd mat_;
    Eigen::Index M_, N_;
};

}  // namespace rmtcov
