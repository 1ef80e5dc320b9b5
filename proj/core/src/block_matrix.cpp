#include "rmtcov/block_matrix.hpp"

#include <stdexcept>

#include <Eigen/Dense>

namespace rmtcov {

BlockObservable::BlockObservable(Eigen::MatrixXcd mat, Eigen::Index M, Eigen::Index N)
    : mat_(std::move(mat)), M_(M), N_(N) {
    if (mat_.rows() != M_ + N_ || mat_.cols() != M_ + N_)
        throw std::invalid_argument("block observable must be (M+N) x (M+N)");
}

BlockObservable BlockObservable::zero(Eigen::Index M, Eigen::Index N) {
    return {Eigen::MatrixXcd::Zero(M + N, M + N), M, N};
}

BlockObservable BlockObservable::identity_plus(Eigen::Index M, Eigen::Index N) {
    return {Eigen::MatrixXcd::Identity(M + N, M + N), M, N};
}

BlockObservable BlockObservable::identity_minus(Eigen::Index M, Eigen::Index N) {
    BlockObservable out = identity_plus(M, N);
    out.block_n() *= -1.0;
    return out;
}

BlockObservable BlockObservable::embed_im(Eigen::Index M, Eigen::Index N) {
    BlockObservable out = zero(M, N);
    out.block_m().setIdentity();
    return out;
}

BlockObservable BlockObservable::embed_in(Eigen::Index M, Eigen::Index N) {
    BlockObservable out = zero(M, N);
    out.block_n().setIdentity();
    return out;
}

BlockObservable BlockObservable::embed_sigma(const PopulationSpectrum& s) {
    const Eigen::Index M = static_cast<Eigen::Index>(s.dimension());
    const Eigen::Index N = static_cast<Eigen::Index>(s.sample_size());
    BlockObservable out = zero(M, N);
    for (Eigen::Index i = 0; i < M; ++i)
        out.mat()(i, i) = s.eigenvalues()[static_cast<std::size_t>(i)];
    return out;
}

BlockObservable BlockObservable::sigma_pm(const PopulationSpectrum& s, int sign) {
    BlockObservable out = embed_sigma(s);
    out.block_n() = (sign >= 0 ? 1.0 : -1.0) *
                    Eigen::MatrixXcd::Identity(out.n(), out.n());
    return out;
}

BlockObservable BlockObservable::diagonal(const Eigen::VectorXcd& diag,
                                          Eigen::Index M, Eigen::Index N) {
    if (diag.size() != M + N) throw std::invalid_argument("diagonal length mismatch");
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(M + N, M + N);
    mat.diagonal() = diag;
    return {std::move(mat), M, N};
}

Complex BlockObservable::ntrace_m_weighted(const Eigen::VectorXd& sigma) const {
    if (sigma.size() != M_) throw std::invalid_argument("sigma length mismatch");
    // bilinear sum, no conjugation
    Complex s = (block_m().diagonal().array() * sigma.array().cast<Complex>()).sum();
    return s / static_cast<double>(N_);
}

double BlockObservable::op_norm() const {
    // largest singular value via the Hermitian square
    Eigen::MatrixXcd gram = mat_.adjoint() * mat_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

BlockObservable BlockObservable::operator+(const BlockObservable& o) const {
    return {mat_ + o.mat_, M_, N_};
}

BlockObservable BlockObservable::operator-(const BlockObservable& o) const {
    return {mat_ - o.mat_, M_, N_};
}

BlockObservable BlockObservable::operator*(const BlockObservable& o) const {
    return {mat_ * o.mat_, M_, N_};
}

}  // namespace rmtcov
