#include "rmtcov/sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "rmtcov/errors.hpp"

namespace rmtcov {

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& Y) {
    const double invN = 1.0 / static_cast<double>(Y.cols());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(Y.rows(), Y.rows());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(Y, invN);
    return Eigen::MatrixXd(cov.selfadjointView<Eigen::Lower>());
}

SampleDecomposition SampleDecomposition::from_data(const Eigen::MatrixXd& Y,
                                                   bool with_right_vectors) {
    SampleDecomposition out;
    out.sample_size_ = static_cast<std::size_t>(Y.cols());
    const Eigen::Index M = Y.rows();
    const Eigen::Index N = Y.cols();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sample_covariance(Y));
    if (es.info() != Eigen::Success) throw Error("sample covariance eigensolve failed");

    // Eigen returns ascending order; flip to descending (stable within ties).
    out.lambdas_ = es.eigenvalues().reverse();
    out.U_ = es.eigenvectors().rowwise().reverse();
    out.svals_ = out.lambdas_.cwiseMax(0.0).cwiseSqrt();

    if (with_right_vectors) {
        const Eigen::Index R = std::min(M, N);
        Eigen::MatrixXd V(N, R);
        const double sqrtN = std::sqrt(static_cast<double>(N));
        Eigen::MatrixXd YtU = Y.transpose() * out.U_.leftCols(R);
        for (Eigen::Index i = 0; i < R; ++i) {
            double s = out.svals_[i];
            if (s > 1e-14) {
                V.col(i) = YtU.col(i) / (sqrtN * s);
            } else {
                V.col(i).setZero();  // null direction; caller should not use it
            }
        }
        out.V_ = std::move(V);
    }
    return out;
}

SampleDecomposition SampleDecomposition::from_eigenvalues(Eigen::VectorXd lambdas,
                                                          std::size_t sample_size) {
    if (lambdas.size() == 0) throw std::invalid_argument("empty eigenvalue list");
    std::sort(lambdas.data(), lambdas.data() + lambdas.size(), std::greater<double>());
    if (lambdas[lambdas.size() - 1] < 0.0)
        throw std::invalid_argument("sample eigenvalues must be nonnegative");
    SampleDecomposition out;
    out.lambdas_ = std::move(lambdas);
    out.svals_ = out.lambdas_.cwiseSqrt();
    out.U_ = Eigen::MatrixXd::Identity(out.lambdas_.size(), out.lambdas_.size());
    out.sample_size_ = sample_size;
    return out;
}

}  // namespace rmtcov
