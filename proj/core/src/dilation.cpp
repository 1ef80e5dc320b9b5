#include "rmtcov/dilation.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace rmtcov {

DilationSpectrum DilationSpectrum::from_data(const Eigen::MatrixXd& Y) {
    DilationSpectrum out;
    out.M_ = static_cast<std::size_t>(Y.rows());
    out.N_ = static_cast<std::size_t>(Y.cols());
    const double sqrtN = std::sqrt(static_cast<double>(out.N_));

    Eigen::BDCSVD<Eigen::MatrixXd> svd(Y / sqrtN,
                                       Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Index R = std::min(Y.rows(), Y.cols());
    out.svals_ = svd.singularValues().head(R);
    out.U_ = svd.matrixU().leftCols(R);
    out.V_ = svd.matrixV().leftCols(R);

    // null-block vectors padded to length M+N
    const Eigen::Index total = Y.rows() + Y.cols();
    const Eigen::Index extra = std::max(Y.rows(), Y.cols()) - R;
    out.null_ = Eigen::MatrixXd::Zero(total, extra);
    if (extra > 0) {
        if (Y.rows() > Y.cols())
            out.null_.topRows(Y.rows()) = svd.matrixU().rightCols(extra);
        else
            out.null_.bottomRows(Y.cols()) = svd.matrixV().rightCols(extra);
    }
    return out;
}

double DilationSpectrum::singular_value(long i) const {
    if (!in_index_set(i)) throw std::out_of_range("index outside J");
    long a = std::labs(i);
    if (a > static_cast<long>(min_dim())) return 0.0;
    double s = svals_[a - 1];
    return i > 0 ? s : -s;
}

Eigen::VectorXd DilationSpectrum::xi(long i) const {
    if (!in_index_set(i)) throw std::out_of_range("index outside J");
    const Eigen::Index M = static_cast<Eigen::Index>(M_);
    const Eigen::Index N = static_cast<Eigen::Index>(N_);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(M + N);
    long a = std::labs(i);
    if (a <= static_cast<long>(min_dim())) {
        const double r = 1.0 / std::sqrt(2.0);
        v.head(M) = r * U_.col(a - 1);
        v.tail(N) = (i > 0 ? r : -r) * V_.col(a - 1);
    } else {
        v = null_.col(a - 1 - static_cast<long>(min_dim()));
    }
    return v;
}

double empirical_overlap(const DilationSpectrum& dilation, long i, long j,
                         const Eigen::MatrixXd& D) {
    Eigen::VectorXd xi = dilation.xi(i);
    Eigen::VectorXd xj = dilation.xi(j);
    if (D.rows() != xi.size() || D.cols() != xj.size())
        throw std::invalid_argument("observable shape mismatch");
    return xi.dot(D * xj);
}

}  // namespace rmtcov
