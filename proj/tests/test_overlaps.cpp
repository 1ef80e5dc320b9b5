#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "rmtcov/dilation.hpp"
#include "rmtcov/overlaps.hpp"
#include "rmtcov/rng.hpp"
#include "rmtcov/simulation.hpp"
#include "rmtcov/support.hpp"

using namespace rmtcov;

namespace {

PopulationSpectrum fig1_spectrum(std::size_t M, std::size_t N) {
    return PopulationSpectrum::from_weights(
        {{1.0, 0.2}, {3.0, 0.4}, {10.0, 0.4}}, M, N);
}

Eigen::MatrixXd assemble_dilation(const Eigen::MatrixXd& Y) {
    const Eigen::Index M = Y.rows(), N = Y.cols();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(M + N, M + N);
    H.topRightCorner(M, N) = Y / std::sqrt(static_cast<double>(N));
    H.bottomLeftCorner(N, M) = Y.transpose() / std::sqrt(static_cast<double>(N));
    return H;
}

}  // namespace

TEST_CASE("dilation of the zero matrix") {
    DilationSpectrum d = DilationSpectrum::from_data(Eigen::MatrixXd::Zero(3, 5));
    CHECK(d.positive_singular_values().cwiseAbs().maxCoeff() == 0.0);
    for (long i : {1L, -1L, 3L, 4L, 5L}) {
        CHECK(d.singular_value(i) == 0.0);
        CHECK(d.xi(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)d.xi(0), std::out_of_range);
    CHECK_THROWS_AS((void)d.xi(6), std::out_of_range);
    CHECK_THROWS_AS((void)d.xi(-4), std::out_of_range);
}

TEST_CASE("rank-one dilation has the explicit eigenpairs") {
    const Eigen::Index M = 4, N = 6;
    Eigen::VectorXd a(M), b(N);
    a << 0.5, -0.5, 0.5, -0.5;
    b << 1, 1, 1, 1, 1, 1;
    b /= b.norm();
    const double s = 1.7;
    Eigen::MatrixXd Y = s * a * b.transpose();
    DilationSpectrum d = DilationSpectrum::from_data(Y);
    const double sqrtN = std::sqrt(static_cast<double>(N));
    CHECK(d.singular_value(1) == doctest::Approx(s / sqrtN).epsilon(1e-12));
    CHECK(d.singular_value(-1) == doctest::Approx(-s / sqrtN).epsilon(1e-12));
    Eigen::VectorXd xi1 = d.xi(1);
    // (a; b)/sqrt(2) up to sign
    Eigen::VectorXd expect(M + N);
    expect.head(M) = a;
    expect.tail(N) = b;
    expect /= std::sqrt(2.0);
    double align = std::abs(xi1.dot(expect));
    CHECK(align == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("dilation eigenpairs match a dense eigensolve of H") {
    Rng rng(11);
    Eigen::MatrixXd Y(4, 6);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j) Y(i, j) = rng.next_gaussian();
    DilationSpectrum d = DilationSpectrum::from_data(Y);
    Eigen::MatrixXd H = assemble_dilation(Y);

    // orthonormality of the xi system and the eigen-equation residual
    std::vector<long> J;
    for (long i = 1; i <= 6; ++i) J.push_back(i);
    for (long i = 1; i <= 4; ++i) J.push_back(-i);
    for (long i : J) {
        Eigen::VectorXd xi = d.xi(i);
        CHECK(std::abs(xi.norm() - 1.0) < 1e-8);
        CHECK((H * xi - d.singular_value(i) * xi).norm() < 1e-8 * H.norm());
        for (long j : J) {
            if (j == i) continue;
            CHECK(std::abs(d.xi(j).dot(xi)) < 1e-8);
        }
    }
    // eigenvalues of H are the signed singular values plus zeros
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    std::vector<double> hs(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
    std::vector<double> ds;
    for (long i : J) ds.push_back(d.singular_value(i));
    std::sort(ds.begin(), ds.end());
    for (std::size_t k = 0; k < hs.size(); ++k)
        CHECK(hs[k] == doctest::Approx(ds[k]).epsilon(1e-8));
}

TEST_CASE("empirical overlaps: identity and signature observables") {
    Rng rng(13);
    Eigen::MatrixXd Y(5, 8);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 8; ++j) Y(i, j) = rng.next_gaussian();
    DilationSpectrum d = DilationSpectrum::from_data(Y);
    Eigen::MatrixXd I13 = Eigen::MatrixXd::Identity(13, 13);
    Eigen::MatrixXd Iminus = I13;
    Iminus.bottomRightCorner(8, 8) *= -1.0;

    CHECK(empirical_overlap(d, 2, 2, I13) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(empirical_overlap(d, 2, 3, I13)) < 1e-12);
    CHECK(std::abs(empirical_overlap(d, 2, -2, I13)) < 1e-12);
    // <xi_i, I^- xi_i> = (|u|^2 - |v|^2)/2 = 0 for |i| <= M^N
    for (long i : {1L, 2L, -3L, 5L})
        CHECK(std::abs(empirical_overlap(d, i, i, Iminus)) < 1e-12);
    CHECK_THROWS_AS((void)empirical_overlap(d, 0, 1, I13), std::out_of_range);
}

TEST_CASE("predicted uu overlaps: special observables") {
    PopulationSpectrum spec = fig1_spectrum(80, 160);
    SupportStructure sup = find_support(spec);
    const Eigen::Index M = 80;
    const Eigen::VectorXd sigma =
        Eigen::Map<const Eigen::VectorXd>(spec.eigenvalues().data(), M);

    for (std::size_t idx : {std::size_t(0), std::size_t(20), std::size_t(55)}) {
        double gamma = sup.classical_locations[idx];
        // D1 = I: the trace identity collapses the ratio to 1 at real gamma
        double p_id = predicted_overlap_uu(spec, gamma, Eigen::MatrixXd::Identity(M, M));
        CHECK(p_id == doctest::Approx(1.0).epsilon(1e-8));
        // D1 = Sigma: 1/|m(gamma)|^2 = 1/(gamma^2 |m_frak(gamma^2)|^2)
        StieltjesValue v = boundary_stieltjes(spec, gamma * gamma);
        double p_sigma = predicted_overlap_uu_diag(spec, gamma, sigma);
        CHECK(p_sigma ==
              doctest::Approx(1.0 / (gamma * gamma * std::norm(v.m_frak))).epsilon(1e-8));
        // D1 = Sigma^{-1}: -2 Re m_frak(gamma^2) - (1 - M/N)/gamma^2, the
        // sign dictated by Table-1 consistency (its reciprocal must be the
        // transitional inverse-Frobenius shrinkage) and by positivity
        double p_inv = predicted_overlap_uu_diag(spec, gamma, sigma.cwiseInverse());
        double expect = -2.0 * v.m_frak.real() - 0.5 / (gamma * gamma);
        CHECK(p_inv == doctest::Approx(expect).epsilon(1e-8));
        CHECK(p_inv > 0.0);
        double lam = gamma * gamma;
        double finv_transitional = -lam / (0.5 + 2.0 * lam * v.m_frak.real());
        CHECK(1.0 / p_inv == doctest::Approx(finv_transitional).epsilon(1e-8));
    }
}

TEST_CASE("predicted uu overlap is linear in the observable") {
    PopulationSpectrum spec = fig1_spectrum(60, 150);
    SupportStructure sup = find_support(spec);
    double gamma = sup.classical_locations[30];
    Rng rng(7);
    Eigen::MatrixXd A(60, 60), B(60, 60);
    for (int i = 0; i < 60; ++i)
        for (int j = 0; j < 60; ++j) {
            A(i, j) = rng.next_gaussian();
            B(i, j) = rng.next_gaussian();
        }
    double pa = predicted_overlap_uu(spec, gamma, A);
    double pb = predicted_overlap_uu(spec, gamma, B);
    double pc = predicted_overlap_uu(spec, gamma, 2.0 * A - 0.5 * B);
    CHECK(pc == doctest::Approx(2.0 * pa - 0.5 * pb).epsilon(1e-12));
}

TEST_CASE("predicted vv overlaps") {
    Eigen::MatrixXd I6 = Eigen::MatrixXd::Identity(6, 6);
    CHECK(predicted_overlap_vv(I6, 6) == doctest::Approx(1.0));
    Eigen::MatrixXd tracefree = I6;
    tracefree(0, 0) = -5.0;
    CHECK(predicted_overlap_vv(tracefree, 6) == doctest::Approx(0.0));
    Eigen::VectorXd d(6);
    d << 1, 2, 3, 4, 5, 6;
    CHECK(predicted_overlap_vv(d.asDiagonal(), 6) == doctest::Approx(3.5));
}

TEST_CASE("predicted xi overlaps: block structure") {
    PopulationSpectrum spec = fig1_spectrum(40, 90);
    SupportStructure sup = find_support(spec);
    double gamma = sup.classical_locations[17];
    const Eigen::Index M = 40, N = 90;

    Rng rng(23);
    Eigen::MatrixXd D1(M, M);
    for (Eigen::Index i = 0; i < M; ++i)
        for (Eigen::Index j = 0; j < M; ++j) D1(i, j) = rng.next_gaussian();
    Eigen::MatrixXd top = Eigen::MatrixXd::Zero(M + N, M + N);
    top.topLeftCorner(M, M) = D1;
    CHECK(predicted_overlap_xi(spec, gamma, top) ==
          doctest::Approx(0.5 * predicted_overlap_uu(spec, gamma, D1)).epsilon(1e-10));

    Eigen::MatrixXd D2(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) D2(i, j) = rng.next_gaussian();
    Eigen::MatrixXd bottom = Eigen::MatrixXd::Zero(M + N, M + N);
    bottom.bottomRightCorner(N, N) = D2;
    CHECK(predicted_overlap_xi(spec, gamma, bottom) ==
          doctest::Approx(0.5 * predicted_overlap_vv(D2, N)).epsilon(1e-10));

    // block-identity: (<Im Gamma> + Im m)/2 Im m = 1 at real gamma
    CHECK(predicted_overlap_xi(spec, gamma, Eigen::MatrixXd::Identity(M + N, M + N)) ==
          doctest::Approx(1.0).epsilon(1e-8));

    // purely off-diagonal observables have zero diagonal, hence zero limit
    Eigen::MatrixXd anti = Eigen::MatrixXd::Zero(M + N, M + N);
    anti.topRightCorner(M, N).setOnes();
    CHECK(predicted_overlap_xi(spec, gamma, anti) == doctest::Approx(0.0));
}

TEST_CASE("overlap error envelope") {
    std::vector<int> counts{100};
    CHECK(overlap_error_envelope(1000, counts, 1, 1, 1, 1) ==
          doctest::Approx(std::pow(1000.0, -1.0 / 6.0)).epsilon(1e-14));
    // bulk middle: n = 50
    CHECK(overlap_error_envelope(1000, counts, 1, 50, 1, 50) ==
          doctest::Approx(std::pow(1000.0 * 50.0 * 50.0, -1.0 / 6.0)).epsilon(1e-14));
    // symmetry in the two index pairs
    CHECK(overlap_error_envelope(1000, counts, 1, 3, 1, 70) ==
          doctest::Approx(overlap_error_envelope(1000, counts, 1, 70, 1, 3)));
    CHECK_THROWS_AS((void)overlap_error_envelope(1000, counts, 2, 1, 1, 1),
                    std::out_of_range);
}

TEST_CASE("Monte Carlo overlap concentration at modest size") {
    // one replication sanity run of the concentration envelope; the acceptance
    // suite runs the full-size version
    const std::size_t N = 400, M = 200;
    PopulationSpectrum spec = fig1_spectrum(M, N);
    SupportStructure sup = find_support(spec);
    Eigen::MatrixXd Y = generate_sample(spec, N, EntryDistribution::Gaussian, 71);
    SampleDecomposition decomp = SampleDecomposition::from_data(Y, true);
    const Eigen::MatrixXd& U = decomp.eigenvectors();
    const Eigen::VectorXd sigma =
        Eigen::Map<const Eigen::VectorXd>(spec.eigenvalues().data(),
                                          static_cast<Eigen::Index>(M));

    const double slack = 10.0 * std::pow(static_cast<double>(N), 0.1);
    int within = 0;
    for (std::size_t i = 0; i < M; ++i) {
        double gamma = sup.classical_locations[i];
        double pred = predicted_overlap_uu_diag(spec, gamma, sigma);
        Eigen::VectorXd u = U.col(static_cast<Eigen::Index>(i));
        double emp = u.cwiseProduct(sigma).dot(u);
        double nf = sup.n_factor(static_cast<int>(i) + 1);
        double env = std::pow(static_cast<double>(N) * nf * nf, -1.0 / 6.0);
        if (std::abs(emp - pred) <= slack * env) ++within;
    }
    CHECK(static_cast<double>(within) / static_cast<double>(M) >= 0.9);
}
