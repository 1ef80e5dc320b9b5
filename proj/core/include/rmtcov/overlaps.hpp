#pragma once

#include <Eigen/Core>

#include "rmtcov/population_spectrum.hpp"
#include "rmtcov/stieltjes.hpp"

namespace rmtcov {

// Deterministic limits of the singular vector overlaps at a classical
// location gamma strictly inside the support (singular value scale). The
// observables live in the population eigenbasis; normalized traces divide
// by N throughout.

// <u, D1 u> limit: <Im Gamma(gamma) D1> / Im m(gamma), D1 dense M x M.
double predicted_overlap_uu(const PopulationSpectrum& spectrum, double gamma,
                            const Eigen::MatrixXd& D1, const SolverOptions& opts = {});

// Same with a diagonal observable (D1 given by its diagonal).
double predicted_overlap_uu_diag(const PopulationSpectrum& spectrum, double gamma,
                                 const Eigen::VectorXd& d1_diag,
                                 const SolverOptions& opts = {});

// <v, D2 v> limit: <D2> = tr(D2)/N for the diagonal overlap, 0 otherwise.
double predicted_overlap_vv(const Eigen::MatrixXd& D2, std::size_t N);

// <xi, D xi> limit: <Im Pi(gamma) D> / (2 Im m(gamma)) with the dilation
// surrogate Pi = diag(Gamma, m I_N); D is (M+N) x (M+N).
double predicted_overlap_xi(const PopulationSpectrum& spectrum, double gamma,
                            const Eigen::MatrixXd& D, const SolverOptions& opts = {});

// High-probability error envelope (N * n_{k,i} * n_{l,j})^{-1/6} with
// n_{k,i} = i ^ (N_k + 1 - i).
double overlap_error_envelope(std::size_t N, const std::vector<int>& bulk_counts,
                              int k, int i, int l, int j);

}  // namespace rmtcov
