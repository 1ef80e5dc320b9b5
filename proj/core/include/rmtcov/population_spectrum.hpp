#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace rmtcov {

// Population covariance model: the eigenvalues sigma_1 >= ... >= sigma_M >= 0
// of Sigma together with the sample size N. The whole library works in the
// population eigenbasis, so this is the only representation of Sigma needed.
//
// Repeated eigenvalues are grouped into (value, count) pairs on construction;
// the grouped view drives the self-consistent solver and the edge search.
class PopulationSpectrum {
  public:
    PopulationSpectrum(std::vector<double> eigenvalues, std::size_t sample_size);

    // Expands (value, fraction) pairs into round(fraction*M) copies each.
    // Fractions must sum to 1 within 1e-12; rounding residue goes into the
    // largest group so the total is exactly `dimension`.
    static PopulationSpectrum from_weights(
        const std::vector<std::pair<double, double>>& value_fraction,
        std::size_t dimension, std::size_t sample_size);

    std::size_t dimension() const { return eigenvalues_.size(); }    // M
    std::size_t sample_size() const { return sample_size_; }         // N
    double ratio() const {                                           // c = M/N
        return static_cast<double>(dimension()) / static_cast<double>(sample_size_);
    }

    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    double max_eigenvalue() const { return eigenvalues_.front(); }
    double min_eigenvalue() const { return eigenvalues_.back(); }

    // Distinct eigenvalues (descending) with multiplicities.
    const std::vector<double>& group_values() const { return group_values_; }
    const std::vector<std::size_t>& group_counts() const { return group_counts_; }

    double trace() const { return trace_; }          // tr Sigma
    double trace_sq() const { return trace_sq_; }    // tr Sigma^2

    // Regularity diagnostics for the modeling constant tau: max eigenvalue
    // should stay below 1/tau and at most a (1-tau) fraction may sit below
    // tau. Violations are reported, not rejected, since tau is a modeling
    // constant the theory leaves unpinned.
    std::vector<std::string> validate(double tau = 0.01) const;

    PopulationSpectrum scaled(double s) const;

  private:
    std::vector<double> eigenvalues_;      // sorted descending
    std::size_t sample_size_;
    std::vector<double> group_values_;
    std::vector<std::size_t> group_counts_;
    double trace_ = 0.0;
    double trace_sq_ = 0.0;
};

}  // namespace rmtcov
