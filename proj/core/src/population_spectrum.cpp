#include "rmtcov/population_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rmtcov/errors.hpp"

namespace rmtcov {

PopulationSpectrum::PopulationSpectrum(std::vector<double> eigenvalues,
                                       std::size_t sample_size)
    : eigenvalues_(std::move(eigenvalues)), sample_size_(sample_size) {
    if (eigenvalues_.empty()) throw std::invalid_argument("empty population spectrum");
    if (sample_size_ == 0) throw std::invalid_argument("sample size must be positive");
    std::sort(eigenvalues_.begin(), eigenvalues_.end(), std::greater<double>());
    if (eigenvalues_.back() < 0.0)
        throw std::invalid_argument("population eigenvalues must be nonnegative");

    for (double s : eigenvalues_) {
        trace_ += s;
        trace_sq_ += s * s;
        if (!group_values_.empty() && s == group_values_.back()) {
            ++group_counts_.back();
        } else {
            group_values_.push_back(s);
            group_counts_.push_back(1);
        }
    }
}

PopulationSpectrum PopulationSpectrum::from_weights(
    const std::vector<std::pair<double, double>>& value_fraction,
    std::size_t dimension, std::size_t sample_size) {
    if (value_fraction.empty()) throw std::invalid_argument("empty spectrum specification");
    double total = 0.0;
    for (const auto& [v, f] : value_fraction) {
        if (f < 0.0) throw std::invalid_argument("negative spectrum fraction");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("spectrum fractions must sum to 1");

    std::vector<double> eig;
    eig.reserve(dimension);
    std::size_t largest = 0;
    for (std::size_t g = 1; g < value_fraction.size(); ++g)
        if (value_fraction[g].second > value_fraction[largest].second) largest = g;
    std::size_t assigned = 0;
    std::vector<std::size_t> counts(value_fraction.size());
    for (std::size_t g = 0; g < value_fraction.size(); ++g) {
        counts[g] = static_cast<std::size_t>(
            std::llround(value_fraction[g].second * static_cast<double>(dimension)));
        assigned += counts[g];
    }
    // push the rounding residue into the largest group
    counts[largest] += dimension;
    counts[largest] -= assigned;
    for (std::size_t g = 0; g < value_fraction.size(); ++g)
        eig.insert(eig.end(), counts[g], value_fraction[g].first);
    return PopulationSpectrum(std::move(eig), sample_size);
}

std::vector<std::string> PopulationSpectrum::validate(double tau) const {
    std::vector<std::string> warnings;
    if (max_eigenvalue() > 1.0 / tau)
        warnings.push_back("largest population eigenvalue exceeds 1/tau = " +
                           std::to_string(1.0 / tau));
    std::size_t small = 0;
    for (double s : eigenvalues_)
        if (s <= tau) ++small;
    double frac = static_cast<double>(small) / static_cast<double>(dimension());
    if (frac > 1.0 - tau)
        warnings.push_back("more than a (1-tau) fraction of eigenvalues lie below tau");
    double c = ratio();
    if (c < tau || c > 1.0 / tau)
        warnings.push_back("dimension ratio M/N outside [tau, 1/tau]");
    return warnings;
}

PopulationSpectrum PopulationSpectrum::scaled(double s) const {
    if (s <= 0.0) throw std::invalid_argument("scale must be positive");
    std::vector<double> eig(eigenvalues_);
    for (double& v : eig) v *= s;
    return PopulationSpectrum(std::move(eig), sample_size_);
}

}  // namespace rmtcov
