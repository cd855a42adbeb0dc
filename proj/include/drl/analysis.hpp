#pragma once

// Violation metrics over datasets and heuristics for choosing a variable
// ordering from real and synthetic data.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "drl/algebra.hpp"
#include "drl/matrix.hpp"

namespace drl {

struct MetricsReport {
    double cvr = 0;   // % of rows violating at least one constraint
    double scvc = 0;  // mean over rows of the % of constraints violated
    double cvc = 0;   // % of constraints violated by at least one row
    std::vector<std::size_t> per_constraint_violation_counts;
    std::size_t violating_rows = 0;
    std::size_t n_rows = 0;
    std::size_t n_constraints = 0;
};

// Evaluated against the constraints as given. An empty set or an empty
// dataset yields all zeros. Throws DimensionMismatch when the dataset width
// differs from the set's dimension.
MetricsReport metrics(const ConstraintSet& pi, const Matrix& dataset, double tol = 1e-9);

struct VariableOrdering {
    enum class Method { given, random, corr, kde };

    std::vector<VarIndex> permutation;  // position -> variable
    Method method = Method::given;
    std::uint64_t seed = 0;   // random
    std::size_t bins = 0;     // kde
    std::vector<double> scores;  // corr / kde, per variable
};

const char* to_string(VariableOrdering::Method method);

VariableOrdering ordering_given(std::size_t dimension);

// Fisher-Yates driven by std::mt19937_64 seeded with seed; indices are drawn
// by rejection so the result does not depend on the standard library.
VariableOrdering ordering_random(std::size_t dimension, std::uint64_t seed);

// score_j = sum over k != j of |corr_real(j, k) - corr_syn(j, k)| (Pearson,
// zero-variance columns correlate 0 with everything); ascending, ties by
// index. Needs at least two rows in each table.
VariableOrdering ordering_corr(const Matrix& real, const Matrix& synthetic);

// score_j = KL(real || synthetic) of equal-width histograms over the joint
// range of column j, Laplace-smoothed; ascending, ties by index.
VariableOrdering ordering_kde(const Matrix& real, const Matrix& synthetic, std::size_t bins = 32);

// Pearson correlation matrix (row-major cols x cols), computed on the rows in
// lexicographic order so the result is independent of row order.
std::vector<double> correlation_matrix(const Matrix& data);

// KL divergence of the two smoothed histograms of column values.
double histogram_kl(std::span<const double> real, std::span<const double> synthetic, std::size_t bins,
                    double alpha = 1e-9);

bool is_permutation_of_iota(std::span<const VarIndex> permutation);

}  // namespace drl
