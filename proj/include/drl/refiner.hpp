#pragma once

// Applies a compiled layer to samples. Coordinates are visited in the
// compiled ordering; each one is kept when the constraints of its level,
// with the already refined prefix substituted, accept it, and otherwise moved
// to the nearest boundary that satisfies all of them.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include "drl/algebra.hpp"
#include "drl/compiler.hpp"
#include "drl/matrix.hpp"

namespace drl {

struct BoundaryPair {
    double left = -std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
    // Index of the disjunct defining each finite bound.
    std::optional<std::size_t> left_source;
    std::optional<std::size_t> right_source;

    // The constraint holds at v iff v <= left + tol or v >= right - tol.
    bool admits(double v, double tol) const { return v <= left + tol || v >= right - tol; }
};

// Left bound: max over negative-coefficient disjuncts of -offset / coeff;
// right bound: min over positive ones. nullopt when the constraint is
// trivially satisfied.
std::optional<BoundaryPair> boundaries(const PartialConstraint& constraint);

struct ClosestBounds {
    std::optional<double> left;
    std::optional<double> right;
};

// Largest left bound below v and smallest right bound above v that satisfy
// every pair. Throws NumericFailure when neither exists.
ClosestBounds closest_bounds(std::span<const BoundaryPair> pairs, double v, double tol);

struct RefineOptions {
    double tau = 1e-9;
    // Re-check, at every coordinate, the constraints of the level that do not
    // mention it. Defaults to on in debug builds.
#ifdef NDEBUG
    bool verify_chain = false;
#else
    bool verify_chain = true;
#endif
};

enum class Action { kept, snapped_left, snapped_right, trivially_free };

const char* to_string(Action action);

struct Provenance {
    Action action = Action::trivially_free;
    // Index into layer.level(position + 1) and disjunct index within it, for
    // snapped coordinates.
    std::optional<std::size_t> source_constraint;
    std::optional<std::size_t> source_disjunct;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct RefineResult {
    std::vector<double> refined;          // caller's variable order
    std::vector<Provenance> provenance;   // caller's variable order
    // Row-major D x D, d refined[a] / d sample[b]; lower triangular once rows
    // and columns are permuted into the compiled ordering.
    std::vector<double> jacobian;

    bool has_jacobian() const noexcept { return !jacobian.empty(); }
};

class Refiner {
public:
    // Throws UnsatError for an unsatisfiable layer.
    explicit Refiner(const CompiledLayer& layer, RefineOptions options = {});

    std::size_t dimension() const noexcept { return dimension_; }
    const RefineOptions& options() const noexcept { return options_; }

    // Throws InvalidSample, DimensionMismatch or NumericFailure.
    RefineResult refine(std::span<const double> sample, bool with_jacobian = false) const;

private:
    struct Disjunct {
        long double coeff = 0;  // of the refined coordinate
        std::vector<std::pair<std::size_t, long double>> prefix;  // phi
        long double bias = 0;
        // boundary -phi / coeff, exact quotients rounded once
        std::vector<std::pair<std::size_t, long double>> bound_prefix;
        long double bound_bias = 0;
    };
    struct Active {
        std::size_t level_index;
        std::vector<Disjunct> disjuncts;
    };
    struct Position {
        std::vector<Active> active;
        // Level constraints not mentioning the position (verify_chain only).
        std::vector<std::vector<Disjunct>> settled;
    };

    static Disjunct lower(const Inequality& ineq, std::size_t position);

    std::size_t dimension_;
    std::vector<VarIndex> ordering_;
    RefineOptions options_;
    std::vector<Position> positions_;
};

RefineResult refine(const CompiledLayer& layer, std::span<const double> sample,
                    const RefineOptions& options = {});
RefineResult refine_with_jacobian(const CompiledLayer& layer, std::span<const double> sample,
                                  const RefineOptions& options = {});

struct RowFailure {
    std::size_t row;
    std::string message;
};

struct BatchResult {
    Matrix refined;
    std::vector<std::vector<Provenance>> provenance;  // per row, caller's order
    std::vector<std::vector<double>> jacobians;       // per row when requested
    std::vector<RowFailure> failures;                 // rows left unchanged
    std::size_t changed_rows = 0;
    std::size_t changed_values = 0;
};

struct BatchOptions {
    std::size_t parallelism = 1;
    bool skip_errors = false;
    bool jacobian = false;
};

// Row-independent refinement; output is identical for any parallelism. Throws
// the first failing row's error (annotated with its index) unless
// skip_errors is set.
BatchResult refine_dataset(const Refiner& refiner, const Matrix& data, const BatchOptions& options = {});

}  // namespace drl
