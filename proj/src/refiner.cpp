#include "drl/refiner.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <thread>

#include "drl/errors.hpp"

namespace drl {

std::optional<BoundaryPair> boundaries(const PartialConstraint& constraint) {
    if (constraint.trivially_true) return std::nullopt;
    BoundaryPair pair;
    for (std::size_t i = 0; i < constraint.disjuncts.size(); ++i) {
        const auto& d = constraint.disjuncts[i];
        const double bound = -d.offset / d.coeff;
        if (d.coeff < 0 && (!pair.left_source || bound > pair.left)) {
            pair.left = bound;
            pair.left_source = i;
        } else if (d.coeff > 0 && (!pair.right_source || bound < pair.right)) {
            pair.right = bound;
            pair.right_source = i;
        }
    }
    return pair;
}

namespace {

// Shared selection rule: nearest admissible left bound strictly below v and
// right bound strictly above v.
template <typename Candidates, typename Admits>
ClosestBounds select_closest(const Candidates& lefts, const Candidates& rights, double v, Admits&& admits) {
    ClosestBounds out;
    for (double l : lefts) {
        if (l < v && (!out.left || l > *out.left) && admits(l)) out.left = l;
    }
    for (double r : rights) {
        if (r > v && (!out.right || r < *out.right) && admits(r)) out.right = r;
    }
    return out;
}

}  // namespace

ClosestBounds closest_bounds(std::span<const BoundaryPair> pairs, double v, double tol) {
    std::vector<double> lefts;
    std::vector<double> rights;
    for (const auto& p : pairs) {
        if (std::isfinite(p.left)) lefts.push_back(p.left);
        if (std::isfinite(p.right)) rights.push_back(p.right);
    }
    auto admits = [&](double c) {
        return std::all_of(pairs.begin(), pairs.end(), [&](const BoundaryPair& p) { return p.admits(c, tol); });
    };
    ClosestBounds out = select_closest(lefts, rights, v, admits);
    if (!out.left && !out.right) {
        throw NumericFailure("no admissible boundary for value " + std::to_string(v), 0);
    }
    return out;
}

const char* to_string(Action action) {
    switch (action) {
        case Action::kept: return "kept";
        case Action::snapped_left: return "snapped_left";
        case Action::snapped_right: return "snapped_right";
        case Action::trivially_free: return "trivially_free";
    }
    return "?";
}

// -------------------------------------------------------------------- Refiner

Refiner::Disjunct Refiner::lower(const Inequality& ineq, std::size_t position) {
    Disjunct d;
    const LinearExpr& e = ineq.expr();
    const Rational w = e.coefficient(position);
    d.coeff = to_long_double(w);
    d.bias = to_long_double(e.bias());
    for (const auto& t : e.terms()) {
        if (t.var != position) d.prefix.emplace_back(t.var, to_long_double(t.coeff));
    }
    if (sgn(w) != 0) {
        const LinearExpr bound = -e.without(position) / w;
        d.bound_bias = to_long_double(bound.bias());
        for (const auto& t : bound.terms()) d.bound_prefix.emplace_back(t.var, to_long_double(t.coeff));
    }
    return d;
}

Refiner::Refiner(const CompiledLayer& layer, RefineOptions options)
    : dimension_(layer.dimension()), ordering_(layer.ordering()), options_(options) {
    if (!layer.satisfiable()) throw UnsatError("cannot refine with an unsatisfiable layer");
    if (!(options_.tau >= 0) || !std::isfinite(options_.tau)) {
        throw std::invalid_argument("tau must be a finite non-negative number");
    }
    positions_.resize(dimension_);
    for (std::size_t p = 0; p < dimension_; ++p) {
        const ConstraintSet& level = layer.level(p + 1);
        const auto& active = layer.active(p);
        for (std::size_t k : active) {
            Active a{k, {}};
            for (const auto& d : level[k].disjuncts()) a.disjuncts.push_back(lower(d, p));
            positions_[p].active.push_back(std::move(a));
        }
        if (options_.verify_chain) {
            for (std::size_t k = 0; k < level.size(); ++k) {
                if (std::find(active.begin(), active.end(), k) != active.end()) continue;
                std::vector<Disjunct> ds;
                for (const auto& d : level[k].disjuncts()) ds.push_back(lower(d, p));
                positions_[p].settled.push_back(std::move(ds));
            }
        }
    }
}

namespace {

long double dot(const std::vector<std::pair<std::size_t, long double>>& terms, const std::vector<double>& y) {
    long double acc = 0;
    for (const auto& [pos, c] : terms) acc += c * static_cast<long double>(y[pos]);
    return acc;
}

struct LiveDisjunct {
    std::size_t index;
    long double coeff;
    long double phi;
    double bound;
};

struct LiveConstraint {
    std::size_t level_index;
    std::vector<LiveDisjunct> disjuncts;
};

bool admits(const LiveConstraint& c, double v, double tau) {
    for (const auto& d : c.disjuncts) {
        if (static_cast<double>(d.coeff * static_cast<long double>(v) + d.phi) >= -tau) return true;
    }
    return false;
}

}  // namespace

RefineResult Refiner::refine(std::span<const double> sample, bool with_jacobian) const {
    if (sample.size() != dimension_) {
        throw DimensionMismatch("sample has " + std::to_string(sample.size()) + " values, layer expects " +
                                std::to_string(dimension_));
    }
    for (std::size_t i = 0; i < sample.size(); ++i) {
        if (!std::isfinite(sample[i])) {
            throw InvalidSample("non-finite value at variable " + std::to_string(i));
        }
    }

    const double tau = options_.tau;
    const std::size_t d = dimension_;
    std::vector<double> y(d);
    std::vector<Provenance> prov(d);
    std::vector<double> jac;  // position space, row-major
    if (with_jacobian) jac.assign(d * d, 0.0);

    std::size_t processed = 0;
    std::vector<LiveConstraint> live;
    for (std::size_t p = 0; p < d; ++p) {
        ++processed;
        const Position& pos = positions_[p];
        const double v = sample[ordering_[p]];

        if (options_.verify_chain) {
            for (const auto& c : pos.settled) {
                const bool ok = std::any_of(c.begin(), c.end(), [&](const Disjunct& dj) {
                    return static_cast<double>(dot(dj.prefix, y) + dj.bias) >= -tau;
                });
                if (!ok) {
                    throw NumericFailure("refined prefix violates a derived constraint before position " +
                                             std::to_string(p),
                                         p);
                }
            }
        }

        live.clear();
        for (const auto& a : pos.active) {
            LiveConstraint lc{a.level_index, {}};
            bool trivially = false;
            for (std::size_t i = 0; i < a.disjuncts.size() && !trivially; ++i) {
                const Disjunct& dj = a.disjuncts[i];
                const long double phi = dot(dj.prefix, y) + dj.bias;
                if (dj.coeff == 0) {
                    trivially = static_cast<double>(phi) >= -tau;
                    continue;
                }
                const double bound = static_cast<double>(dot(dj.bound_prefix, y) + dj.bound_bias);
                lc.disjuncts.push_back({i, dj.coeff, phi, bound});
            }
            if (!trivially) live.push_back(std::move(lc));
        }

        auto keep = [&](Action action) {
            y[p] = v;
            prov[ordering_[p]] = {action, std::nullopt, std::nullopt};
            if (with_jacobian) jac[p * d + p] = 1.0;
        };
        if (live.empty()) {
            keep(Action::trivially_free);
            continue;
        }
        auto admitted = [&](double c) {
            return std::all_of(live.begin(), live.end(), [&](const LiveConstraint& lc) { return admits(lc, c, tau); });
        };
        if (admitted(v)) {
            keep(Action::kept);
            continue;
        }

        // Constraint-level boundaries, remembering their sources.
        struct Candidate {
            double value;
            std::size_t constraint;  // into live
            std::size_t disjunct;    // into live[constraint].disjuncts
        };
        std::optional<Candidate> best_left;
        std::optional<Candidate> best_right;
        for (std::size_t c = 0; c < live.size(); ++c) {
            std::optional<Candidate> left;
            std::optional<Candidate> right;
            for (std::size_t i = 0; i < live[c].disjuncts.size(); ++i) {
                const auto& dj = live[c].disjuncts[i];
                if (dj.coeff < 0 && (!left || dj.bound > left->value)) left = Candidate{dj.bound, c, i};
                if (dj.coeff > 0 && (!right || dj.bound < right->value)) right = Candidate{dj.bound, c, i};
            }
            if (left && left->value < v && (!best_left || left->value > best_left->value) && admitted(left->value)) {
                best_left = left;
            }
            if (right && right->value > v && (!best_right || right->value < best_right->value) &&
                admitted(right->value)) {
                best_right = right;
            }
        }
        if (!best_left && !best_right) {
            std::ostringstream msg;
            msg << "no admissible value for position " << p << " (variable " << ordering_[p]
                << ") under tolerance " << tau << "; active constraints:";
            for (const auto& lc : live) msg << ' ' << lc.level_index;
            throw NumericFailure(msg.str(), p);
        }

        const bool go_left =
            best_left && (!best_right || std::fabs(v - best_left->value) < std::fabs(v - best_right->value));
        const Candidate& chosen = go_left ? *best_left : *best_right;
        const LiveConstraint& src = live[chosen.constraint];
        const std::size_t disjunct = src.disjuncts[chosen.disjunct].index;
        y[p] = chosen.value;
        prov[ordering_[p]] = {go_left ? Action::snapped_left : Action::snapped_right, src.level_index, disjunct};

        if (with_jacobian) {
            // refined_p = sum_k beta_k refined_k + beta_0 over earlier positions.
            const Active* active = nullptr;
            for (const auto& a : pos.active) {
                if (a.level_index == src.level_index) active = &a;
            }
            for (const auto& [k, beta] : active->disjuncts[disjunct].bound_prefix) {
                for (std::size_t col = 0; col <= k; ++col) {
                    jac[p * d + col] += static_cast<double>(beta) * jac[k * d + col];
                }
            }
        }
    }
    assert(processed == d && "each coordinate is visited exactly once");
    (void)processed;

    RefineResult result;
    result.refined.resize(d);
    for (std::size_t p = 0; p < d; ++p) result.refined[ordering_[p]] = y[p];
    result.provenance = std::move(prov);
    if (with_jacobian) {
        result.jacobian.assign(d * d, 0.0);
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = 0; q < d; ++q) {
                result.jacobian[ordering_[p] * d + ordering_[q]] = jac[p * d + q];
            }
        }
    }
    return result;
}

RefineResult refine(const CompiledLayer& layer, std::span<const double> sample, const RefineOptions& options) {
    return Refiner(layer, options).refine(sample, false);
}

RefineResult refine_with_jacobian(const CompiledLayer& layer, std::span<const double> sample,
                                  const RefineOptions& options) {
    return Refiner(layer, options).refine(sample, true);
}

// ---------------------------------------------------------------------- batch

BatchResult refine_dataset(const Refiner& refiner, const Matrix& data, const BatchOptions& options) {
    if (data.cols != refiner.dimension()) {
        throw DimensionMismatch("dataset has " + std::to_string(data.cols) + " columns, layer expects " +
                                std::to_string(refiner.dimension()));
    }
    BatchResult out;
    out.refined = data;
    out.provenance.resize(data.rows);
    if (options.jacobian) out.jacobians.resize(data.rows);
    std::vector<std::exception_ptr> errors(data.rows);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            try {
                RefineResult res = refiner.refine(data.row(r), options.jacobian);
                std::copy(res.refined.begin(), res.refined.end(), out.refined.row(r).begin());
                out.provenance[r] = std::move(res.provenance);
                if (options.jacobian) out.jacobians[r] = std::move(res.jacobian);
            } catch (const Error&) {
                errors[r] = std::current_exception();
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallelism, data.rows));
    if (workers == 1) {
        work(0, data.rows);
    } else {
        std::vector<std::thread> threads;
        const std::size_t chunk = (data.rows + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(data.rows, begin + chunk);
            if (begin < end) threads.emplace_back(work, begin, end);
        }
        for (auto& t : threads) t.join();
    }

    for (std::size_t r = 0; r < data.rows; ++r) {
        if (!errors[r]) continue;
        if (!options.skip_errors) {
            try {
                std::rethrow_exception(errors[r]);
            } catch (const NumericFailure& e) {
                throw NumericFailure("row " + std::to_string(r) + ": " + e.what(), e.position());
            } catch (const InvalidSample& e) {
                throw InvalidSample("row " + std::to_string(r) + ": " + e.what());
            } catch (const Error& e) {
                throw Error("row " + std::to_string(r) + ": " + e.what());
            }
        }
        try {
            std::rethrow_exception(errors[r]);
        } catch (const Error& e) {
            out.failures.push_back({r, e.what()});
        }
        out.provenance[r].assign(data.cols, Provenance{});
    }

    for (std::size_t r = 0; r < data.rows; ++r) {
        bool changed = false;
        for (std::size_t c = 0; c < data.cols; ++c) {
            if (std::bit_cast<std::uint64_t>(data.row(r)[c]) != std::bit_cast<std::uint64_t>(out.refined.row(r)[c])) {
                ++out.changed_values;
                changed = true;
            }
        }
        if (changed) ++out.changed_rows;
    }
    return out;
}

}  // namespace drl
