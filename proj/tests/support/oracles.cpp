#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace drl::testing {

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Rational uniform_rational(Rng& rng, int lo, int hi, int max_den) {
    const int den = uniform_int(rng, 1, max_den);
    Rational r(uniform_int(rng, lo * den, hi * den), den);
    r.canonicalize();
    return r;
}

Inequality random_inequality(Rng& rng, const SetShape& shape) {
    const std::size_t d = shape.dimension;
    std::vector<std::size_t> vars(d);
    std::iota(vars.begin(), vars.end(), std::size_t{0});
    std::shuffle(vars.begin(), vars.end(), rng);
    const auto k = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<int>(std::min(d, shape.max_vars_per_disjunct))));
    LinearExpr e{Rational(uniform_int(rng, -shape.max_bias, shape.max_bias))};
    for (std::size_t j = 0; j < k; ++j) {
        int c = 0;
        while (c == 0) c = uniform_int(rng, -shape.max_coeff, shape.max_coeff);
        e += LinearExpr::variable(vars[j], c);
    }
    return Inequality(e);
}

namespace {

std::optional<Constraint> random_constraint(Rng& rng, const SetShape& shape, const std::vector<Rational>* witness) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<int>(shape.max_disjuncts)));
    std::vector<Inequality> ds;
    for (std::size_t i = 0; i < n; ++i) ds.push_back(random_inequality(rng, shape));
    if (witness) {
        const bool ok = std::any_of(ds.begin(), ds.end(), [&](const Inequality& q) { return holds_exact(q, *witness); });
        if (!ok) {
            auto& q = ds[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(n) - 1))];
            q = Inequality(-q.expr());
        }
    }
    return Constraint::make(std::move(ds));
}

}  // namespace

ConstraintSet random_set(Rng& rng, const SetShape& shape) {
    ConstraintSet s(shape.dimension);
    const auto m = static_cast<std::size_t>(
        uniform_int(rng, static_cast<int>(shape.min_constraints), static_cast<int>(shape.max_constraints)));
    while (s.size() < m) {
        if (auto c = random_constraint(rng, shape, nullptr); c && !c->is_contradiction()) s.add(*c);
    }
    return s;
}

Planted random_planted_set(Rng& rng, const SetShape& shape) {
    Planted p{ConstraintSet(shape.dimension), {}};
    for (std::size_t j = 0; j < shape.dimension; ++j) p.witness.push_back(uniform_rational(rng, -10, 10));
    const auto m = static_cast<std::size_t>(
        uniform_int(rng, static_cast<int>(shape.min_constraints), static_cast<int>(shape.max_constraints)));
    while (p.pi.size() < m) {
        if (auto c = random_constraint(rng, shape, &p.witness)) p.pi.add(*c);
    }
    return p;
}

Rational evaluate_exact(const LinearExpr& e, std::span<const Rational> point) {
    Rational acc = e.bias();
    for (const auto& t : e.terms()) acc += t.coeff * point[t.var];
    return acc;
}

bool holds_exact(const Inequality& ineq, std::span<const Rational> point) {
    return sgn(evaluate_exact(ineq.expr(), point)) >= 0;
}

bool holds_exact(const Constraint& c, std::span<const Rational> point) {
    return std::any_of(c.disjuncts().begin(), c.disjuncts().end(),
                       [&](const Inequality& q) { return holds_exact(q, point); });
}

bool holds_exact(const ConstraintSet& s, std::span<const Rational> point) {
    return std::all_of(s.constraints().begin(), s.constraints().end(),
                       [&](const Constraint& c) { return holds_exact(c, point); });
}

Rational exact(double v) { return Rational(v); }

std::vector<Rational> exact(std::span<const double> v) {
    std::vector<Rational> out;
    for (double x : v) out.emplace_back(x);
    return out;
}

bool holds_approx(const ConstraintSet& s, std::span<const double> point, double tol) {
    for (const auto& c : s.constraints()) {
        bool any = false;
        for (const auto& q : c.disjuncts()) {
            double acc = q.expr().bias().get_d();
            for (const auto& t : q.expr().terms()) acc += t.coeff.get_d() * point[t.var];
            if (acc >= -tol) {
                any = true;
                break;
            }
        }
        if (!any) return false;
    }
    return true;
}

namespace {

// a . y + b = 0 over the free coordinates.
template <typename T>
struct Plane {
    std::vector<T> a;
    T b;
};

template <typename T>
T to_t(const Rational& r) {
    if constexpr (std::is_same_v<T, Rational>) return r;
    else return static_cast<T>(r.get_d());
}

template <typename T>
std::vector<Plane<T>> planes(const ConstraintSet& s, std::span<const std::size_t> free_vars,
                             std::span<const std::optional<T>> fixed, const T& radius) {
    const std::size_t k = free_vars.size();
    std::vector<Plane<T>> out;
    for (const auto& c : s.constraints()) {
        for (const auto& q : c.disjuncts()) {
            Plane<T> p{std::vector<T>(k, T(0)), to_t<T>(q.expr().bias())};
            bool nonzero = false;
            for (const auto& t : q.expr().terms()) {
                if (fixed[t.var]) {
                    p.b += to_t<T>(t.coeff) * *fixed[t.var];
                } else {
                    const auto j = static_cast<std::size_t>(
                        std::find(free_vars.begin(), free_vars.end(), t.var) - free_vars.begin());
                    p.a[j] = to_t<T>(t.coeff);
                    nonzero = true;
                }
            }
            if (nonzero) out.push_back(std::move(p));
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        for (int sign : {-1, 1}) {
            Plane<T> p{std::vector<T>(k, T(0)), T(sign) * radius};
            p.a[j] = T(1);
            out.push_back(std::move(p));
        }
    }
    return out;
}

// Solves the square system given by the chosen planes; nullopt if singular.
template <typename T>
std::optional<std::vector<T>> solve(const std::vector<const Plane<T>*>& rows) {
    const std::size_t k = rows.size();
    std::vector<std::vector<T>> m(k, std::vector<T>(k + 1));
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) m[r][c] = rows[r]->a[c];
        m[r][k] = -rows[r]->b;
    }
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col; r < k; ++r) {
            if constexpr (std::is_same_v<T, Rational>) {
                if (sgn(m[r][col]) != 0) {
                    piv = r;
                    break;
                }
            } else {
                if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
            }
        }
        if constexpr (std::is_same_v<T, Rational>) {
            if (sgn(m[piv][col]) == 0) return std::nullopt;
        } else {
            if (std::fabs(m[piv][col]) < 1e-12) return std::nullopt;
        }
        std::swap(m[piv], m[col]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const T f = m[r][col] / m[col][col];
            if constexpr (std::is_same_v<T, Rational>) {
                if (sgn(f) == 0) continue;
            }
            for (std::size_t c = col; c <= k; ++c) m[r][c] -= f * m[col][c];
        }
    }
    std::vector<T> y(k);
    for (std::size_t r = 0; r < k; ++r) y[r] = m[r][k] / m[r][r];
    return y;
}

// Calls visit(vertex) for every vertex; stops when visit returns true.
template <typename T, typename Visit>
bool for_each_vertex(const std::vector<Plane<T>>& ps, std::size_t k, Visit&& visit) {
    if (k == 0) return visit(std::vector<T>{});
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t n = ps.size();
    if (n < k) return false;
    for (;;) {
        std::vector<const Plane<T>*> rows;
        for (std::size_t i : idx) rows.push_back(&ps[i]);
        if (auto y = solve(rows); y && visit(*y)) return true;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) return false;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

std::vector<std::size_t> free_of(std::size_t d, auto fixed) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < d; ++j)
        if (!fixed[j]) out.push_back(j);
    return out;
}

}  // namespace

std::optional<std::vector<double>> find_point(const ConstraintSet& s, std::span<const std::optional<double>> fixed,
                                              double radius, double tol) {
    const std::size_t d = s.dimension();
    const auto free_vars = free_of(d, fixed);
    std::vector<std::optional<long double>> fx(d);
    for (std::size_t j = 0; j < d; ++j)
        if (fixed[j]) fx[j] = *fixed[j];
    const auto ps = planes<long double>(s, free_vars, fx, radius);
    std::optional<std::vector<double>> found;
    for_each_vertex(ps, free_vars.size(), [&](const std::vector<long double>& y) {
        std::vector<double> point(d);
        for (std::size_t j = 0; j < d; ++j)
            if (fixed[j]) point[j] = *fixed[j];
        for (std::size_t j = 0; j < free_vars.size(); ++j) {
            if (std::fabs(y[j]) > radius * (1 + 1e-12)) return false;
            point[free_vars[j]] = static_cast<double>(y[j]);
        }
        if (!holds_approx(s, point, tol)) return false;
        found = std::move(point);
        return true;
    });
    return found;
}

std::optional<std::vector<Rational>> find_point_exact(const ConstraintSet& s, const Rational& radius) {
    const std::size_t d = s.dimension();
    std::vector<std::optional<Rational>> fx(d);
    const auto free_vars = free_of(d, fx);
    const auto ps = planes<Rational>(s, free_vars, fx, radius);
    std::optional<std::vector<Rational>> found;
    for_each_vertex(ps, d, [&](const std::vector<Rational>& y) {
        for (const auto& v : y)
            if (abs(v) > radius) return false;
        if (!holds_exact(s, y)) return false;
        found = y;
        return true;
    });
    return found;
}

std::vector<double> vertex_coordinates(const ConstraintSet& s, std::span<const std::optional<double>> fixed,
                                       std::size_t axis, double radius) {
    const std::size_t d = s.dimension();
    const auto free_vars = free_of(d, fixed);
    std::vector<std::optional<long double>> fx(d);
    for (std::size_t j = 0; j < d; ++j)
        if (fixed[j]) fx[j] = *fixed[j];
    const auto ps = planes<long double>(s, free_vars, fx, radius);
    const auto where = static_cast<std::size_t>(std::find(free_vars.begin(), free_vars.end(), axis) - free_vars.begin());
    std::vector<double> out;
    for_each_vertex(ps, free_vars.size(), [&](const std::vector<long double>& y) {
        if (std::fabs(y[where]) <= radius) out.push_back(static_cast<double>(y[where]));
        return false;
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool univariate_nonempty(const ConstraintSet& s, std::span<const std::optional<Rational>> fixed, std::size_t axis) {
    const std::size_t d = s.dimension();
    std::vector<Rational> candidates{Rational(0)};
    for (const auto& c : s.constraints()) {
        for (const auto& q : c.disjuncts()) {
            const Rational w = q.expr().coefficient(axis);
            if (sgn(w) == 0) continue;
            Rational rest = q.expr().bias();
            for (const auto& t : q.expr().terms())
                if (t.var != axis) rest += t.coeff * *fixed[t.var];
            candidates.push_back(-rest / w);
        }
    }
    const auto [lo, hi] = std::minmax_element(candidates.begin(), candidates.end());
    const Rational below = *lo - 1;
    const Rational above = *hi + 1;
    candidates.push_back(below);
    candidates.push_back(above);
    std::vector<Rational> point(d);
    for (std::size_t j = 0; j < d; ++j)
        if (fixed[j]) point[j] = *fixed[j];
    for (const auto& v : candidates) {
        point[axis] = v;
        if (holds_exact(s, point)) return true;
    }
    return false;
}

}  // namespace drl::testing
