#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace strainsplit {

/// Optimizer gave up. Carries the best iterate found so far.
class EstimationError : public std::runtime_error {
public:
    EstimationError(const std::string& what, std::vector<double> best, double best_value)
        : std::runtime_error(what), best_(std::move(best)), best_value_(best_value) {}

    const std::vector<double>& best_iterate() const { return best_; }
    double best_value() const { return best_value_; }

private:
    std::vector<double> best_;
    double best_value_;
};

struct OptimizerOptions {
    double tolerance = 1e-8;  ///< absolute step length on the parameters
    int max_iterations = 500;
};

template <std::size_t N>
struct Evaluation {
    double value = 0.0;
    std::array<double, N> gradient{};
    std::array<std::array<double, N>, N> hessian{};
};

template <std::size_t N>
struct BoxResult {
    std::array<double, N> x{};
    double value = 0.0;
    int iterations = 0;
};

namespace detail {

/// Solves H d = -g on the free coordinates when H restricted to them is
/// negative definite. Returns false otherwise.
template <std::size_t N>
bool newton_direction(const Evaluation<N>& e, const std::array<bool, N>& free, std::array<double, N>& d) {
    std::array<std::size_t, N> idx{};
    std::size_t n = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (free[i]) idx[n++] = i;
    }
    d.fill(0.0);
    if (n == 0) return true;
    // Gaussian elimination on -H (positive definite when H is negative definite).
    std::array<std::array<double, N + 1>, N> m{};
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) m[r][c] = -e.hessian[idx[r]][idx[c]];
        m[r][n] = e.gradient[idx[r]];
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!(m[k][k] > 0.0) || !std::isfinite(m[k][k])) return false;
        for (std::size_t r = k + 1; r < n; ++r) {
            const double f = m[r][k] / m[k][k];
            for (std::size_t c = k; c <= n; ++c) m[r][c] -= f * m[k][c];
        }
    }
    std::array<double, N> sol{};
    for (std::size_t k = n; k-- > 0;) {
        double s = m[k][n];
        for (std::size_t c = k + 1; c < n; ++c) s -= m[k][c] * sol[c];
        sol[k] = s / m[k][k];
    }
    for (std::size_t r = 0; r < n; ++r) d[idx[r]] = sol[r];
    return true;
}

}  // namespace detail

/// Maximizes f over the box [lower, upper] with a projected Newton method:
/// coordinates pinned at a bound with the gradient pointing outward are held
/// fixed, the rest take a Newton step (or a scaled gradient step when the
/// Hessian is not negative definite there), followed by an Armijo backtracking
/// search along the projected path. f(x) returns an Evaluation<N>.
template <std::size_t N, typename F>
BoxResult<N> maximize_in_box(F&& f, std::array<double, N> x, const std::array<double, N>& lower,
                             const std::array<double, N>& upper, const OptimizerOptions& options = {}) {
    auto project = [&](std::array<double, N> p) {
        for (std::size_t i = 0; i < N; ++i) p[i] = std::clamp(p[i], lower[i], upper[i]);
        return p;
    };
    x = project(x);
    Evaluation<N> current = f(x);
    if (!std::isfinite(current.value)) throw std::domain_error("objective is not finite at the starting point");

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        std::array<bool, N> free{};
        bool any_free = false;
        for (std::size_t i = 0; i < N; ++i) {
            const double span = upper[i] - lower[i];
            const bool at_lower = x[i] <= lower[i] + 1e-14 * span && current.gradient[i] <= 0.0;
            const bool at_upper = x[i] >= upper[i] - 1e-14 * span && current.gradient[i] >= 0.0;
            free[i] = !(at_lower || at_upper);
            any_free = any_free || free[i];
        }
        if (!any_free) return {x, current.value, iter};

        std::array<double, N> direction{};
        if (!detail::newton_direction(current, free, direction)) {
            for (std::size_t i = 0; i < N; ++i) {
                if (!free[i]) continue;
                const double curvature = std::abs(current.hessian[i][i]);
                direction[i] = current.gradient[i] / (curvature > 0.0 ? curvature : 1.0);
            }
        }

        double step = 1.0;
        bool accepted = false;
        std::array<double, N> trial{};
        Evaluation<N> next;
        for (int halving = 0; halving < 80; ++halving, step *= 0.5) {
            for (std::size_t i = 0; i < N; ++i) trial[i] = x[i] + step * direction[i];
            trial = project(trial);
            double ascent = 0.0;
            for (std::size_t i = 0; i < N; ++i) ascent += current.gradient[i] * (trial[i] - x[i]);
            next = f(trial);
            if (std::isfinite(next.value) && next.value >= current.value + 1e-4 * ascent) {
                accepted = true;
                break;
            }
        }

        double moved = 0.0;
        if (accepted) {
            for (std::size_t i = 0; i < N; ++i) moved = std::max(moved, std::abs(trial[i] - x[i]));
            x = trial;
            current = next;
        }
        if (!accepted || moved < options.tolerance) return {x, current.value, iter};
    }
    throw EstimationError("optimizer did not converge within " + std::to_string(options.max_iterations) +
                              " iterations",
                          std::vector<double>(x.begin(), x.end()), current.value);
}

}  // namespace strainsplit
