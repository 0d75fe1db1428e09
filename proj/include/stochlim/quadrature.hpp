// quadrature.hpp: globally adaptive 21-point Gauss-Kronrod integration over
// user breakpoints, for real or complex batch integrands.
//
// Integrands are evaluated a panel at a time: f(nodes, values) receives the 21
// abscissae of one panel and fills the matching values, which lets callers
// hand whole panels to the SIMD kernels.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "stochlim/errors.hpp"
#include "stochlim/model.hpp"

namespace stochlim::quad {

inline constexpr std::size_t kNodes = 21;

struct GaussKronrod21 {
    std::array<double, kNodes> nodes;    // ascending on [-1, 1]
    std::array<double, kNodes> kronrod;  // Kronrod weights
    std::array<double, kNodes> gauss;    // embedded 10-point Gauss weights, 0 on Kronrod-only nodes
};

const GaussKronrod21& gauss_kronrod21();

struct Controls {
    double rel_tol{1e-8};
    double abs_tol{1e-12};
    int max_subdivisions{4000};

    static Controls from(const QuadratureSpec& spec) {
        return Controls{spec.rel_tol, spec.abs_tol, spec.max_subdivisions};
    }
};

template <class T>
struct PanelEstimate {
    double lo{0.0};
    double hi{0.0};
    T value{};
    double error{0.0};
    double roundoff{0.0};  // part of `error` that bisection cannot reduce

    double excess() const noexcept { return error - roundoff; }
};

template <class T>
struct Result {
    T value{};
    double error{0.0};
    int panels{0};
    int evaluations{0};
    bool converged{true};
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

inline std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace detail

// One Gauss-Kronrod panel with the QUADPACK error heuristic.
template <class T, class BatchFn>
PanelEstimate<T> gk21_panel(BatchFn& f, double lo, double hi) {
    const auto& rule = gauss_kronrod21();
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    std::array<double, kNodes> x;
    std::array<T, kNodes> y;
    for (std::size_t i = 0; i < kNodes; ++i) x[i] = center + half * rule.nodes[i];
    f(std::span<const double>(x), std::span<T>(y));

    T kronrod{}, gauss{};
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < kNodes; ++i) {
        kronrod += rule.kronrod[i] * y[i];
        gauss += rule.gauss[i] * y[i];
        abs_sum += rule.kronrod[i] * detail::magnitude(y[i]);
    }
    const T mean = 0.5 * kronrod;
    double asc = 0.0;
    for (std::size_t i = 0; i < kNodes; ++i) asc += rule.kronrod[i] * detail::magnitude(y[i] - mean);

    kronrod *= half;
    gauss *= half;
    abs_sum *= std::abs(half);
    asc *= std::abs(half);

    double err = detail::magnitude(kronrod - gauss);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    double roundoff = 0.0;
    if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps)) {
        roundoff = 50.0 * eps * abs_sum;
        err = std::max(err, roundoff);
    }
    return PanelEstimate<T>{lo, hi, kronrod, err, std::min(err, roundoff)};
}

// Adaptive bisection of the worst panel until the summed error estimate,
// less its roundoff floor, drops below max(abs_tol, rel_tol * |value|). `breakpoints` must be ascending and
// hold at least two entries; integration runs from the first to the last.
template <class T, class BatchFn>
Result<T> integrate(BatchFn&& f, std::span<const double> breakpoints, const Controls& controls,
                    bool throw_on_failure = true) {
    Result<T> result;
    if (breakpoints.size() < 2) return result;

    using Panel = PanelEstimate<T>;
    auto worse = [](const Panel& a, const Panel& b) { return a.excess() < b.excess(); };
    std::vector<Panel> heap;    // max-heap on excess error
    std::vector<Panel> frozen;  // panels too narrow to split further

    T total{};
    double total_err = 0.0;  // reducible part only, running
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i + 1] > breakpoints[i])) continue;
        Panel p = gk21_panel<T>(f, breakpoints[i], breakpoints[i + 1]);
        result.evaluations += static_cast<int>(kNodes);
        total += p.value;
        total_err += p.excess();
        heap.push_back(p);
    }
    std::make_heap(heap.begin(), heap.end(), worse);
    int panels = static_cast<int>(heap.size());

    // exact resummation; the running totals drift once errors span many decades
    auto resum = [&] {
        T sum{};
        double err = 0.0, excess = 0.0;
        for (const auto* group : {&frozen, &heap})
            for (const Panel& p : *group) {
                sum += p.value;
                err += p.error;
                excess += p.excess();
            }
        total = sum;
        total_err = excess;
        return err;
    };
    auto tolerance = [&] { return std::max(controls.abs_tol, controls.rel_tol * detail::magnitude(total)); };
    while (!heap.empty() && panels < controls.max_subdivisions) {
        if (total_err <= tolerance()) {
            resum();
            if (total_err <= tolerance()) break;
        }
        std::pop_heap(heap.begin(), heap.end(), worse);
        Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.lo + worst.hi);
        const double width_floor = 64.0 * std::numeric_limits<double>::epsilon() *
                                   std::max(std::abs(worst.lo), std::abs(worst.hi));
        if (!(mid > worst.lo && mid < worst.hi) || (worst.hi - worst.lo) < width_floor) {
            frozen.push_back(worst);
            continue;
        }
        Panel left = gk21_panel<T>(f, worst.lo, mid);
        Panel right = gk21_panel<T>(f, mid, worst.hi);
        result.evaluations += static_cast<int>(2 * kNodes);
        total += left.value + right.value - worst.value;
        total_err += left.excess() + right.excess() - worst.excess();
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), worse);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), worse);
        ++panels;
    }

    const double err = resum();
    const T sum = total;
    const double excess = total_err;
    result.value = sum;
    result.error = err;
    result.panels = panels;
    result.converged = excess <= std::max(controls.abs_tol, controls.rel_tol * detail::magnitude(sum));
    if (!result.converged && throw_on_failure) {
        throw NonConvergenceError("adaptive quadrature did not reach tolerance (error estimate " +
                                      detail::fmt_sci(err) + " after " + std::to_string(panels) + " panels)",
                                  err, detail::magnitude(sum));
    }
    return result;
}

// Adapts a pointwise integrand x -> T into a panel integrand.
template <class T, class Fn>
auto pointwise(Fn fn) {
    return [fn = std::move(fn)](std::span<const double> x, std::span<T> y) mutable {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = fn(x[i]);
    };
}

}  // namespace stochlim::quad
