#include "mraloha/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "mraloha/errors.hpp"

namespace mraloha {

namespace {

constexpr int kDeltaGridPoints = 101;
constexpr int kLoadGridHalf = 200;

void validate_arg_tol(double arg_tol)
{
    if (!(arg_tol > 0.0 && arg_tol <= 0.1))
        throw DomainError("arg_tol must lie in (0, 0.1]");
}

struct Probe {
    double arg;
    double value;
};

// Grid search, then golden-section refinement between the neighbours of the
// best grid point. The result is never worse than the best grid point.
Probe grid_then_golden(const std::vector<double>& grid, double arg_tol,
                       const std::function<double(double)>& f, std::int64_t& evaluations)
{
    auto eval = [&](double x) {
        ++evaluations;
        return f(x);
    };

    std::size_t best = 0;
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values[i] = eval(grid[i]);
        if (values[i] > values[best])
            best = i;
    }
    Probe incumbent{grid[best], values[best]};

    double lo = grid[best > 0 ? best - 1 : 0];
    double hi = grid[std::min(best + 1, grid.size() - 1)];
    if (hi - lo <= arg_tol)
        return incumbent;

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = eval(x1);
    double f2 = eval(x2);
    while (hi - lo > arg_tol) {
        if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2);
        }
    }
    const Probe refined = f1 >= f2 ? Probe{x1, f1} : Probe{x2, f2};
    return refined.value > incumbent.value ? refined : incumbent;
}

bool is_peak_load(double g, double eps_u)
{
    if (eps_u >= 1.0)
        return false;
    const double peak = 1.0 / (1.0 - eps_u);
    return std::abs(g - peak) <= 1e-12 * peak;
}

} // namespace

std::string_view to_string(OptimizationMethod m)
{
    switch (m) {
    case OptimizationMethod::closed_form_k2: return "closed_form_k2";
    case OptimizationMethod::grid_golden: return "grid_golden";
    case OptimizationMethod::exhaustive_k: return "exhaustive_k";
    }
    return "unknown";
}

double LoadRule::resolve(double eps_u) const
{
    return kind == Kind::fixed ? g : peak_load(eps_u);
}

OptimizationResult maximize_delta_numerically(double g, int k, double eps_u, double eps_d, double arg_tol)
{
    validate_arg_tol(arg_tol);
    SystemParams params{g, k, eps_u, eps_d, 1.0};
    params.validate();

    std::vector<double> grid(kDeltaGridPoints);
    for (int i = 0; i < kDeltaGridPoints; ++i)
        grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (kDeltaGridPoints - 1);

    std::int64_t evaluations = 0;
    const Probe best = grid_then_golden(grid, arg_tol, [&](double delta) {
        SystemParams p = params;
        p.delta = delta;
        return throughput(p).value;
    }, evaluations);

    OptimizationResult result;
    result.arg_star = best.arg;
    result.value_star = best.value;
    result.method = OptimizationMethod::grid_golden;
    result.evaluations = evaluations;
    result.arg_tol = arg_tol;
    return result;
}

OptimizationResult optimize_delta(double g, int k, double eps_u, double eps_d, double arg_tol)
{
    validate_arg_tol(arg_tol);
    SystemParams{g, k, eps_u, eps_d, 1.0}.validate();

    if (k == 2 && eps_d < 1.0 && is_peak_load(g, eps_u)) {
        OptimizationResult result;
        result.arg_star = delta_star_k2(eps_u, eps_d);
        result.value_star = throughput({g, k, eps_u, eps_d, result.arg_star}).value;
        result.method = OptimizationMethod::closed_form_k2;
        result.evaluations = 1;
        result.arg_tol = arg_tol;
        return result;
    }
    return maximize_delta_numerically(g, k, eps_u, eps_d, arg_tol);
}

OptimizationResult optimize_load(int k, double eps_u, double eps_d, double delta, double g_max, double arg_tol)
{
    validate_arg_tol(arg_tol);
    if (!(g_max > 0.0) || !std::isfinite(g_max))
        throw DomainError("g_max must be positive and finite");
    SystemParams params{g_max, k, eps_u, eps_d, delta};
    params.validate();

    std::vector<double> grid;
    grid.reserve(2 * kLoadGridHalf);
    const double log_lo = std::log(g_max * 1e-3);
    const double log_hi = std::log(g_max);
    for (int i = 0; i < kLoadGridHalf; ++i) {
        grid.push_back(std::exp(log_lo + (log_hi - log_lo) * i / (kLoadGridHalf - 1)));
        grid.push_back(g_max * (i + 1) / kLoadGridHalf);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    grid.back() = g_max;

    std::int64_t evaluations = 0;
    const Probe best = grid_then_golden(grid, arg_tol, [&](double g) {
        SystemParams p = params;
        p.g = g;
        return throughput(p).value;
    }, evaluations);

    OptimizationResult result;
    result.arg_star = best.arg;
    result.value_star = best.value;
    result.method = OptimizationMethod::grid_golden;
    result.evaluations = evaluations;
    result.arg_tol = arg_tol;
    return result;
}

OptimizationResult optimize_k(const LoadRule& rule, double eps_u, double eps_d, int k_max, double arg_tol)
{
    validate_arg_tol(arg_tol);
    if (k_max < 1)
        throw DomainError("k_max must be at least 1");
    const double g = rule.resolve(eps_u);

    OptimizationResult result;
    result.method = OptimizationMethod::exhaustive_k;
    result.arg_tol = arg_tol;
    result.per_k_value.reserve(static_cast<std::size_t>(k_max));
    result.per_k_delta.reserve(static_cast<std::size_t>(k_max));

    int best_k = 0;
    for (int k = 1; k <= k_max; ++k) {
        const OptimizationResult per_k = optimize_delta(g, k, eps_u, eps_d, arg_tol);
        result.evaluations += per_k.evaluations;
        result.per_k_value.push_back(per_k.value_star);
        result.per_k_delta.push_back(per_k.arg_star);
        if (best_k == 0 || per_k.value_star > result.value_star) {
            best_k = k;
            result.value_star = per_k.value_star;
        }
    }
    result.arg_star = best_k;
    return result;
}

} // namespace mraloha
