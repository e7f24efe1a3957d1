#include "mraloha/analytic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mraloha/errors.hpp"

namespace mraloha {

namespace {

bool in_unit_interval(double v)
{
    return v >= 0.0 && v <= 1.0;
}

void validate_bound_args(double g, int k, double eps_u)
{
    SystemParams{g, k, eps_u, 0.0, 1.0}.validate();
}

// Walks P(N = n) for n = 0, 1, ... and stops once n > g and the pmf itself
// (an upper bound on every summand used here) drops below tol.
template <typename Summand>
ThroughputResult poisson_sum(double g, const SeriesTruncation& trunc, Summand&& summand)
{
    trunc.validate();
    const std::int64_t cap = poisson_cap(trunc, g);
    const bool recurrence = g < 700.0;

    double sum = 0.0;
    double pmf = std::exp(-g);
    for (std::int64_t n = 0; n <= cap; ++n) {
        if (n > 0)
            pmf = recurrence ? pmf * g / static_cast<double>(n) : poisson_pmf(n, g);
        sum += pmf * summand(n);
        if (static_cast<double>(n) > g && pmf < trunc.tol) {
            // Poisson tail past n: pmf(n+1) / (1 - g/(n+2)) bounds sum_{j>n} pmf(j).
            const double next = pmf * g / static_cast<double>(n + 1);
            const double tail = next / (1.0 - g / static_cast<double>(n + 2));
            return {sum, ThroughputMethod::series, n + 1, tail};
        }
    }
    throw NonConvergenceError("Poisson series did not converge within " + std::to_string(cap)
                              + " terms at G=" + std::to_string(g));
}

void require_closed_form_valid(int k, double eps_u)
{
    if (eps_u <= kEpsFloor)
        throw SingularityError("closed form is singular for eps_u <= " + std::to_string(kEpsFloor)
                               + "; use the series form");
    if (k > kClosedMaxK)
        throw StabilityError("closed form is not certified for K > " + std::to_string(kClosedMaxK)
                             + "; use the series form");
}

} // namespace

void SystemParams::validate() const
{
    if (!std::isfinite(g) || g < 0.0)
        throw DomainError("channel load G must be finite and non-negative");
    if (k < 1)
        throw DomainError("relay count K must be at least 1");
    if (!in_unit_interval(eps_u))
        throw DomainError("eps_u must lie in [0,1]");
    if (!in_unit_interval(eps_d))
        throw DomainError("eps_d must lie in [0,1]");
    if (!in_unit_interval(delta))
        throw DomainError("delta must lie in [0,1]");
}

std::string_view to_string(ThroughputMethod m)
{
    switch (m) {
    case ThroughputMethod::series: return "series";
    case ThroughputMethod::closed_form: return "closed_form";
    case ThroughputMethod::simulated: return "simulated";
    }
    return "unknown";
}

double p_decode_uplink(std::int64_t n, double eps_u)
{
    if (n <= 0)
        return 0.0;
    return static_cast<double>(n) * (1.0 - eps_u) * std::pow(eps_u, static_cast<double>(n - 1));
}

double q_success_downlink_arrival(std::int64_t n, const SystemParams& params)
{
    return p_decode_uplink(n, params.eps_u) * params.delta * (1.0 - params.eps_d);
}

ThroughputResult throughput_sa(double g, double eps_u)
{
    validate_bound_args(g, 1, eps_u);
    const double load = g * (1.0 - eps_u);
    return {load * std::exp(-load), ThroughputMethod::closed_form, 1, 0.0};
}

ThroughputResult throughput_series(const SystemParams& params, const SeriesTruncation& trunc)
{
    params.validate();
    const double k = params.k;
    return poisson_sum(params.g, trunc, [&](std::int64_t n) {
        const double q = q_success_downlink_arrival(n, params);
        return k * q * std::pow(1.0 - q, k - 1.0);
    });
}

ThroughputResult throughput_closed(const SystemParams& params, const HCache& cache)
{
    params.validate();
    require_closed_form_valid(params.k, params.eps_u);

    const double eps = params.eps_u;
    const double ratio = params.delta * (1.0 - eps) * (1.0 - params.eps_d) / eps;
    const int k = params.k;

    double sum = 0.0;
    double eps_pow = 1.0;
    double ratio_pow = 1.0;
    for (int l = 0; l < k; ++l) {
        const int m = l + 1;
        eps_pow *= eps;
        ratio_pow *= ratio;
        const double x = params.g * eps_pow;
        // e^{-G} H_m(x) = e^{x-G} T_m(x)
        const double term = k * binomial(k - 1, l) * ratio_pow * cache.scaled(m, x) * std::exp(x - params.g);
        sum += (l % 2 == 0) ? term : -term;
    }
    return {sum, ThroughputMethod::closed_form, k, 0.0};
}

ThroughputResult throughput(const SystemParams& params)
{
    params.validate();
    if (params.eps_u > kEpsFloor && params.k <= kClosedMaxK) {
        const HCache cache(params.k);
        return throughput_closed(params, cache);
    }
    return throughput_series(params);
}

ThroughputResult bound_closed(double g, int k, double eps_u, const HCache& cache)
{
    validate_bound_args(g, k, eps_u);
    require_closed_form_valid(k, eps_u);

    // The l = 0 term is e^{-G} H_0(G) = 1 and cancels the leading 1 exactly.
    const double ratio = (1.0 - eps_u) / eps_u;
    double sum = 0.0;
    double eps_pow = 1.0;
    double ratio_pow = 1.0;
    for (int l = 1; l <= k; ++l) {
        eps_pow *= eps_u;
        ratio_pow *= ratio;
        const double x = g * eps_pow;
        const double term = binomial(k, l) * ratio_pow * cache.scaled(l, x) * std::exp(x - g);
        sum += (l % 2 == 1) ? term : -term;
    }
    return {sum, ThroughputMethod::closed_form, k + 1, 0.0};
}

ThroughputResult bound_series(double g, int k, double eps_u, const SeriesTruncation& trunc)
{
    validate_bound_args(g, k, eps_u);
    const double dk = k;
    return poisson_sum(g, trunc, [&](std::int64_t n) {
        const double p = p_decode_uplink(n, eps_u);
        return -std::expm1(dk * std::log1p(-p));
    });
}

ThroughputResult bound(double g, int k, double eps_u)
{
    validate_bound_args(g, k, eps_u);
    if (eps_u > kEpsFloor && k <= kClosedMaxK) {
        const HCache cache(k);
        return bound_closed(g, k, eps_u, cache);
    }
    return bound_series(g, k, eps_u);
}

double peak_load(double eps_u)
{
    if (!(eps_u >= 0.0 && eps_u < 1.0))
        throw DomainError("peak load 1/(1-eps_u) requires eps_u in [0,1)");
    return 1.0 / (1.0 - eps_u);
}

double throughput_k2_at_peak_load(double eps_u, double eps_d, double delta)
{
    SystemParams{0.0, 2, eps_u, eps_d, delta}.validate();
    if (eps_u >= 1.0)
        throw DomainError("peak load is unbounded at eps_u = 1");
    const double a = delta * (1.0 - eps_d);
    const double c = (1.0 - eps_u + eps_u * eps_u) * std::exp(-eps_u);
    return 2.0 * a / std::numbers::e * (1.0 - a * c);
}

double delta_star_k2(double eps_u, double eps_d)
{
    SystemParams{0.0, 2, eps_u, eps_d, 1.0}.validate();
    if (eps_d >= 1.0)
        throw DomainError("optimal delta is undefined at eps_d = 1 (throughput is identically zero)");
    const double interior = std::exp(eps_u) / (2.0 * (1.0 - eps_d) * (1.0 - eps_u + eps_u * eps_u));
    return std::min(1.0, interior);
}

double s_star_k2(double eps_u, double eps_d)
{
    const double delta = delta_star_k2(eps_u, eps_d);
    const double poly = 1.0 - eps_u + eps_u * eps_u;
    if (delta < 1.0)
        return std::exp(-1.0 + eps_u) / (2.0 * poly);
    const double a = 1.0 - eps_d;
    return 2.0 * a / std::numbers::e * (1.0 - a * poly * std::exp(-eps_u));
}

} // namespace mraloha
