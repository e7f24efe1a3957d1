#include "mraloha/math_kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <string>

#include "mraloha/errors.hpp"

namespace mraloha {

namespace {

constexpr std::int64_t kExactBinomialMax = 30;

void require_finite_nonnegative(double x, const char* what)
{
    if (!std::isfinite(x) || x < 0.0)
        throw DomainError(std::string(what) + " must be finite and non-negative");
}

// Pascal's triangle up to row 30; every entry fits a 64-bit integer exactly.
struct PascalTable {
    std::uint64_t c[kExactBinomialMax + 1][kExactBinomialMax + 1] = {};

    constexpr PascalTable()
    {
        for (int n = 0; n <= kExactBinomialMax; ++n) {
            c[n][0] = 1;
            for (int k = 1; k <= n; ++k)
                c[n][k] = c[n - 1][k - 1] + (k < n ? c[n - 1][k] : 0);
        }
    }
};

constexpr PascalTable kPascal{};

} // namespace

void SeriesTruncation::validate() const
{
    if (!(tol > 0.0))
        throw DomainError("truncation tolerance must be positive");
    if (n_max_hard < 0)
        throw DomainError("truncation hard cap must be positive");
}

std::int64_t default_poisson_cap(double g)
{
    const double cap = std::ceil(g + 12.0 * std::sqrt(g) + 50.0);
    return std::max<std::int64_t>(200, static_cast<std::int64_t>(cap));
}

std::int64_t poisson_cap(const SeriesTruncation& trunc, double g)
{
    return trunc.n_max_hard > 0 ? trunc.n_max_hard : default_poisson_cap(g);
}

HCache::HCache(int max_order) : max_order_(max_order)
{
    if (max_order < 0)
        throw DomainError("HCache max_order must be non-negative");
}

const std::vector<double>& HCache::row(double x) const
{
    const auto key = std::bit_cast<std::uint64_t>(x);
    {
        std::shared_lock lock(mutex_);
        if (auto it = rows_.find(key); it != rows_.end())
            return it->second;
    }

    // The recursion is linear in H, so running it from T_0 = 1 yields
    // T_m = H_m e^{-x} without ever forming e^x.
    std::vector<double> t(static_cast<std::size_t>(max_order_) + 1);
    t[0] = 1.0;
    for (int m = 1; m <= max_order_; ++m) {
        double acc = 0.0;
        for (int l = 0; l < m; ++l)
            acc += binomial(m - 1, l) * t[static_cast<std::size_t>(l)];
        t[static_cast<std::size_t>(m)] = x * acc;
    }

    std::unique_lock lock(mutex_);
    return rows_.try_emplace(key, std::move(t)).first->second;
}

double HCache::scaled(int m, double x) const
{
    if (m < 0)
        throw DomainError("H order must be non-negative");
    if (m > max_order_)
        throw OrderExceedsCacheError("H order " + std::to_string(m) + " exceeds cache max_order "
                                     + std::to_string(max_order_));
    require_finite_nonnegative(x, "H argument");
    return row(x)[static_cast<std::size_t>(m)];
}

double HCache::value(int m, double x) const
{
    const double t = scaled(m, x);
    return m == 0 ? std::exp(x) : t * std::exp(x);
}

std::size_t HCache::size() const
{
    std::shared_lock lock(mutex_);
    return rows_.size();
}

double ancillary_h(int m, double x, const HCache& cache)
{
    return cache.value(m, x);
}

double ancillary_h_oracle(int m, double x, const SeriesTruncation& trunc)
{
    if (m < 0)
        throw DomainError("H order must be non-negative");
    require_finite_nonnegative(x, "H argument");
    trunc.validate();

    if (x == 0.0)
        return m == 0 ? 1.0 : 0.0;

    // Terms x^n n^m / n! rise until roughly n = x + m, then decay
    // super-geometrically; stop once past the peak and below tolerance.
    const std::int64_t cap = poisson_cap(trunc, x + m);
    double sum = 0.0;
    double prev = 0.0;
    for (std::int64_t n = 0; n <= cap; ++n) {
        double term;
        if (n == 0) {
            term = m == 0 ? 1.0 : 0.0;
        } else {
            const double dn = static_cast<double>(n);
            term = std::exp(dn * std::log(x) + m * std::log(dn) - std::lgamma(dn + 1.0));
        }
        sum += term;
        if (n > 0 && term <= prev && term < trunc.tol * std::max(1.0, sum))
            return sum;
        prev = term;
    }
    throw NonConvergenceError("H oracle did not converge within " + std::to_string(cap) + " terms");
}

double poisson_pmf(std::int64_t n, double g)
{
    if (!(g >= 0.0) || !std::isfinite(g))
        throw DomainError("Poisson intensity must be finite and non-negative");
    if (n < 0)
        return 0.0;
    if (g == 0.0)
        return n == 0 ? 1.0 : 0.0;
    if (n <= 20 && g < 700.0) {
        double p = std::exp(-g);
        for (std::int64_t i = 1; i <= n; ++i)
            p *= g / static_cast<double>(i);
        return p;
    }
    const double dn = static_cast<double>(n);
    return std::exp(dn * std::log(g) - g - std::lgamma(dn + 1.0));
}

double log_binomial(std::int64_t n, std::int64_t k)
{
    if (n < 0 || k < 0 || k > n)
        throw DomainError("log_binomial requires 0 <= k <= n");
    if (n <= kExactBinomialMax)
        return std::log(static_cast<double>(kPascal.c[n][k]));
    const double dn = static_cast<double>(n);
    const double dk = static_cast<double>(k);
    return std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0);
}

double binomial(std::int64_t n, std::int64_t k)
{
    if (n < 0 || k < 0 || k > n)
        throw DomainError("binomial requires 0 <= k <= n");
    if (n <= kExactBinomialMax)
        return static_cast<double>(kPascal.c[n][k]);
    const std::int64_t j = std::min(k, n - k);
    double c = 1.0;
    for (std::int64_t i = 1; i <= j; ++i)
        c = c * static_cast<double>(n - j + i) / static_cast<double>(i);
    return c;
}

} // namespace mraloha
