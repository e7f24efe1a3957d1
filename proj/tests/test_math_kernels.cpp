#include <doctest.h>

#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mraloha/errors.hpp"
#include "mraloha/math_kernels.hpp"

using namespace mraloha;

namespace {

// Stirling numbers of the second kind, S(m, j) = j S(m-1, j) + S(m-1, j-1).
std::vector<std::vector<long long>> stirling2(int max_m)
{
    std::vector<std::vector<long long>> s(max_m + 1, std::vector<long long>(max_m + 1, 0));
    s[0][0] = 1;
    for (int m = 1; m <= max_m; ++m)
        for (int j = 1; j <= m; ++j)
            s[m][j] = j * s[m - 1][j] + s[m - 1][j - 1];
    return s;
}

// Coefficients of the degree-deg polynomial through (i, y[i]), i = 0..deg,
// via Newton divided differences expanded to the monomial basis.
std::vector<double> interpolate_monomial(const std::vector<double>& y)
{
    const int n = static_cast<int>(y.size());
    std::vector<long double> dd(y.begin(), y.end());
    for (int level = 1; level < n; ++level)
        for (int i = n - 1; i >= level; --i)
            dd[i] = (dd[i] - dd[i - 1]) / level;
    std::vector<long double> coef(n, 0.0L);
    for (int i = n - 1; i >= 0; --i) {
        // coef = coef * (x - i) + dd[i]
        std::vector<long double> next(n, 0.0L);
        for (int j = 0; j < n; ++j) {
            if (j + 1 < n)
                next[j + 1] += coef[j];
            next[j] -= coef[j] * i;
        }
        next[0] += dd[i];
        coef = next;
    }
    return {coef.begin(), coef.end()};
}

} // namespace

TEST_CASE("ancillary_h worked values")
{
    const HCache cache(12);
    CHECK(ancillary_h(0, 1.0, cache) == doctest::Approx(std::numbers::e).epsilon(1e-15));
    CHECK(ancillary_h(1, 0.0, cache) == 0.0);

    const double oracle = ancillary_h_oracle(2, 0.5);
    CHECK(oracle == doctest::Approx(0.75 * std::exp(0.5)).epsilon(1e-13));
    CHECK(ancillary_h(2, 0.5, cache) == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("ancillary_h_oracle worked values")
{
    CHECK(ancillary_h_oracle(0, 2.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
    CHECK(ancillary_h_oracle(1, 1.0) == doctest::Approx(std::numbers::e).epsilon(1e-14));

    // Touchard: T_3(x) = x + 3x^2 + x^3.
    const double x = 0.3;
    const double h3 = ancillary_h_oracle(3, x);
    CHECK(h3 == doctest::Approx((x + 3 * x * x + x * x * x) * std::exp(x)).epsilon(1e-13));
    const HCache cache(3);
    CHECK(ancillary_h(3, x, cache) == doctest::Approx(h3).epsilon(1e-13));
}

TEST_CASE("recursion agrees with the direct series on the full grid")
{
    const HCache cache(12);
    double worst = 0.0;
    for (int m = 0; m <= 12; ++m) {
        for (double x : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
            const double oracle = ancillary_h_oracle(m, x);
            const double rel = std::abs(ancillary_h(m, x, cache) - oracle) / std::max(1.0, std::abs(oracle));
            worst = std::max(worst, rel);
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("H_1 and H_2 closed forms")
{
    const HCache cache(2);
    for (double x : {0.01, 0.3, 1.0, 3.7, 9.0}) {
        CHECK(ancillary_h(1, x, cache) == doctest::Approx(x * std::exp(x)).epsilon(1e-14));
        CHECK(ancillary_h(2, x, cache) == doctest::Approx((x + x * x) * std::exp(x)).epsilon(1e-14));
    }
}

TEST_CASE("H_m is strictly increasing in x")
{
    const HCache cache(8);
    for (int m = 0; m <= 8; ++m) {
        double prev = ancillary_h(m, 0.01, cache);
        for (int i = 2; i <= 100; ++i) {
            const double cur = ancillary_h(m, 0.01 * i, cache);
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("H_m e^-x is a polynomial with Stirling-number coefficients")
{
    const auto s = stirling2(6);
    const HCache cache(6);
    for (int m = 0; m <= 6; ++m) {
        std::vector<double> y;
        for (int i = 0; i <= m; ++i)
            y.push_back(cache.scaled(m, static_cast<double>(i)));
        const auto coef = interpolate_monomial(y);
        for (int j = 0; j <= m; ++j) {
            CHECK(std::abs(coef[j] - std::round(coef[j])) < 1e-6);
            CHECK(std::llround(coef[j]) == s[m][j]);
        }
    }
}

TEST_CASE("HCache")
{
    SUBCASE("order 0 entries are exp(x)")
    {
        const HCache cache(4);
        for (double x : {0.0, 0.5, 3.0, 20.0})
            CHECK(ancillary_h(0, x, cache) == std::exp(x));
    }
    SUBCASE("repeated and concurrent lookups are identical")
    {
        const HCache cache(10);
        const double first = cache.value(7, 1.25);
        std::vector<double> seen(8);
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < seen.size(); ++i)
            threads.emplace_back([&, i] { seen[i] = cache.value(7, 1.25); });
        for (auto& t : threads)
            t.join();
        for (double v : seen)
            CHECK(v == first);
        CHECK(cache.size() == 1);
    }
    SUBCASE("errors")
    {
        const HCache cache(3);
        CHECK_THROWS_AS(cache.value(4, 1.0), OrderExceedsCacheError);
        CHECK_THROWS_AS(cache.value(1, -0.5), DomainError);
        CHECK_THROWS_AS(cache.value(1, std::nan("")), DomainError);
        CHECK_THROWS_AS(cache.value(1, INFINITY), DomainError);
        CHECK_THROWS_AS(HCache(-1), DomainError);
    }
}

TEST_CASE("ancillary_h_oracle errors")
{
    CHECK_THROWS_AS(ancillary_h_oracle(2, -1.0), DomainError);
    CHECK_THROWS_AS(ancillary_h_oracle(2, 50.0, SeriesTruncation{1e-14, 5}), NonConvergenceError);
    CHECK_THROWS_AS(ancillary_h_oracle(2, 1.0, SeriesTruncation{0.0, 0}), DomainError);
}

TEST_CASE("poisson_pmf")
{
    CHECK(poisson_pmf(0, 0.0) == 1.0);
    CHECK(poisson_pmf(3, 0.0) == 0.0);
    CHECK(poisson_pmf(1, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

    double by_recurrence = std::exp(-5.0);
    for (int n = 1; n <= 20; ++n)
        by_recurrence *= 5.0 / n;
    CHECK(poisson_pmf(20, 5.0) == doctest::Approx(by_recurrence).epsilon(1e-13));

    // Far tail through the log-domain path, against a long-double recurrence.
    long double p = std::exp(-30.0L);
    for (int n = 1; n <= 80; ++n)
        p *= 30.0L / n;
    CHECK(poisson_pmf(80, 30.0) == doctest::Approx(static_cast<double>(p)).epsilon(1e-12));
    CHECK(std::isfinite(poisson_pmf(2000, 1500.0)));

    CHECK_THROWS_AS(poisson_pmf(1, -0.1), DomainError);
}

TEST_CASE("Poisson mass sums to one under the default truncation rule")
{
    const SeriesTruncation trunc;
    for (double g : {0.5, 1.0, 5.0, 20.0}) {
        long double sum = 0.0L;
        const auto cap = poisson_cap(trunc, g);
        for (std::int64_t n = 0; n <= cap; ++n) {
            const double p = poisson_pmf(n, g);
            sum += p;
            if (n > g && p < trunc.tol)
                break;
        }
        CHECK(std::abs(static_cast<double>(sum) - 1.0) < 1e-13);
    }
}

TEST_CASE("default Poisson cap")
{
    CHECK(default_poisson_cap(0.0) == 200);
    CHECK(default_poisson_cap(1.0) == 200);
    CHECK(default_poisson_cap(400.0) == 690);
}

TEST_CASE("binomials")
{
    CHECK(log_binomial(5, 0) == 0.0);
    CHECK(log_binomial(4, 2) == doctest::Approx(std::log(6.0)).epsilon(1e-15));
    CHECK(binomial(30, 15) == 155117520.0);
    CHECK(binomial(7, 3) == 35.0);

    using boost::multiprecision::cpp_int;
    cpp_int exact = 1;
    for (int i = 1; i <= 30; ++i)
        exact = exact * (30 + i) / i;
    const double ln_exact = std::log(exact.convert_to<double>());
    CHECK(log_binomial(60, 30) == doctest::Approx(ln_exact).epsilon(1e-14));
    CHECK(binomial(60, 30) == doctest::Approx(exact.convert_to<double>()).epsilon(1e-14));

    CHECK_THROWS_AS(log_binomial(3, 4), DomainError);
    CHECK_THROWS_AS(binomial(-1, 0), DomainError);
}
