#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "mraloha/analytic.hpp"
#include "mraloha/errors.hpp"

using namespace mraloha;

namespace {

const double kE = std::numbers::e;

// Probability that exactly one of n packets survives, by enumerating all 2^n
// erasure patterns.
double enumerate_single_survivor(int n, double eps)
{
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        int survivors = 0;
        double p = 1.0;
        for (int i = 0; i < n; ++i) {
            const bool alive = (mask >> i) & 1u;
            survivors += alive;
            p *= alive ? 1.0 - eps : eps;
        }
        if (survivors == 1)
            total += p;
    }
    return total;
}

// Closed-form throughput and bound in 100-digit arithmetic with their own H recursion.
using Big = boost::multiprecision::cpp_bin_float_100;

std::vector<Big> big_h_row(int max_m, const Big& x)
{
    std::vector<Big> h(max_m + 1);
    h[0] = exp(x);
    for (int m = 1; m <= max_m; ++m) {
        Big acc = 0;
        Big c = 1; // C(m-1, l)
        for (int l = 0; l < m; ++l) {
            acc += c * h[l];
            c = c * (m - 1 - l) / (l + 1);
        }
        h[m] = x * acc;
    }
    return h;
}

double big_closed(const SystemParams& p)
{
    const Big eps = p.eps_u;
    const Big g = p.g;
    const Big ratio = Big(p.delta) * (1 - eps) * (1 - Big(p.eps_d)) / eps;
    Big sum = 0;
    Big c = 1; // C(K-1, l)
    for (int l = 0; l < p.k; ++l) {
        const int m = l + 1;
        const Big x = g * pow(eps, m);
        const Big term = p.k * c * pow(ratio, m) * exp(-g) * big_h_row(m, x)[m];
        sum += (l % 2 == 0) ? term : Big(-term);
        c = c * (p.k - 1 - l) / (l + 1);
    }
    return sum.convert_to<double>();
}

double big_bound(double g_in, int k, double eps_in)
{
    const Big eps = eps_in;
    const Big g = g_in;
    const Big ratio = (1 - eps) / eps;
    Big sum = 0;
    Big c = 1; // C(K, l)
    for (int l = 0; l <= k; ++l) {
        const Big x = g * pow(eps, l);
        const Big term = c * pow(ratio, l) * exp(-g) * big_h_row(l, x)[l];
        sum += (l % 2 == 0) ? term : Big(-term);
        c = c * (k - l) / (l + 1);
    }
    return (1 - sum).convert_to<double>();
}

struct GridPoint {
    SystemParams p;
};

std::vector<SystemParams> invariant_grid()
{
    std::vector<SystemParams> grid;
    for (double g : {0.25, 0.5, 1.0, 2.0, 4.0})
        for (int k = 1; k <= 8; ++k)
            for (double eu : {0.05, 0.3, 0.5, 0.9})
                for (double ed : {0.0, 0.3, 0.7})
                    for (double d : {0.1, 0.5, 1.0})
                        grid.push_back({g, k, eu, ed, d});
    return grid;
}

} // namespace

TEST_CASE("p_decode_uplink")
{
    CHECK(p_decode_uplink(1, 0.0) == 1.0);
    CHECK(p_decode_uplink(0, 0.4) == 0.0);
    CHECK(p_decode_uplink(0, 0.0) == 0.0);
    CHECK(p_decode_uplink(3, 0.5) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(p_decode_uplink(5, 1.0) == 0.0);
    CHECK(p_decode_uplink(2, 0.0) == 0.0);
    for (int n = 0; n <= 8; ++n)
        for (double eps : {0.0, 0.2, 0.5, 0.9, 1.0})
            CHECK(p_decode_uplink(n, eps) == doctest::Approx(enumerate_single_survivor(n, eps)).epsilon(1e-13));
}

TEST_CASE("q_success_downlink_arrival")
{
    CHECK(q_success_downlink_arrival(1, {1.0, 1, 0.0, 0.0, 1.0}) == 1.0);
    for (int n = 0; n < 6; ++n)
        CHECK(q_success_downlink_arrival(n, {1.0, 3, 0.4, 0.2, 0.0}) == 0.0);
    CHECK(q_success_downlink_arrival(2, {1.0, 1, 0.3, 0.2, 0.5}) == doctest::Approx(0.168).epsilon(1e-14));
}

TEST_CASE("throughput_sa")
{
    const auto r = throughput_sa(1.0, 0.0);
    CHECK(r.value == doctest::Approx(1.0 / kE).epsilon(1e-15));
    CHECK(r.method == ThroughputMethod::closed_form);
    CHECK(r.est_abs_error == 0.0);
    CHECK(throughput_sa(0.0, 0.3).value == 0.0);
    CHECK(throughput_sa(2.0, 0.5).value == doctest::Approx(1.0 / kE).epsilon(1e-15));
}

TEST_CASE("throughput_series")
{
    CHECK(throughput_series({2.0, 3, 0.4, 0.2, 0.0}).value == 0.0);

    for (double eps : {0.0, 0.2, 0.5, 0.8}) {
        const auto r = throughput_series({1.0 / (1.0 - eps), 1, eps, eps, 1.0});
        CHECK(r.value == doctest::Approx((1.0 - eps) / kE).epsilon(1e-13));
        CHECK(r.method == ThroughputMethod::series);
        CHECK(r.est_abs_error < 1e-14);
        CHECK(r.terms_used > 0);
    }

    CHECK_THROWS_AS(throughput_series({30.0, 2, 0.3, 0.3, 1.0}, SeriesTruncation{1e-14, 10}), NonConvergenceError);
}

TEST_CASE("throughput_closed")
{
    const HCache cache(kClosedMaxK);
    SUBCASE("K=1 reduces to the single-link formula")
    {
        for (double g : {0.3, 1.0, 2.5})
            for (double eu : {0.1, 0.5, 0.95})
                for (double ed : {0.0, 0.4})
                    for (double d : {0.2, 1.0}) {
                        const double expected = d * (1 - ed) * g * (1 - eu) * std::exp(-g * (1 - eu));
                        CHECK(throughput_closed({g, 1, eu, ed, d}, cache).value
                              == doctest::Approx(expected).epsilon(1e-13));
                    }
    }
    SUBCASE("K=2 at peak load matches the quadratic")
    {
        const double eps = 0.3;
        const double s = throughput_closed({peak_load(eps), 2, eps, eps, 1.0}, cache).value;
        CHECK(std::abs(s - throughput_k2_at_peak_load(eps, eps, 1.0)) < 1e-12);
    }
    SUBCASE("K=5 matches the series")
    {
        const SystemParams p{2.0, 5, 0.5, 0.1, 0.8};
        CHECK(std::abs(throughput_closed(p, cache).value - throughput_series(p).value) < 1e-10);
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(throughput_closed({1.0, 2, 0.0, 0.0, 1.0}, cache), SingularityError);
        CHECK_THROWS_AS(throughput_closed({1.0, 2, kEpsFloor, 0.0, 1.0}, cache), SingularityError);
        CHECK_THROWS_AS(throughput_closed({1.0, kClosedMaxK + 1, 0.5, 0.0, 1.0}, cache), StabilityError);
        const HCache small(2);
        CHECK_THROWS_AS(throughput_closed({1.0, 4, 0.5, 0.0, 1.0}, small), OrderExceedsCacheError);
        CHECK_THROWS_AS(throughput_closed({1.0, 2, 1.5, 0.0, 1.0}, cache), DomainError);
    }
}

TEST_CASE("throughput dispatch")
{
    const auto clean = throughput({1.0, 2, 0.0, 0.0, 1.0});
    CHECK(clean.method == ThroughputMethod::series);
    CHECK(clean.value == 0.0);

    CHECK(throughput({1.0, 3, 0.4, 0.1, 0.0}).value == 0.0);
    CHECK(throughput({1.0, 3, 0.4, 0.1, 1.0}).method == ThroughputMethod::closed_form);
    CHECK(throughput({1.0, 25, 0.4, 0.1, 1.0}).method == ThroughputMethod::series);

    // Across the switch-over both paths agree.
    for (int k : {2, 6, 20}) {
        const SystemParams p{1.5, k, 0.3, 0.2, 0.6};
        CHECK(std::abs(throughput(p).value - throughput_series(p).value) < 1e-9);
    }
    const SystemParams near_floor{1.0, 3, 2 * kEpsFloor, 0.1, 0.9};
    CHECK(std::abs(throughput(near_floor).value - throughput_series(near_floor).value) < 1e-9);

    CHECK_THROWS_AS(throughput({-1.0, 1, 0.0, 0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(throughput({1.0, 0, 0.0, 0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(throughput({1.0, 1, 0.0, 0.0, 1.01}), DomainError);
    CHECK_THROWS_AS(throughput({NAN, 1, 0.0, 0.0, 1.0}), DomainError);
}

TEST_CASE("bound")
{
    const HCache cache(kClosedMaxK);
    for (double g : {0.2, 1.0, 3.0})
        for (double eu : {0.1, 0.6})
            CHECK(bound_closed(g, 1, eu, cache).value == doctest::Approx(throughput_sa(g, eu).value).epsilon(1e-13));

    const double eps = 0.98;
    const double limit = 1.0 - std::pow(1.0 - 1.0 / kE, 2);
    CHECK(std::abs(bound_closed(peak_load(eps), 2, eps, cache).value - limit) < 0.01);

    const double closed = bound_closed(1.2, 4, 0.4, cache).value;
    CHECK(std::abs(closed - bound_series(1.2, 4, 0.4).value) < 1e-10);
    CHECK(std::abs(bound_closed(2.0, 2, 0.5, cache).value - bound_series(2.0, 2, 0.5).value) < 1e-10);

    CHECK(bound_series(1.7, 3, 1.0).value == 0.0);
    CHECK(bound_series(1.0, 3, 0.0).value == doctest::Approx(1.0 / kE).epsilon(1e-14));
    CHECK(bound(1.0, 3, 0.0).method == ThroughputMethod::series);

    CHECK_THROWS_AS(bound_closed(1.0, 2, 0.0, cache), SingularityError);
    CHECK_THROWS_AS(bound_closed(1.0, kClosedMaxK + 1, 0.5, cache), StabilityError);
}

TEST_CASE("two-relay peak-load results")
{
    CHECK(throughput_k2_at_peak_load(0.0, 0.0, 1.0) == 0.0);
    CHECK(throughput_k2_at_peak_load(0.0, 0.0, 0.5) == doctest::Approx(1.0 / (2.0 * kE)).epsilon(1e-15));

    const HCache cache(2);
    CHECK(std::abs(throughput_k2_at_peak_load(0.3, 0.3, 1.0)
                   - throughput_closed({peak_load(0.3), 2, 0.3, 0.3, 1.0}, cache).value) < 1e-12);
    for (double eu : {0.0, 0.1, 0.45, 0.8, 0.97})
        for (double ed : {0.0, 0.35, 0.9})
            for (double d : {0.0, 0.3, 0.77, 1.0})
                CHECK(std::abs(throughput_k2_at_peak_load(eu, ed, d) - throughput({peak_load(eu), 2, eu, ed, d}).value)
                      < 1e-12);

    CHECK(delta_star_k2(0.0, 0.0) == 0.5);
    CHECK(delta_star_k2(0.9, 0.0) == 1.0);
    CHECK(s_star_k2(0.0, 0.0) == doctest::Approx(1.0 / (2.0 * kE)).epsilon(1e-15));

    for (double eu = 0.0; eu < 0.991; eu += 0.05)
        for (double ed = 0.0; ed < 0.991; ed += 0.05) {
            const double d = delta_star_k2(eu, ed);
            CHECK(d > 0.0);
            CHECK(d <= 1.0);
            CHECK(std::abs(s_star_k2(eu, ed) - throughput_k2_at_peak_load(eu, ed, d)) < 1e-12);
            // Stationarity by central differences of the quadratic.
            const double h = 1e-5;
            if (d < 1.0) {
                const double deriv = (throughput_k2_at_peak_load(eu, ed, d + h)
                                      - throughput_k2_at_peak_load(eu, ed, d - h)) / (2 * h);
                CHECK(std::abs(deriv) < 1e-9);
            } else {
                const double deriv = (throughput_k2_at_peak_load(eu, ed, 1.0)
                                      - throughput_k2_at_peak_load(eu, ed, 1.0 - h)) / h;
                CHECK(deriv >= -1e-9);
            }
        }

    CHECK_THROWS_AS(throughput_k2_at_peak_load(1.0, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(delta_star_k2(0.3, 1.0), DomainError);
    CHECK_THROWS_AS(s_star_k2(0.3, 1.0), DomainError);
    CHECK_THROWS_AS(peak_load(1.0), DomainError);
}

TEST_CASE("closed form equals series on the invariant grid")
{
    const HCache cache(8);
    double worst_s = 0.0;
    double worst_b = 0.0;
    for (const auto& p : invariant_grid()) {
        worst_s = std::max(worst_s, std::abs(throughput_closed(p, cache).value - throughput_series(p).value));
        worst_b = std::max(worst_b,
                           std::abs(bound_closed(p.g, p.k, p.eps_u, cache).value - bound_series(p.g, p.k, p.eps_u).value));
    }
    CHECK(worst_s < 1e-9);
    CHECK(worst_b < 1e-10);
}

TEST_CASE("range, bound dominance and K=1 consistency on the invariant grid")
{
    for (const auto& p : invariant_grid()) {
        const double s = throughput(p).value;
        const double b = bound(p.g, p.k, p.eps_u).value;
        CHECK(s >= -1e-12);
        CHECK(s <= 1.0);
        CHECK(b >= 0.0);
        CHECK(b <= 1.0);
        CHECK(s <= b + 1e-12);
        if (p.k == 1 && p.delta == 1.0)
            CHECK(std::abs(s - (1.0 - p.eps_d) * throughput_sa(p.g, p.eps_u).value) < 1e-12);
    }
}

TEST_CASE("throughput is a degree-K polynomial in delta vanishing at 0")
{
    for (int k = 1; k <= 6; ++k) {
        const int n = k + 1;
        std::vector<double> s(n + 1);
        for (int i = 0; i <= n; ++i)
            s[i] = throughput({1.7, k, 0.4, 0.2, static_cast<double>(i) / n}).value;
        CHECK(s[0] == 0.0);
        // The (K+1)-th forward difference of a degree-K polynomial is zero.
        std::vector<double> d = s;
        for (int level = 0; level < n; ++level)
            for (int i = 0; i + 1 < static_cast<int>(d.size()) - level; ++i)
                d[i] = d[i + 1] - d[i];
        CHECK(std::abs(d[0]) < 1e-11);
    }
    // K = 2 is concave.
    for (double eps : {0.0, 0.3, 0.7})
        for (int i = 1; i < 20; ++i) {
            const double h = 0.05;
            const double mid = throughput({1.3, 2, eps, eps, i * h}).value;
            const double lo = throughput({1.3, 2, eps, eps, (i - 1) * h}).value;
            const double hi = throughput({1.3, 2, eps, eps, (i + 1) * h}).value;
            CHECK(lo + hi - 2 * mid <= 1e-14);
        }
}

TEST_CASE("double-precision closed forms are certified up to the K cap")
{
    const HCache cache(kClosedMaxK);
    double worst_s = 0.0;
    double worst_b = 0.0;
    for (int k : {8, 14, kClosedMaxK})
        for (double eu : {0.001, 0.05, 0.3, 0.6, 0.9, 0.99})
            for (double g : {0.25, 1.0, 4.0, 10.0})
                for (double d : {0.5, 1.0})
                    for (double ed : {0.0, 0.5}) {
                        const SystemParams p{g, k, eu, ed, d};
                        worst_s = std::max(worst_s, std::abs(throughput_closed(p, cache).value - big_closed(p)));
                        worst_b = std::max(worst_b, std::abs(bound_closed(g, k, eu, cache).value - big_bound(g, k, eu)));
                    }
    MESSAGE("worst closed-form error at K<=" << kClosedMaxK << ": S " << worst_s << ", bound " << worst_b);
    CHECK(worst_s < 1e-9);
    CHECK(worst_b < 1e-9);
}
