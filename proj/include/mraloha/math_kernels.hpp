#pragma once

// Scalar kernels shared by the analytic model: the ancillary function
// H_m(x) = sum_{n>=0} x^n n^m / n!, Poisson terms and binomial coefficients.

#include <cstdint>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

namespace mraloha {

/// Truncation rule for infinite sums over the number of transmitted packets.
struct SeriesTruncation {
    double tol = 1e-14;       ///< absolute tolerance on the first omitted term
    std::int64_t n_max_hard = 0; ///< hard cap on the summation index; 0 selects the load-dependent default

    void validate() const;
};

/// Default hard cap for a Poisson sum of intensity g: max(200, ceil(g + 12 sqrt(g) + 50)).
std::int64_t default_poisson_cap(double g);

/// Resolves a truncation's hard cap for intensity g (explicit cap or the default).
std::int64_t poisson_cap(const SeriesTruncation& trunc, double g);

/// Memo of H_0..H_max_order at each distinct x.
///
/// Entries are keyed by the bit pattern of x. A row is computed once, on first
/// lookup, and never modified afterwards. Concurrent lookups are safe; a race
/// to insert the same row is resolved by keeping the first insertion, and both
/// candidates are bit-identical anyway.
class HCache {
public:
    explicit HCache(int max_order = 21);

    HCache(const HCache&) = delete;
    HCache& operator=(const HCache&) = delete;

    int max_order() const noexcept { return max_order_; }

    /// H_m(x) e^{-x}, the Touchard polynomial T_m(x).
    double scaled(int m, double x) const;

    /// H_m(x).
    double value(int m, double x) const;

    std::size_t size() const;

private:
    const std::vector<double>& row(double x) const;

    int max_order_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::uint64_t, std::vector<double>> rows_;
};

/// H_m(x) through the recursion H_0 = e^x, H_m = x sum_{l<m} C(m-1,l) H_l.
double ancillary_h(int m, double x, const HCache& cache);

/// H_m(x) by direct summation of its defining series. Independent of the recursion.
double ancillary_h_oracle(int m, double x, const SeriesTruncation& trunc = {});

/// g^n e^{-g} / n!.
double poisson_pmf(std::int64_t n, double g);

/// ln C(n, k).
double log_binomial(std::int64_t n, std::int64_t k);

/// C(n, k) as a double; exact integer recurrence for n <= 30.
double binomial(std::int64_t n, std::int64_t k);

} // namespace mraloha
