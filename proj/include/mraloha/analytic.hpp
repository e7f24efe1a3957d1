#pragma once

// Exact throughput of the two-tier slotted-ALOHA multiple-relay system with
// on-off erasures: users -> K relays over a SA uplink, relays -> sink over a
// SA downlink, each decoding relay forwarding with probability delta.

#include <cstdint>
#include <string_view>

#include "mraloha/math_kernels.hpp"

namespace mraloha {

/// Closed forms are only used for eps_u above this; below it the series forms take over.
inline constexpr double kEpsFloor = 1e-6;

/// Largest relay count for which the alternating closed-form sums are used in double precision.
inline constexpr int kClosedMaxK = 20;

/// One system instance.
struct SystemParams {
    double g = 1.0;     ///< channel load [packets/slot]
    int k = 1;          ///< number of relays
    double eps_u = 0.0; ///< uplink erasure probability
    double eps_d = 0.0; ///< downlink erasure probability
    double delta = 1.0; ///< forwarding probability

    /// Throws DomainError unless g >= 0 (finite), k >= 1 and eps_u, eps_d, delta lie in [0,1].
    void validate() const;
};

enum class ThroughputMethod { series, closed_form, simulated };

std::string_view to_string(ThroughputMethod m);

struct ThroughputResult {
    double value = 0.0; ///< packets per slot
    ThroughputMethod method = ThroughputMethod::closed_form;
    std::int64_t terms_used = 0;
    double est_abs_error = 0.0; ///< 0 for closed forms, tail bound for series, CI half-width for simulation
};

/// Probability a relay decodes when n packets are on air: n (1-eps_u) eps_u^(n-1), with 0^0 = 1.
double p_decode_uplink(std::int64_t n, double eps_u);

/// Probability a given relay delivers an unerased downlink packet: p_n delta (1-eps_d).
double q_success_downlink_arrival(std::int64_t n, const SystemParams& params);

/// Slotted-ALOHA throughput of a single erasure link, G(1-eps_u) e^{-G(1-eps_u)}.
ThroughputResult throughput_sa(double g, double eps_u);

/// End-to-end throughput as the Poisson-weighted sum of K q_n (1-q_n)^(K-1).
ThroughputResult throughput_series(const SystemParams& params, const SeriesTruncation& trunc = {});

/// End-to-end throughput via the alternating sum over H_{l+1}(G eps_u^{l+1}).
/// Requires eps_u > kEpsFloor and k <= kClosedMaxK; the cache must hold order k.
ThroughputResult throughput_closed(const SystemParams& params, const HCache& cache);

/// Dispatches to the closed form where it is valid and to the series otherwise.
ThroughputResult throughput(const SystemParams& params);

/// Upper bound: probability at least one relay decodes in a slot (closed form).
/// Downlink parameters do not enter.
ThroughputResult bound_closed(double g, int k, double eps_u, const HCache& cache);

/// Upper bound by summing P(N = n) (1 - (1-p_n)^K) over n. Valid for every eps_u.
ThroughputResult bound_series(double g, int k, double eps_u, const SeriesTruncation& trunc = {});

/// Upper bound, dispatching like throughput().
ThroughputResult bound(double g, int k, double eps_u);

/// Peak uplink load 1/(1-eps_u). DomainError at eps_u = 1.
double peak_load(double eps_u);

/// Two-relay throughput at G = 1/(1-eps_u), a concave quadratic in delta.
double throughput_k2_at_peak_load(double eps_u, double eps_d, double delta);

/// Maximizer of throughput_k2_at_peak_load over delta in [0,1]. DomainError at eps_d = 1.
double delta_star_k2(double eps_u, double eps_d);

/// Maximum of throughput_k2_at_peak_load over delta in [0,1]. DomainError at eps_d = 1.
double s_star_k2(double eps_u, double eps_d);

} // namespace mraloha
