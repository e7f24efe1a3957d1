#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mraloha/analytic.hpp"

namespace mraloha {

enum class OptimizationMethod { closed_form_k2, grid_golden, exhaustive_k };

std::string_view to_string(OptimizationMethod m);

struct OptimizationResult {
    double arg_star = 0.0;   ///< optimal delta, G, or K (integral when optimizing K)
    double value_star = 0.0; ///< throughput at arg_star
    OptimizationMethod method = OptimizationMethod::grid_golden;
    std::int64_t evaluations = 0;
    double arg_tol = 1e-6;

    // Populated by optimize_k only: entry i belongs to K = i + 1.
    std::vector<double> per_k_value;
    std::vector<double> per_k_delta;
};

/// Load selection for optimize_k and peak-load sweeps.
struct LoadRule {
    enum class Kind { fixed, peak_load } kind = Kind::peak_load;
    double g = 1.0; ///< used when kind == fixed

    static LoadRule fixed(double g) { return {Kind::fixed, g}; }
    static LoadRule peak() { return {Kind::peak_load, 0.0}; }

    /// Load to use at the given uplink erasure rate.
    double resolve(double eps_u) const;
};

inline constexpr double kDefaultArgTol = 1e-6;
inline constexpr double kDefaultGMax = 8.0;
inline constexpr int kDefaultKMax = 32;

/// Maximizes throughput over delta in [0,1].
///
/// With K = 2 at the peak load G = 1/(1-eps_u) the quadratic's closed-form
/// maximizer is used; every other case goes through maximize_delta_numerically.
OptimizationResult optimize_delta(double g, int k, double eps_u, double eps_d,
                                  double arg_tol = kDefaultArgTol);

/// 101-point grid on [0,1] followed by golden-section refinement of the best bracket.
OptimizationResult maximize_delta_numerically(double g, int k, double eps_u, double eps_d,
                                              double arg_tol = kDefaultArgTol);

/// Maximizes throughput over G in (0, g_max] on a 400-point log/linear grid plus golden-section refinement.
OptimizationResult optimize_load(int k, double eps_u, double eps_d, double delta,
                                 double g_max = kDefaultGMax, double arg_tol = kDefaultArgTol);

/// Relay count in 1..k_max with the highest delta-optimized throughput; ties go to the smaller K.
OptimizationResult optimize_k(const LoadRule& rule, double eps_u, double eps_d,
                              int k_max = kDefaultKMax, double arg_tol = kDefaultArgTol);

} // namespace mraloha
