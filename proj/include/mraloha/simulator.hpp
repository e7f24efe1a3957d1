#pragma once

// Slot-level Monte Carlo simulation of the two-tier relay system.
//
// Per slot: N ~ Poisson(G) users transmit; every relay independently sees
// Binomial(N, 1-eps_u) unerased packets and decodes iff exactly one survives;
// a decoding relay forwards with probability delta in the NEXT slot; each
// downlink packet survives with probability 1-eps_d and the sink decodes iff
// exactly one survives. Relays do not buffer and reception never blocks on
// forwarding.

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "mraloha/analytic.hpp"

namespace mraloha {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit seed is the key; the stream id occupies the upper half of the
/// 128-bit counter, so every (seed, stream) pair addresses a disjoint block
/// sequence. Produces 64-bit words.
class RandomStream {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint32_t, 4>;

    RandomStream(std::uint64_t seed, std::uint64_t stream_id);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        if (next_ > 2)
            refill();
        const std::uint64_t lo = buffer_[static_cast<std::size_t>(next_)];
        const std::uint64_t hi = buffer_[static_cast<std::size_t>(next_ + 1)];
        next_ += 2;
        return lo | (hi << 32);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform double in [0, 1) from a single 32-bit word; half the cost of uniform().
    double uniform32()
    {
        if (next_ > 3)
            refill();
        return static_cast<double>(buffer_[static_cast<std::size_t>(next_++)]) * 0x1.0p-32;
    }

    /// The raw Philox4x32-10 bijection.
    static Block philox(Block counter, std::array<std::uint32_t, 2> key);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    Block buffer_{};
    int next_ = 4;
};

inline constexpr std::string_view kRngIdentity = "philox4x32-10";

/// Independent, reproducible random source for (seed, stream_id).
RandomStream rng_substream(std::uint64_t seed, std::uint64_t stream_id);

enum class SimMode { full_system, bound_uplink_only };

std::string_view to_string(SimMode m);

struct SimConfig {
    SystemParams params;
    std::int64_t n_slots = 1'000'000;
    std::int64_t warmup_slots = 1'000;
    std::uint64_t seed = 1;
    std::uint64_t stream_id = 0;
    SimMode mode = SimMode::full_system;

    /// Throws InvalidConfigError on bad params, n_slots < 1 or warmup_slots < 1.
    void validate() const;
};

/// What happened in one slot.
struct SlotOutcome {
    std::int64_t n_tx = 0;
    std::vector<std::int64_t> per_relay_arrivals;
    std::vector<bool> relays_decoded;
    std::vector<bool> relays_forwarding; ///< forwarding in the next slot
    std::int64_t sink_arrivals = 0;      ///< unerased downlink packets this slot
    bool sink_decoded = false;
};

/// Aggregate counts of one slot.
struct SlotTally {
    std::int64_t n_tx = 0;
    std::int64_t decoded = 0;    ///< relays that decoded
    std::int64_t forwarding = 0; ///< relays forwarding in the next slot
    std::int64_t sink_arrivals = 0;
    bool sink_decoded = false;
};

/// Steps the protocol one slot at a time. Owns the samplers and the
/// forwarding state carried between slots.
class SlotEngine {
public:
    SlotEngine(const SystemParams& params, SimMode mode, RandomStream rng);

    /// Advances one slot, overwriting out.
    void step(SlotOutcome& out);

    /// Advances one slot and adds 1 to decodes_per_relay[r] for every relay r
    /// that decoded. Consumes the random stream exactly like step().
    SlotTally step(std::vector<std::int64_t>& decodes_per_relay);

private:
    template <bool Detailed, typename OnRelay>
    SlotTally advance(OnRelay&& on_relay);

    class PoissonSampler {
    public:
        explicit PoissonSampler(double g);
        std::int64_t operator()(RandomStream& rng);
        /// Largest value the table can return, or -1 without a table.
        std::int64_t table_max() const { return static_cast<std::int64_t>(cdf_.size()) - 1; }

    private:
        double g_;
        std::vector<double> cdf_;
    };

    // Number of survivors among n packets, each surviving w.p. keep.
    class SurvivorSampler {
    public:
        SurvivorSampler(double keep, std::int64_t table_max);
        std::int64_t operator()(std::int64_t n, RandomStream& rng);
        /// Same draw as operator() but only reports whether exactly one survived.
        bool exactly_one(std::int64_t n, RandomStream& rng);

    private:
        double keep_;
        std::vector<std::vector<double>> cdf_; // cdf_[n][j] = P(X <= j | n)
    };

    SystemParams params_;
    SimMode mode_;
    RandomStream rng_;
    PoissonSampler arrivals_;
    SurvivorSampler survivors_;
    std::int64_t pending_forwards_ = 0;
};

struct SimStats {
    std::int64_t delivered_packets = 0;
    std::int64_t measured_slots = 0;
    double throughput_estimate = 0.0;
    double ci95_halfwidth = 0.0;
    std::vector<double> relay_decode_rate;
    double uplink_union_rate = 0.0;
    double sink_collision_rate = 0.0;

    // Event counters over the measured window. Decodes and forwarding
    // decisions are tallied in the slot they happen; downlink transmissions,
    // sink arrivals and deliveries in the slot the downlink carries them.
    std::int64_t relay_decodes = 0;
    std::int64_t forwarded = 0;
    std::int64_t downlink_transmissions = 0;
    std::int64_t sink_arrivals = 0;
    std::int64_t batches = 0;

    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::string_view rng = kRngIdentity;

    /// Result as a ThroughputResult with the CI half-width as its error.
    ThroughputResult as_throughput() const;
};

inline constexpr int kSimBatches = 100;

/// Runs warmup_slots + n_slots slots and reports estimates over the last n_slots.
/// The 95% CI comes from batch means over 100 batches.
SimStats simulate(const SimConfig& config);

} // namespace mraloha
