#include "mraloha/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mraloha/errors.hpp"

namespace mraloha {

namespace {

// Loads above this fall back to the standard library's rejection sampler.
constexpr double kPoissonTableMaxLoad = 500.0;
constexpr std::int64_t kSurvivorTableMax = 256;

inline std::uint32_t mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    return static_cast<std::uint32_t>(p);
}

} // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_id_(stream_id)
{
}

RandomStream::Block RandomStream::philox(Block c, std::array<std::uint32_t, 2> k)
{
    constexpr std::uint32_t kM0 = 0xD2511F53;
    constexpr std::uint32_t kM1 = 0xCD9E8D57;
    constexpr std::uint32_t kW0 = 0x9E3779B9;
    constexpr std::uint32_t kW1 = 0xBB67AE85;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, hi1;
        const std::uint32_t lo0 = mulhilo(kM0, c[0], hi0);
        const std::uint32_t lo1 = mulhilo(kM1, c[2], hi1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

void RandomStream::refill()
{
    const Block counter{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                        static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
    buffer_ = philox(counter, key_);
    ++block_;
    next_ = 0;
}

RandomStream rng_substream(std::uint64_t seed, std::uint64_t stream_id)
{
    return RandomStream(seed, stream_id);
}

std::string_view to_string(SimMode m)
{
    switch (m) {
    case SimMode::full_system: return "full_system";
    case SimMode::bound_uplink_only: return "bound_uplink_only";
    }
    return "unknown";
}

void SimConfig::validate() const
{
    try {
        params.validate();
    } catch (const DomainError& e) {
        throw InvalidConfigError(e.what());
    }
    if (n_slots < 1)
        throw InvalidConfigError("n_slots must be at least 1");
    if (warmup_slots < 1)
        throw InvalidConfigError("warmup_slots must be at least 1 (forwarding has a one-slot delay)");
}

SlotEngine::PoissonSampler::PoissonSampler(double g) : g_(g)
{
    if (g > kPoissonTableMaxLoad)
        return;
    // Inverse-CDF table out to where the remaining mass is below double resolution.
    const std::int64_t cap = default_poisson_cap(g);
    double pmf = std::exp(-g);
    double acc = 0.0;
    for (std::int64_t n = 0; n <= cap; ++n) {
        if (n > 0)
            pmf *= g / static_cast<double>(n);
        acc += pmf;
        cdf_.push_back(acc);
        if (static_cast<double>(n) > g && pmf < 1e-18)
            break;
    }
    cdf_.back() = 1.0;
}

std::int64_t SlotEngine::PoissonSampler::operator()(RandomStream& rng)
{
    if (cdf_.empty()) {
        std::poisson_distribution<std::int64_t> dist(g_);
        return dist(rng);
    }
    const double u = rng.uniform32();
    return std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
}

SlotEngine::SurvivorSampler::SurvivorSampler(double keep, std::int64_t table_max) : keep_(keep)
{
    cdf_.resize(static_cast<std::size_t>(table_max) + 1);
    for (std::int64_t n = 0; n <= table_max; ++n) {
        auto& row = cdf_[static_cast<std::size_t>(n)];
        row.resize(static_cast<std::size_t>(n) + 1);
        double acc = 0.0;
        for (std::int64_t j = 0; j <= n; ++j) {
            acc += binomial(n, j) * std::pow(keep, static_cast<double>(j))
                   * std::pow(1.0 - keep, static_cast<double>(n - j));
            row[static_cast<std::size_t>(j)] = acc;
        }
        row.back() = 1.0;
    }
}

std::int64_t SlotEngine::SurvivorSampler::operator()(std::int64_t n, RandomStream& rng)
{
    if (n < static_cast<std::int64_t>(cdf_.size())) {
        const auto& row = cdf_[static_cast<std::size_t>(n)];
        const double u = rng.uniform32();
        std::int64_t j = 0;
        while (row[static_cast<std::size_t>(j)] <= u)
            ++j;
        return j;
    }
    std::binomial_distribution<std::int64_t> dist(n, keep_);
    return dist(rng);
}

bool SlotEngine::SurvivorSampler::exactly_one(std::int64_t n, RandomStream& rng)
{
    if (n < static_cast<std::int64_t>(cdf_.size())) {
        const auto& row = cdf_[static_cast<std::size_t>(n)];
        const double u = rng.uniform32();
        return n >= 1 && row[0] <= u && u < row[1];
    }
    std::binomial_distribution<std::int64_t> dist(n, keep_);
    return dist(rng) == 1;
}

SlotEngine::SlotEngine(const SystemParams& params, SimMode mode, RandomStream rng)
    : params_(params),
      mode_(mode),
      rng_(rng),
      arrivals_(params.g),
      survivors_(1.0 - params.eps_u,
                 arrivals_.table_max() >= 0 ? std::min(kSurvivorTableMax, arrivals_.table_max()) : kSurvivorTableMax)
{
}

template <bool Detailed, typename OnRelay>
SlotTally SlotEngine::advance(OnRelay&& on_relay)
{
    SlotTally tally;
    tally.n_tx = arrivals_(rng_);
    const bool full = mode_ == SimMode::full_system;

    // Downlink carries what was forwarded in the previous slot.
    if (full) {
        for (std::int64_t i = 0; i < pending_forwards_; ++i)
            if (rng_.uniform32() >= params_.eps_d)
                ++tally.sink_arrivals;
        tally.sink_decoded = tally.sink_arrivals == 1;
    }

    if (tally.n_tx > 0) {
        for (int r = 0; r < params_.k; ++r) {
            std::int64_t survivors;
            if constexpr (Detailed)
                survivors = survivors_(tally.n_tx, rng_);
            else
                survivors = survivors_.exactly_one(tally.n_tx, rng_) ? 1 : 0;
            if (survivors != 1) {
                on_relay(r, survivors, false);
                continue;
            }
            ++tally.decoded;
            const bool forward = full && rng_.uniform32() < params_.delta;
            tally.forwarding += forward;
            on_relay(r, survivors, forward);
        }
    }
    pending_forwards_ = tally.forwarding;
    return tally;
}

void SlotEngine::step(SlotOutcome& out)
{
    const auto k = static_cast<std::size_t>(params_.k);
    out.per_relay_arrivals.assign(k, 0);
    out.relays_decoded.assign(k, false);
    out.relays_forwarding.assign(k, false);

    const SlotTally tally = advance<true>([&](int r, std::int64_t survivors, bool forward) {
        const auto i = static_cast<std::size_t>(r);
        out.per_relay_arrivals[i] = survivors;
        out.relays_decoded[i] = survivors == 1;
        out.relays_forwarding[i] = forward;
    });
    out.n_tx = tally.n_tx;
    out.sink_arrivals = tally.sink_arrivals;
    out.sink_decoded = tally.sink_decoded;
}

SlotTally SlotEngine::step(std::vector<std::int64_t>& decodes_per_relay)
{
    return advance<false>([&](int r, std::int64_t survivors, bool) {
        decodes_per_relay[static_cast<std::size_t>(r)] += survivors == 1;
    });
}

ThroughputResult SimStats::as_throughput() const
{
    return {throughput_estimate, ThroughputMethod::simulated, measured_slots, ci95_halfwidth};
}

SimStats simulate(const SimConfig& config)
{
    config.validate();
    const auto& params = config.params;
    const auto k = static_cast<std::size_t>(params.k);
    const bool full = config.mode == SimMode::full_system;

    SlotEngine engine(params, config.mode, rng_substream(config.seed, config.stream_id));

    std::vector<std::int64_t> per_relay(k, 0);
    std::int64_t in_flight = 0;
    for (std::int64_t t = 0; t < config.warmup_slots; ++t)
        in_flight = engine.step(per_relay).forwarding;
    std::fill(per_relay.begin(), per_relay.end(), 0);

    SimStats stats;
    stats.measured_slots = config.n_slots;
    stats.seed = config.seed;
    stats.stream_id = config.stream_id;
    stats.batches = std::min<std::int64_t>(kSimBatches, config.n_slots);

    std::vector<double> batch_means;
    batch_means.reserve(static_cast<std::size_t>(stats.batches));
    std::int64_t union_slots = 0;
    std::int64_t collision_slots = 0;
    std::int64_t batch_successes = 0;
    std::int64_t batch = 0;
    std::int64_t batch_start = 0;
    std::int64_t batch_end = config.n_slots / stats.batches;

    for (std::int64_t t = 0; t < config.n_slots; ++t) {
        const SlotTally slot = engine.step(per_relay);

        stats.relay_decodes += slot.decoded;
        stats.forwarded += slot.forwarding;
        stats.downlink_transmissions += in_flight;
        stats.sink_arrivals += slot.sink_arrivals;
        in_flight = slot.forwarding;

        const bool any_decoded = slot.decoded > 0;
        union_slots += any_decoded;
        collision_slots += slot.sink_arrivals >= 2;

        const bool success = full ? slot.sink_decoded : any_decoded;
        stats.delivered_packets += success;
        batch_successes += success;

        if (t + 1 == batch_end) {
            batch_means.push_back(static_cast<double>(batch_successes) / static_cast<double>(batch_end - batch_start));
            batch_successes = 0;
            ++batch;
            batch_start = batch_end;
            batch_end = (batch + 1) * config.n_slots / stats.batches;
        }
    }

    const double n = static_cast<double>(config.n_slots);
    stats.throughput_estimate = static_cast<double>(stats.delivered_packets) / n;
    stats.uplink_union_rate = static_cast<double>(union_slots) / n;
    stats.sink_collision_rate = static_cast<double>(collision_slots) / n;
    stats.relay_decode_rate.resize(k);
    for (std::size_t r = 0; r < k; ++r)
        stats.relay_decode_rate[r] = static_cast<double>(per_relay[r]) / n;

    if (batch_means.size() < 2) {
        stats.ci95_halfwidth = 1.0;
    } else {
        const double b = static_cast<double>(batch_means.size());
        double mean = 0.0;
        for (double m : batch_means)
            mean += m;
        mean /= b;
        double ss = 0.0;
        for (double m : batch_means)
            ss += (m - mean) * (m - mean);
        stats.ci95_halfwidth = 1.96 * std::sqrt(ss / (b - 1.0) / b);
    }
    return stats;
}

} // namespace mraloha
