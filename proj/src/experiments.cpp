#include "mraloha/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "mraloha/errors.hpp"

namespace mraloha {

namespace {

constexpr std::string_view kAxisNames[] = {"g", "delta", "eps", "eps_u", "eps_d", "k"};
constexpr std::string_view kOutputNames[] = {"analytic", "closed", "series", "bound",
                                             "simulated", "delta_star", "s_star"};
constexpr std::string_view kFigureNames[] = {"fig2", "fig3", "fig4", "fig5"};

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view s, const std::string_view (&names)[N])
{
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == s)
            return static_cast<Enum>(i);
    return std::nullopt;
}

std::string provenance_line()
{
    return "mraloha " + std::string(kVersion);
}

struct Evaluated {
    double value;
    double error;
};

Evaluated evaluate_output(const SweepSpec& spec, const SystemParams& p, SweepOutput output, double axis_value)
{
    switch (output) {
    case SweepOutput::analytic: {
        const auto r = throughput(p);
        return {r.value, r.est_abs_error};
    }
    case SweepOutput::closed: {
        const HCache cache(std::max(p.k, 1));
        const auto r = throughput_closed(p, cache);
        return {r.value, r.est_abs_error};
    }
    case SweepOutput::series: {
        const auto r = throughput_series(p);
        return {r.value, r.est_abs_error};
    }
    case SweepOutput::bound: {
        const auto r = bound(p.g, p.k, p.eps_u);
        return {r.value, r.est_abs_error};
    }
    case SweepOutput::simulated: {
        const SimOverrides& o = *spec.sim;
        SimConfig config{p, o.n_slots, o.warmup_slots, o.seed, std::bit_cast<std::uint64_t>(axis_value), o.mode};
        const SimStats s = simulate(config);
        return {s.throughput_estimate, s.ci95_halfwidth};
    }
    case SweepOutput::delta_star: {
        const auto r = optimize_delta(p.g, p.k, p.eps_u, p.eps_d, spec.arg_tol);
        return {r.arg_star, r.arg_tol};
    }
    case SweepOutput::s_star: {
        const auto r = optimize_delta(p.g, p.k, p.eps_u, p.eps_d, spec.arg_tol);
        return {r.value_star, 0.0};
    }
    }
    return {0.0, 0.0};
}

bool has_output(const SweepSpec& spec, SweepOutput o)
{
    return std::find(spec.outputs.begin(), spec.outputs.end(), o) != spec.outputs.end();
}

// Grid value i * step, which stays bit-stable where accumulated sums would drift.
double grid_point(int i, double step)
{
    return i * step;
}

} // namespace

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_csv(std::ostream& os, const CsvTable& table)
{
    for (const auto& c : table.comments)
        os << "# " << c << '\n';
    auto write_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0)
                os << ',';
            os << row[i];
        }
        os << '\n';
    };
    write_row(table.header);
    for (const auto& row : table.rows)
        write_row(row);
}

std::string_view to_string(SweepAxis a)
{
    return kAxisNames[static_cast<std::size_t>(a)];
}

std::string_view to_string(SweepOutput o)
{
    return kOutputNames[static_cast<std::size_t>(o)];
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view s)
{
    return parse_enum<SweepAxis>(s, kAxisNames);
}

std::optional<SweepOutput> parse_sweep_output(std::string_view s)
{
    return parse_enum<SweepOutput>(s, kOutputNames);
}

std::string_view to_string(FigureId f)
{
    return kFigureNames[static_cast<std::size_t>(f)];
}

std::optional<FigureId> parse_figure_id(std::string_view s)
{
    return parse_enum<FigureId>(s, kFigureNames);
}

void SweepSpec::validate() const
{
    if (values.empty())
        throw InvalidConfigError("sweep needs at least one axis value");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (!(values[i] > values[i - 1]))
            throw InvalidConfigError("sweep values must be strictly increasing");
    if (axis == SweepAxis::k)
        for (double v : values)
            if (v < 1.0 || v != std::floor(v) || v > 1e6)
                throw InvalidConfigError("k axis values must be positive integers");
    if (outputs.empty())
        throw InvalidConfigError("sweep needs at least one output");
    for (std::size_t i = 0; i < outputs.size(); ++i)
        for (std::size_t j = i + 1; j < outputs.size(); ++j)
            if (outputs[i] == outputs[j])
                throw InvalidConfigError("duplicate sweep output " + std::string(to_string(outputs[i])));
    if (axis == SweepAxis::g && load.kind == LoadRule::Kind::peak_load)
        throw InvalidConfigError("a g axis cannot be combined with the peak-load rule");
    if (has_output(*this, SweepOutput::simulated) && !sim)
        throw InvalidConfigError("simulated output requires simulation settings");
    for (double v : values) {
        try {
            params_at(v).validate();
        } catch (const DomainError& e) {
            throw InvalidConfigError("axis value " + format_number(v) + ": " + e.what());
        }
    }
}

SystemParams SweepSpec::params_at(double value) const
{
    SystemParams p = fixed;
    switch (axis) {
    case SweepAxis::g: p.g = value; break;
    case SweepAxis::delta: p.delta = value; break;
    case SweepAxis::eps: p.eps_u = p.eps_d = value; break;
    case SweepAxis::eps_u: p.eps_u = value; break;
    case SweepAxis::eps_d: p.eps_d = value; break;
    case SweepAxis::k: p.k = static_cast<int>(value); break;
    }
    if (load.kind == LoadRule::Kind::peak_load && p.eps_u < 1.0)
        p.g = peak_load(p.eps_u);
    return p;
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec)
{
    spec.validate();
    std::vector<ResultRow> rows;
    rows.reserve(spec.values.size());
    for (double v : spec.values) {
        ResultRow row;
        row.params = spec.params_at(v);
        if (spec.load.kind == LoadRule::Kind::peak_load && row.params.eps_u >= 1.0)
            row.error = "peak load is unbounded at eps_u = 1";
        for (SweepOutput o : spec.outputs) {
            std::optional<double> value, error;
            if (row.error.empty()) {
                try {
                    const Evaluated e = evaluate_output(spec, row.params, o, v);
                    value = e.value;
                    error = e.error;
                } catch (const Error& e) {
                    row.error = std::string(to_string(o)) + ": " + e.what();
                }
            }
            row.values.push_back(value);
            row.errors.push_back(error);
        }
        if (spec.sim && has_output(spec, SweepOutput::simulated)) {
            row.seed = spec.sim->seed;
            row.n_slots = spec.sim->n_slots;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

CsvTable sweep_table(const SweepSpec& spec, const std::vector<ResultRow>& rows)
{
    CsvTable t;
    t.comments.push_back(provenance_line());
    t.comments.push_back("sweep axis=" + std::string(to_string(spec.axis)));
    const bool simulated = has_output(spec, SweepOutput::simulated);
    if (simulated)
        t.comments.push_back("rng " + std::string(kRngIdentity) + " stream=bits(axis value)");

    t.header = {"g", "k", "eps_u", "eps_d", "delta"};
    for (SweepOutput o : spec.outputs) {
        t.header.emplace_back(to_string(o));
        t.header.push_back(std::string(to_string(o)) + "_err");
    }
    if (simulated) {
        t.header.emplace_back("seed");
        t.header.emplace_back("n_slots");
    }
    t.header.emplace_back("error");

    for (const auto& r : rows) {
        std::vector<std::string> cells{format_number(r.params.g), std::to_string(r.params.k),
                                       format_number(r.params.eps_u), format_number(r.params.eps_d),
                                       format_number(r.params.delta)};
        for (std::size_t i = 0; i < spec.outputs.size(); ++i) {
            cells.push_back(r.values[i] ? format_number(*r.values[i]) : "");
            cells.push_back(r.errors[i] ? format_number(*r.errors[i]) : "");
        }
        if (simulated) {
            cells.push_back(r.seed ? std::to_string(*r.seed) : "");
            cells.push_back(r.n_slots ? std::to_string(*r.n_slots) : "");
        }
        std::string msg = r.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        cells.push_back(msg);
        t.rows.push_back(std::move(cells));
    }
    return t;
}

CsvTable figure_table(FigureId id)
{
    CsvTable t;
    t.comments.push_back(provenance_line());
    t.comments.push_back("figure " + std::string(to_string(id)));
    const double inv_e = std::exp(-1.0);

    switch (id) {
    case FigureId::fig2: {
        t.comments.emplace_back("K=2 delta=1 eps_u=eps_d=eps; S end-to-end and S_bound upper bound vs G");
        t.header = {"eps", "g", "S", "S_bound"};
        for (double eps : {0.1, 0.3, 0.5}) {
            for (int i = 0; i <= 100; ++i) {
                const double g = grid_point(i, 0.05);
                const double s = throughput({g, 2, eps, eps, 1.0}).value;
                const double b = bound(g, 2, eps).value;
                t.rows.push_back({format_number(eps), format_number(g), format_number(s), format_number(b)});
            }
        }
        break;
    }
    case FigureId::fig3: {
        t.comments.emplace_back("K=2 eps_u=eps_d=eps G=1/(1-eps); optimal throughput and forwarding probability");
        t.header = {"eps", "g", "S_star", "delta_star", "S_bound", "single_relay"};
        for (int i = 0; i <= 98; ++i) {
            const double eps = grid_point(i, 0.01);
            const double g = peak_load(eps);
            t.rows.push_back({format_number(eps), format_number(g), format_number(s_star_k2(eps, eps)),
                              format_number(delta_star_k2(eps, eps)), format_number(bound(g, 2, eps).value),
                              format_number((1.0 - eps) * inv_e)});
        }
        break;
    }
    case FigureId::fig4: {
        t.comments.emplace_back("K=2 G=1/(1-eps_u); optimal throughput over (eps_u, eps_d)");
        t.header = {"eps_u", "eps_d", "g", "S_star", "delta_star"};
        for (int i = 0; i <= 19; ++i) {
            const double eps_u = grid_point(i, 0.05);
            for (int j = 0; j <= 19; ++j) {
                const double eps_d = grid_point(j, 0.05);
                t.rows.push_back({format_number(eps_u), format_number(eps_d), format_number(peak_load(eps_u)),
                                  format_number(s_star_k2(eps_u, eps_d)),
                                  format_number(delta_star_k2(eps_u, eps_d))});
            }
        }
        break;
    }
    case FigureId::fig5: {
        t.comments.emplace_back("eps_u=eps_d=eps G=1/(1-eps); delta-optimized throughput and bound vs K");
        t.header = {"eps", "k", "g", "S_star", "delta_star", "S_bound"};
        for (double eps : {0.1, 0.3, 0.5}) {
            const double g = peak_load(eps);
            for (int k = 1; k <= 32; ++k) {
                const auto opt = optimize_delta(g, k, eps, eps);
                t.rows.push_back({format_number(eps), std::to_string(k), format_number(g),
                                  format_number(opt.value_star), format_number(opt.arg_star),
                                  format_number(bound(g, k, eps).value)});
            }
        }
        break;
    }
    }
    return t;
}

void reproduce_figure(FigureId id, const std::string& out_path)
{
    const CsvTable table = figure_table(id);
    std::ofstream os(out_path, std::ios::binary);
    if (!os)
        throw Error("cannot open " + out_path + " for writing");
    write_csv(os, table);
    if (!os)
        throw Error("failed writing " + out_path);
}

} // namespace mraloha
