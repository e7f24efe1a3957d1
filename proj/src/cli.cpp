#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mraloha/errors.hpp"
#include "mraloha/experiments.hpp"

namespace mraloha {

namespace {

// Raised for argument combinations CLI11 cannot express; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const CLI::Range kUnit(0.0, 1.0);
const CLI::Range kNonNegative(0.0, std::numeric_limits<double>::max());
const CLI::Range kPositiveInt(1, std::numeric_limits<int>::max());

struct ParamFlags {
    SystemParams p;

    void add(CLI::App* cmd, bool with_g, bool with_downlink)
    {
        if (with_g)
            cmd->add_option("--g", p.g, "channel load G [packets/slot]")->check(kNonNegative);
        cmd->add_option("--k", p.k, "number of relays K")->check(kPositiveInt);
        cmd->add_option("--eps-u", p.eps_u, "uplink erasure probability")->check(kUnit);
        if (with_downlink) {
            cmd->add_option("--eps-d", p.eps_d, "downlink erasure probability")->check(kUnit);
            cmd->add_option("--delta", p.delta, "forwarding probability")->check(kUnit);
        }
    }
};

struct Output {
    std::string path;

    void add(CLI::App* cmd) { cmd->add_option("--out", path, "write CSV to this path instead of stdout"); }

    void emit(const CsvTable& table, std::ostream& out) const
    {
        if (path.empty()) {
            write_csv(out, table);
            return;
        }
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw Error("cannot open " + path + " for writing");
        write_csv(os, table);
        if (!os)
            throw Error("failed writing " + path);
    }
};

std::vector<double> parse_value_list(const std::string& text)
{
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError("invalid number '" + item + "' in --values");
        }
        if (used != item.size())
            throw UsageError("invalid number '" + item + "' in --values");
        values.push_back(v);
    }
    return values;
}

// "from:to:step" inclusive of `to` up to rounding; points are from + i*step.
std::vector<double> parse_range(const std::string& text)
{
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            parts.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("invalid --range '" + text + "'");
        }
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
        throw UsageError("--range expects from:to:step with step > 0 and to >= from");
    std::vector<double> values;
    const auto n = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (long i = 0; i <= n; ++i)
        values.push_back(parts[0] + static_cast<double>(i) * parts[2]);
    return values;
}

LoadRule resolve_load(bool peak, CLI::Option* g_opt, double g)
{
    if (peak && g_opt->count() > 0)
        throw UsageError("--g and --peak-load are mutually exclusive");
    if (!peak && g_opt->count() == 0)
        throw UsageError("give either --g or --peak-load");
    return peak ? LoadRule::peak() : LoadRule::fixed(g);
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Throughput analysis, optimization and simulation of two-tier slotted-ALOHA relay systems"};
    app.name("mraloha");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // eval
    ParamFlags eval_flags;
    std::string eval_method = "auto";
    Output eval_out;
    auto* eval = app.add_subcommand("eval", "end-to-end throughput S at one parameter point");
    eval_flags.add(eval, true, true);
    eval->add_option("--method", eval_method, "auto, closed or series")
        ->check(CLI::IsMember({"auto", "closed", "series"}));
    eval_out.add(eval);

    // bound
    ParamFlags bound_flags;
    std::string bound_method = "auto";
    Output bound_out;
    auto* bound_cmd = app.add_subcommand("bound", "upper bound: probability at least one relay decodes");
    bound_flags.add(bound_cmd, true, false);
    bound_cmd->add_option("--method", bound_method, "auto, closed or series")
        ->check(CLI::IsMember({"auto", "closed", "series"}));
    bound_out.add(bound_cmd);

    // optimize-delta
    ParamFlags od_flags;
    bool od_peak = false;
    double od_tol = kDefaultArgTol;
    Output od_out;
    auto* od = app.add_subcommand("optimize-delta", "forwarding probability maximizing S");
    od_flags.add(od, true, true);
    od->add_flag("--peak-load", od_peak, "operate at G = 1/(1-eps_u)");
    od->add_option("--arg-tol", od_tol, "argument tolerance")->check(CLI::Range(1e-12, 0.1));
    od_out.add(od);

    // optimize-k
    ParamFlags ok_flags;
    bool ok_peak = false;
    int ok_kmax = kDefaultKMax;
    double ok_tol = kDefaultArgTol;
    Output ok_out;
    auto* ok = app.add_subcommand("optimize-k", "relay count maximizing the delta-optimized S");
    ok_flags.add(ok, true, true);
    ok->add_flag("--peak-load", ok_peak, "operate at G = 1/(1-eps_u)");
    ok->add_option("--k-max", ok_kmax, "largest relay count considered")->check(kPositiveInt);
    ok->add_option("--arg-tol", ok_tol, "argument tolerance for delta")->check(CLI::Range(1e-12, 0.1));
    ok_out.add(ok);

    // optimize-load
    ParamFlags ol_flags;
    double ol_gmax = kDefaultGMax;
    double ol_tol = kDefaultArgTol;
    Output ol_out;
    auto* ol = app.add_subcommand("optimize-load", "channel load maximizing S");
    ol_flags.add(ol, false, true);
    ol->add_option("--g-max", ol_gmax, "upper end of the load search")->check(CLI::PositiveNumber);
    ol->add_option("--arg-tol", ol_tol, "argument tolerance")->check(CLI::Range(1e-12, 0.1));
    ol_out.add(ol);

    // simulate
    ParamFlags sim_flags;
    std::int64_t sim_slots = 1'000'000;
    std::int64_t sim_warmup = 1'000;
    std::uint64_t sim_seed = 1;
    std::uint64_t sim_stream = 0;
    std::string sim_mode = "full";
    Output sim_out;
    auto* sim = app.add_subcommand("simulate", "slot-level Monte Carlo estimate of S (or of the bound)");
    sim_flags.add(sim, true, true);
    sim->add_option("--slots", sim_slots, "measured slots")->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 40));
    sim->add_option("--warmup", sim_warmup, "warmup slots")->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 40));
    sim->add_option("--seed", sim_seed, "generator seed");
    sim->add_option("--stream", sim_stream, "generator substream id");
    sim->add_option("--mode", sim_mode, "full or bound")->check(CLI::IsMember({"full", "bound"}));
    sim_out.add(sim);

    // sweep
    ParamFlags sw_flags;
    std::string sw_axis;
    std::string sw_values;
    std::string sw_range;
    std::vector<std::string> sw_outputs{"analytic"};
    bool sw_peak = false;
    std::int64_t sw_slots = 1'000'000;
    std::int64_t sw_warmup = 1'000;
    std::uint64_t sw_seed = 1;
    std::string sw_mode = "full";
    double sw_tol = kDefaultArgTol;
    Output sw_out;
    auto* sw = app.add_subcommand("sweep", "evaluate outputs along one parameter axis");
    sw_flags.add(sw, true, true);
    sw->add_option("--axis", sw_axis, "g, delta, eps, eps_u, eps_d or k")
        ->required()
        ->check(CLI::IsMember({"g", "delta", "eps", "eps_u", "eps_d", "k"}));
    auto* values_opt = sw->add_option("--values", sw_values, "comma-separated axis values");
    auto* range_opt = sw->add_option("--range", sw_range, "axis values as from:to:step");
    values_opt->excludes(range_opt);
    sw->add_option("--outputs", sw_outputs, "analytic, closed, series, bound, simulated, delta_star, s_star")
        ->delimiter(',')
        ->check(CLI::IsMember({"analytic", "closed", "series", "bound", "simulated", "delta_star", "s_star"}));
    sw->add_flag("--peak-load", sw_peak, "set G = 1/(1-eps_u) on every row");
    sw->add_option("--slots", sw_slots, "measured slots per simulated row")->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 40));
    sw->add_option("--warmup", sw_warmup, "warmup slots per simulated row")->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 40));
    sw->add_option("--seed", sw_seed, "generator seed");
    sw->add_option("--mode", sw_mode, "full or bound")->check(CLI::IsMember({"full", "bound"}));
    sw->add_option("--arg-tol", sw_tol, "argument tolerance for delta_star/s_star")->check(CLI::Range(1e-12, 0.1));
    sw_out.add(sw);

    // reproduce
    std::string fig;
    Output fig_out;
    auto* rep = app.add_subcommand("reproduce", "write the data behind one of the throughput figures");
    rep->add_option("figure", fig, "fig2, fig3, fig4 or fig5")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5"}));
    fig_out.add(rep);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*eval) {
            const SystemParams& p = eval_flags.p;
            ThroughputResult r;
            if (eval_method == "closed") {
                const HCache cache(p.k);
                r = throughput_closed(p, cache);
            } else if (eval_method == "series") {
                r = throughput_series(p);
            } else {
                r = throughput(p);
            }
            CsvTable t;
            t.header = {"g", "k", "eps_u", "eps_d", "delta", "S", "method", "est_abs_error", "terms_used"};
            t.rows.push_back({format_number(p.g), std::to_string(p.k), format_number(p.eps_u),
                              format_number(p.eps_d), format_number(p.delta), format_number(r.value),
                              std::string(to_string(r.method)), format_number(r.est_abs_error),
                              std::to_string(r.terms_used)});
            eval_out.emit(t, out);
        } else if (*bound_cmd) {
            const SystemParams& p = bound_flags.p;
            ThroughputResult r;
            if (bound_method == "closed") {
                const HCache cache(p.k);
                r = bound_closed(p.g, p.k, p.eps_u, cache);
            } else if (bound_method == "series") {
                r = bound_series(p.g, p.k, p.eps_u);
            } else {
                r = bound(p.g, p.k, p.eps_u);
            }
            CsvTable t;
            t.header = {"g", "k", "eps_u", "S_bound", "method", "est_abs_error", "terms_used"};
            t.rows.push_back({format_number(p.g), std::to_string(p.k), format_number(p.eps_u),
                              format_number(r.value), std::string(to_string(r.method)),
                              format_number(r.est_abs_error), std::to_string(r.terms_used)});
            bound_out.emit(t, out);
        } else if (*od) {
            const SystemParams& p = od_flags.p;
            const LoadRule rule = resolve_load(od_peak, od->get_option("--g"), p.g);
            const double g = rule.resolve(p.eps_u);
            const auto r = optimize_delta(g, p.k, p.eps_u, p.eps_d, od_tol);
            CsvTable t;
            t.header = {"g", "k", "eps_u", "eps_d", "delta_star", "S_star", "method", "evaluations", "arg_tol"};
            t.rows.push_back({format_number(g), std::to_string(p.k), format_number(p.eps_u), format_number(p.eps_d),
                              format_number(r.arg_star), format_number(r.value_star),
                              std::string(to_string(r.method)), std::to_string(r.evaluations),
                              format_number(r.arg_tol)});
            od_out.emit(t, out);
        } else if (*ok) {
            const SystemParams& p = ok_flags.p;
            const LoadRule rule = resolve_load(ok_peak, ok->get_option("--g"), p.g);
            const double g = rule.resolve(p.eps_u);
            const auto r = optimize_k(rule, p.eps_u, p.eps_d, ok_kmax, ok_tol);
            CsvTable t;
            t.comments.push_back("k_star=" + format_number(r.arg_star) + " S_star=" + format_number(r.value_star));
            t.header = {"g", "eps_u", "eps_d", "k", "delta_star", "S_star", "optimal"};
            for (std::size_t i = 0; i < r.per_k_value.size(); ++i) {
                const int k = static_cast<int>(i) + 1;
                t.rows.push_back({format_number(g), format_number(p.eps_u), format_number(p.eps_d),
                                  std::to_string(k), format_number(r.per_k_delta[i]),
                                  format_number(r.per_k_value[i]), k == static_cast<int>(r.arg_star) ? "1" : "0"});
            }
            ok_out.emit(t, out);
        } else if (*ol) {
            const SystemParams& p = ol_flags.p;
            const auto r = optimize_load(p.k, p.eps_u, p.eps_d, p.delta, ol_gmax, ol_tol);
            CsvTable t;
            t.header = {"k", "eps_u", "eps_d", "delta", "g_star", "S_star", "method", "evaluations", "arg_tol"};
            t.rows.push_back({std::to_string(p.k), format_number(p.eps_u), format_number(p.eps_d),
                              format_number(p.delta), format_number(r.arg_star), format_number(r.value_star),
                              std::string(to_string(r.method)), std::to_string(r.evaluations),
                              format_number(r.arg_tol)});
            ol_out.emit(t, out);
        } else if (*sim) {
            const SystemParams& p = sim_flags.p;
            const SimMode mode = sim_mode == "bound" ? SimMode::bound_uplink_only : SimMode::full_system;
            const SimStats s = simulate({p, sim_slots, sim_warmup, sim_seed, sim_stream, mode});
            const double analytic = mode == SimMode::full_system ? throughput(p).value : bound(p.g, p.k, p.eps_u).value;
            CsvTable t;
            t.comments.push_back("mraloha " + std::string(kVersion));
            t.comments.push_back("rng " + std::string(s.rng) + " seed=" + std::to_string(s.seed)
                                 + " stream=" + std::to_string(s.stream_id));
            t.header = {"g", "k", "eps_u", "eps_d", "delta", "mode", "n_slots", "warmup", "seed", "estimate",
                        "ci95", "delivered", "uplink_union_rate", "sink_collision_rate", "analytic"};
            t.rows.push_back({format_number(p.g), std::to_string(p.k), format_number(p.eps_u),
                              format_number(p.eps_d), format_number(p.delta), std::string(to_string(mode)),
                              std::to_string(sim_slots), std::to_string(sim_warmup), std::to_string(sim_seed),
                              format_number(s.throughput_estimate), format_number(s.ci95_halfwidth),
                              std::to_string(s.delivered_packets), format_number(s.uplink_union_rate),
                              format_number(s.sink_collision_rate), format_number(analytic)});
            sim_out.emit(t, out);
        } else if (*sw) {
            SweepSpec spec;
            spec.axis = *parse_sweep_axis(sw_axis);
            if (!sw_values.empty())
                spec.values = parse_value_list(sw_values);
            else if (!sw_range.empty())
                spec.values = parse_range(sw_range);
            else
                throw UsageError("sweep needs --values or --range");
            spec.fixed = sw_flags.p;
            spec.outputs.clear();
            for (const auto& o : sw_outputs)
                spec.outputs.push_back(*parse_sweep_output(o));
            if (sw_peak)
                spec.load = LoadRule::peak();
            spec.arg_tol = sw_tol;
            spec.sim = SimOverrides{sw_slots, sw_warmup, sw_seed,
                                    sw_mode == "bound" ? SimMode::bound_uplink_only : SimMode::full_system};
            try {
                spec.validate();
            } catch (const InvalidConfigError& e) {
                throw UsageError(e.what());
            }
            sw_out.emit(sweep_table(spec, run_sweep(spec)), out);
        } else if (*rep) {
            const FigureId id = *parse_figure_id(fig);
            if (fig_out.path.empty())
                write_csv(out, figure_table(id));
            else
                reproduce_figure(id, fig_out.path);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace mraloha
