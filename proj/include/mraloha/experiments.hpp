#pragma once

// Parameter sweeps, figure data and the CSV format shared by the CLI.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mraloha/analytic.hpp"
#include "mraloha/optimizer.hpp"
#include "mraloha/simulator.hpp"

namespace mraloha {

inline constexpr std::string_view kVersion = "0.1.0";

/// Formats a value with 10 significant digits ("%.10g").
std::string format_number(double v);

/// Header row, data rows, and '#'-prefixed provenance lines written before the header.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Writes comments, header and rows with '\n' line endings.
void write_csv(std::ostream& os, const CsvTable& table);

enum class SweepAxis { g, delta, eps, eps_u, eps_d, k };
enum class SweepOutput { analytic, closed, series, bound, simulated, delta_star, s_star };

std::string_view to_string(SweepAxis a);
std::string_view to_string(SweepOutput o);
std::optional<SweepAxis> parse_sweep_axis(std::string_view s);
std::optional<SweepOutput> parse_sweep_output(std::string_view s);

struct SimOverrides {
    std::int64_t n_slots = 1'000'000;
    std::int64_t warmup_slots = 1'000;
    std::uint64_t seed = 1;
    SimMode mode = SimMode::full_system;
};

struct SweepSpec {
    SweepAxis axis = SweepAxis::g;
    std::vector<double> values;
    SystemParams fixed;
    std::vector<SweepOutput> outputs{SweepOutput::analytic};
    LoadRule load = LoadRule::fixed(1.0); ///< ignored unless kind == peak_load; fixed loads come from `fixed.g`
    std::optional<SimOverrides> sim;
    double arg_tol = kDefaultArgTol;

    /// Throws InvalidConfigError for empty or non-increasing values, non-integral
    /// K values, duplicate outputs, or a g axis combined with the peak-load rule.
    void validate() const;

    /// Parameters of the row at the given axis value.
    SystemParams params_at(double value) const;
};

struct ResultRow {
    SystemParams params;
    std::vector<std::optional<double>> values; ///< one per spec output, empty on error
    std::vector<std::optional<double>> errors; ///< est_abs_error per output
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> n_slots;
    std::string error; ///< first failure message, empty on success
};

/// One row per axis value, in axis order. Module errors land in the row's error field.
std::vector<ResultRow> run_sweep(const SweepSpec& spec);

/// CSV rendering of a sweep; the column set depends only on the spec.
CsvTable sweep_table(const SweepSpec& spec, const std::vector<ResultRow>& rows);

enum class FigureId { fig2, fig3, fig4, fig5 };

std::string_view to_string(FigureId f);
std::optional<FigureId> parse_figure_id(std::string_view s);

/// Data behind one of the throughput figures on a frozen grid.
CsvTable figure_table(FigureId id);

/// Writes figure_table(id) to out_path. Throws Error on I/O failure.
void reproduce_figure(FigureId id, const std::string& out_path);

/// Command-line entry point. args excludes the program name.
/// Returns 0 on success, 1 on a domain or I/O error, 2 on a usage error.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mraloha
