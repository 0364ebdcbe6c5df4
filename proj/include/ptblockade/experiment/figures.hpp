#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ptblockade/engine/delayed.hpp"
#include "ptblockade/experiment/sweep.hpp"

namespace ptb {

/// Preset truncation for every figure. (3,3,4) leaves visible cutoff artifacts in
/// g1 near the outer dips; raising n1_max to 4 is what certification asks for.
inline TruncationSpec figure_truncation() { return {4, 3, 4}; }

struct FigureOptions {
    std::size_t threads = 0;
    SteadyStateOptions steady{};
    TruncationSpec trunc = figure_truncation();
};

struct NamedTable {
    std::string name; // file stem
    ResultTable table;
};

/// One independently runnable unit of a figure; it may write several files.
struct FigureJob {
    std::string name;
    std::function<std::vector<NamedTable>(const FigureOptions&)> run;
};

class UnknownFigure : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string>& figure_ids()
{
    static const std::vector<std::string> ids{"fig2", "fig4", "fig5", "fig6", "fig7a", "fig7b"};
    return ids;
}

namespace detail {

inline SweepSpec detuning_sweep(double start, double stop, std::size_t points, Route route,
                                std::vector<std::string> observables, double link_offset = 0.0)
{
    SweepSpec s{"delta1", start, stop, points, route, std::move(observables), std::nullopt};
    s.link = ParameterLink{"delta2", "delta1", link_offset};
    return s;
}

/// Keeps the sweep axes, the named observable's columns and the diagnostics.
inline ResultTable select_observable(const ResultTable& t, const std::string& obs)
{
    ResultTable out;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        const std::string& c = t.columns[i];
        const bool is_obs = c == obs + "_analytic" || c == obs + "_numeric";
        const bool is_other_obs = !is_obs && (c.find("_analytic") != std::string::npos ||
                                              c.find("_numeric") != std::string::npos);
        if (!is_other_obs) keep.push_back(i);
    }
    for (std::size_t i : keep) out.columns.push_back(t.columns[i]);
    for (const auto& r : t.rows) {
        std::vector<double> row;
        for (std::size_t i : keep) row.push_back(r[i]);
        out.rows.push_back(std::move(row));
    }
    for (const auto& [k, v] : t.metadata) {
        if (k == "max_rel_disagreement") continue;
        out.metadata.emplace_back(k, k == "observables" ? obs : v);
    }
    if (t.has_column(obs + "_analytic") && t.has_column(obs + "_numeric")) {
        out.metadata.emplace_back("max_rel_disagreement", number17(max_rel_disagreement(out)));
    }
    return out;
}

inline ResultTable tagged(ResultTable t, const std::string& figure, const std::string& panel)
{
    t.metadata.insert(t.metadata.begin(), {{"figure", figure}, {"panel", panel}});
    return t;
}

inline SweepOptions sweep_options(const FigureOptions& o) { return {o.threads, o.steady}; }

inline FigureJob single_sweep(const std::string& figure, const std::string& name, SystemParams p,
                              SweepSpec s, std::optional<GridAxis> grid = std::nullopt)
{
    return {name, [=](const FigureOptions& o) {
                return std::vector<NamedTable>{
                    {name, tagged(run_sweep(s, p, o.trunc, sweep_options(o), grid), figure, name)}};
            }};
}

/// g2 delay curve as a table (tau, g2_tau, status).
inline ResultTable delayed_table(const SystemParams& p, const TruncationSpec& trunc, DelayedMode mode,
                                 const std::vector<double>& taus, const SteadyStateOptions& steady)
{
    ResultTable t;
    t.columns = {"tau", "g2_tau", "status"};
    const OperatorSet ops = build_operator_set(trunc);
    const Liouvillian l = make_liouvillian(p, ops);
    const SteadyStateResult ss = steady_state(l, trunc, steady);
    int st = 0;
    std::vector<std::pair<double, double>> curve;
    if (!ss.converged) {
        st = status::numeric_unconverged;
    } else {
        try {
            curve = delayed_g2(l, ops, ss, mode, taus, steady.evolve);
        } catch (const std::domain_error&) {
            st = status::undefined_value;
        } catch (const std::exception&) {
            st = status::numeric_failed;
        }
    }
    for (std::size_t i = 0; i < taus.size(); ++i) {
        t.rows.push_back({taus[i], curve.empty() ? nan : curve[i].second, static_cast<double>(st)});
    }
    t.metadata.emplace_back("tool", "ptblockade");
    t.metadata.emplace_back("version", version);
    for (const auto& kv : describe_configuration(p, trunc, steady, std::nullopt)) t.metadata.push_back(kv);
    t.metadata.emplace_back("delayed_mode", to_string(mode));
    t.metadata.emplace_back("tau_start", format_number(taus.front()));
    t.metadata.emplace_back("tau_stop", format_number(taus.back()));
    t.metadata.emplace_back("tau_points", std::to_string(taus.size()));
    t.metadata.emplace_back("steady_residual", number17(ss.residual));
    t.metadata.emplace_back("rows", std::to_string(t.rows.size()));
    t.metadata.emplace_back("flagged_rows", std::to_string(st ? t.rows.size() : 0));
    return t;
}

inline std::vector<double> linspace(double a, double b, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = grid_value(a, b, n, i);
    return v;
}

/// Shared axis of the one-dimensional detuning panels of figures 5 to 7.
inline constexpr double wide_start = -0.8, wide_stop = 0.8;
inline constexpr std::size_t line_points = 2001;
inline constexpr std::size_t grid_points = 201;

} // namespace detail

/// Caption parameter set shared by all presets (delta1 is always swept).
inline SystemParams figure_parameters() { return SystemParams::reference(); }

/// The jobs that make up one figure, in output order. Throws UnknownFigure.
inline std::vector<FigureJob> figure_jobs(const std::string& id)
{
    using namespace detail;
    const SystemParams base = figure_parameters();
    const double kerr = base.kerr_shift();
    std::vector<FigureJob> jobs;

    if (id == "fig2") {
        // Left column: both routes on the comparison window; the numeric route sets the
        // resolution, so 201 points rather than the 2001 of the analytic-only lines.
        const SweepSpec left = detuning_sweep(-0.1, 0.2, 201, Route::both, {"g1", "g2", "g12"});
        jobs.push_back({"fig2_left", [=](const FigureOptions& o) {
                            const ResultTable t = run_sweep(left, base, o.trunc, sweep_options(o));
                            std::vector<NamedTable> out;
                            for (const char* g : {"g1", "g2", "g12"}) {
                                const std::string name = std::string("fig2_left_") + g;
                                out.push_back({name, tagged(select_observable(t, g), "fig2", name)});
                            }
                            return out;
                        }});
        const SweepSpec right = detuning_sweep(-0.1, 0.3, grid_points, Route::analytic, {"g1", "g2", "g12"});
        const GridAxis coupling{"g", 0.5, 5.0, grid_points};
        jobs.push_back({"fig2_right", [=](const FigureOptions& o) {
                            const ResultTable t = run_sweep(right, base, o.trunc, sweep_options(o), coupling);
                            std::vector<NamedTable> out;
                            for (const char* g : {"g1", "g2", "g12"}) {
                                const std::string name = std::string("fig2_right_") + g;
                                out.push_back({name, tagged(select_observable(t, g), "fig2", name)});
                            }
                            return out;
                        }});
    } else if (id == "fig4") {
        const std::vector<double> taus = linspace(0.0, 20.0, grid_points);
        auto delayed = [&](const std::string& name, SystemParams p, double delta, DelayedMode mode) {
            p.delta1 = p.delta2 = delta;
            return FigureJob{name, [=](const FigureOptions& o) {
                                 return std::vector<NamedTable>{
                                     {name, tagged(delayed_table(p, o.trunc, mode, taus, o.steady), "fig4", name)}};
                             }};
        };
        jobs.push_back(delayed("fig4_g1", base, kerr / 2.0, DelayedMode::cavity1));
        jobs.push_back(delayed("fig4_g2", base, kerr, DelayedMode::cavity2));
        jobs.push_back(delayed("fig4_g12", base, kerr, DelayedMode::cross));
        SystemParams passive = base;
        passive.kappa2 = -base.kappa1;
        jobs.push_back(delayed("fig4_passive_g1", passive, kerr / 2.0, DelayedMode::cavity1));
    } else if (id == "fig5") {
        const SweepSpec line = detuning_sweep(wide_start, wide_stop, line_points, Route::both, {"g1"});
        SystemParams broken = base, unbroken = base;
        broken.J = 0.4;
        unbroken.J = 0.7;
        jobs.push_back(single_sweep("fig5", "fig5a", broken, line));
        jobs.push_back(single_sweep("fig5", "fig5b", unbroken, line));
        jobs.push_back(single_sweep("fig5", "fig5c", base,
                                    detuning_sweep(wide_start, wide_stop, grid_points, Route::analytic, {"g1", "phase"}),
                                    GridAxis{"J", 0.0, 1.0, grid_points}));
        jobs.push_back(single_sweep("fig5", "fig5d", unbroken,
                                    detuning_sweep(wide_start, wide_stop, line_points, Route::analytic, {"amplitudes"})));
    } else if (id == "fig6") {
        const SweepSpec line = detuning_sweep(wide_start, wide_stop, line_points, Route::both, {"g1"});
        for (const auto& [tag, j] : {std::pair{"J0", 0.0}, std::pair{"J0p1", 0.1}, std::pair{"J0p4", 0.4}, std::pair{"J0p6", 0.6}}) {
            SystemParams p = base;
            p.J = j;
            jobs.push_back(single_sweep("fig6", std::string("fig6_") + tag, p, line));
        }
    } else if (id == "fig7a") {
        const SweepSpec line = detuning_sweep(wide_start, wide_stop, line_points, Route::both, {"g1"});
        for (const auto& [tag, k2] : {std::pair{"k2_1", 1.0}, std::pair{"k2_m1", -1.0}, std::pair{"k2_0p5", 0.5}, std::pair{"k2_0p8", 0.8}}) {
            SystemParams p = base;
            p.kappa2 = k2;
            jobs.push_back(single_sweep("fig7a", std::string("fig7a_") + tag, p, line));
        }
    } else if (id == "fig7b") {
        // delta2 = delta1 + offset; the g1 dip sits where delta1 + delta2 = g^2/wm.
        for (const auto& [tag, off] : {std::pair{"off0", 0.0}, std::pair{"offG", kerr}, std::pair{"off2G", 2.0 * kerr}}) {
            jobs.push_back(single_sweep("fig7b", std::string("fig7b_") + tag, base,
                                        detuning_sweep(wide_start, wide_stop, line_points, Route::both, {"g1"}, off)));
        }
    } else {
        throw UnknownFigure("unknown figure '" + id + "' (expected fig2, fig4, fig5, fig6, fig7a or fig7b)");
    }
    return jobs;
}

struct FigureRun {
    std::vector<std::filesystem::path> files;
    std::size_t failed_rows = 0;
};

/// Runs every job of the figure and writes one file per table into out_dir.
inline FigureRun reproduce_figure(const std::string& id, const std::filesystem::path& out_dir,
                                  const FigureOptions& opt = {}, OutputFormat format = OutputFormat::csv)
{
    const std::vector<FigureJob> jobs = figure_jobs(id);
    std::filesystem::create_directories(out_dir);
    FigureRun run;
    for (const auto& job : jobs) {
        for (const auto& [name, table] : job.run(opt)) {
            const auto path = out_dir / (name + (format == OutputFormat::csv ? ".csv" : ".json"));
            emit(table, format, path.string());
            run.files.push_back(path);
            run.failed_rows += failed_rows(table);
        }
    }
    return run;
}

} // namespace ptb
