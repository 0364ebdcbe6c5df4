#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ptblockade/analytic/amplitudes.hpp"
#include "ptblockade/analytic/correlations.hpp"
#include "ptblockade/analytic/pt_phase.hpp"
#include "ptblockade/engine/correlations.hpp"
#include "ptblockade/engine/steady_state.hpp"
#include "ptblockade/experiment/config.hpp"
#include "ptblockade/experiment/table.hpp"
#include "ptblockade/version.hpp"

namespace ptb {

/// Bits of the per-row `status` column. Zero means every requested value is defined.
namespace status {
inline constexpr int analytic_failed = 1;   // closed form or fixed point threw
inline constexpr int numeric_unconverged = 2;
inline constexpr int numeric_failed = 4;    // solver threw
inline constexpr int undefined_value = 8;   // a correlation is 0/0 or below the occupation floor
} // namespace status

struct SweepOptions {
    std::size_t threads = 0; // 0: hardware concurrency
    SteadyStateOptions steady{};
};

/// Optional second axis: each value of `parameter` is crossed with every point of
/// the primary sweep. The grid parameter varies slowest.
struct GridAxis {
    std::string parameter;
    double start = 0.0;
    double stop = 1.0;
    std::size_t points = 2;

    double value_at(std::size_t i) const { return grid_value(start, stop, points, i); }
};

namespace detail {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

inline bool wants_analytic(const SweepSpec& s) { return s.route != Route::numeric; }
inline bool wants_numeric(const SweepSpec& s) { return s.route != Route::analytic; }

inline std::vector<std::string> sweep_columns(const SweepSpec& s, const std::optional<GridAxis>& grid)
{
    std::vector<std::string> c;
    if (grid) c.push_back(grid->parameter);
    c.push_back(s.parameter);
    if (s.link) c.push_back(s.link->target);
    for (const char* g : {"g1", "g2", "g12"}) {
        if (!s.wants(g)) continue;
        if (wants_analytic(s)) c.push_back(std::string(g) + "_analytic");
        if (wants_numeric(s)) c.push_back(std::string(g) + "_numeric");
    }
    if (s.wants("occupations")) {
        if (wants_analytic(s)) c.insert(c.end(), {"n1_analytic", "n2_analytic"});
        if (wants_numeric(s)) c.insert(c.end(), {"n1_numeric", "n2_numeric", "nm_numeric"});
    }
    if (s.wants("amplitudes")) {
        for (const char* a : {"c10", "c01", "c20", "c11", "c02"}) {
            c.push_back(std::string(a) + "_re");
            c.push_back(std::string(a) + "_im");
        }
        for (const char* a : {"p10", "p01", "p20", "p11", "p02"}) c.push_back(a);
    }
    if (s.wants("eigenvalues")) {
        c.insert(c.end(), {"lin_plus_re", "lin_plus_im", "lin_minus_re", "lin_minus_im", "se_plus_re",
                           "se_plus_im", "se_minus_re", "se_minus_im"});
    }
    if (s.wants("phase")) c.push_back("phase");
    if (wants_numeric(s)) c.insert(c.end(), {"residual", "min_eig_bound"});
    c.push_back("status");
    return c;
}

/// Amplitudes by the closed form that matches the parameters: balanced gain, two
/// lossy cavities, or otherwise the fixed point of the amplitude equations without
/// the E* feedback (the same approximation the closed forms make).
inline AmplitudeSet analytic_amplitudes(const SystemParams& p)
{
    if (p.delta2 == p.delta1 && p.kappa2 == p.kappa1) return pt_amplitudes(p);
    if (p.delta2 == p.delta1 && p.kappa2 == -p.kappa1) return passive_amplitudes(p);
    return amplitude_fixed_point(p, false);
}

/// Per-worker numeric state; the operators depend only on the truncation.
struct NumericWorkspace {
    explicit NumericWorkspace(const TruncationSpec& t) : trunc(t), ops(build_operator_set(t)), moments(ops) {}
    TruncationSpec trunc;
    OperatorSet ops;
    MomentOperators moments;
};

class RowWriter {
public:
    RowWriter(const std::map<std::string, std::size_t>& index, std::vector<double>& row)
        : index_(index), row_(row)
    {
    }
    void set(const std::string& col, double v) { row_[index_.at(col)] = v; }
    void set(const std::string& col, const std::optional<double>& v) { set(col, v ? *v : nan); }

private:
    const std::map<std::string, std::size_t>& index_;
    std::vector<double>& row_;
};

inline std::vector<double> evaluate_point(const SweepSpec& s, const SystemParams& p,
                                          const std::map<std::string, std::size_t>& index,
                                          NumericWorkspace* ws, const SteadyStateOptions& steady)
{
    std::vector<double> row(index.size(), nan);
    RowWriter w(index, row);
    int st = 0;
    auto undefined_check = [&](const std::optional<double>& v, const char* obs) {
        if (s.wants(obs) && !v) st |= status::undefined_value;
    };

    const bool want_amps = s.wants("amplitudes");
    const bool want_analytic_g = wants_analytic(s) && (s.wants("g1") || s.wants("g2") || s.wants("g12") ||
                                                       s.wants("occupations"));
    if (want_analytic_g || want_amps) {
        try {
            const AmplitudeSet a = analytic_amplitudes(p);
            if (want_analytic_g) {
                const CorrelationRecord r = correlations_from_amplitudes(a, CorrelationForm::exact);
                for (const auto& [obs, v] : {std::pair{"g1", r.g1}, std::pair{"g2", r.g2}, std::pair{"g12", r.g12}}) {
                    if (!s.wants(obs)) continue;
                    w.set(std::string(obs) + "_analytic", v);
                    undefined_check(v, obs);
                }
                if (s.wants("occupations")) {
                    w.set("n1_analytic", r.n1);
                    w.set("n2_analytic", r.n2);
                }
            }
            if (want_amps) {
                const char* names[] = {"c10", "c01", "c20", "c11", "c02"};
                const char* probs[] = {"p10", "p01", "p20", "p11", "p02"};
                const auto v = a.as_array();
                for (std::size_t k = 0; k < 5; ++k) {
                    w.set(std::string(names[k]) + "_re", v[k].real());
                    w.set(std::string(names[k]) + "_im", v[k].imag());
                    w.set(probs[k], std::norm(v[k]));
                }
            }
        } catch (const std::exception&) {
            st |= status::analytic_failed;
        }
    }

    if (s.wants("eigenvalues") || s.wants("phase")) {
        try {
            const PTPhase lin = pt_eigenvalues(p, Subspace::linear);
            if (s.wants("eigenvalues")) {
                const PTPhase se = pt_eigenvalues(p, Subspace::single_excitation);
                w.set("lin_plus_re", lin.eigenvalues[0].real());
                w.set("lin_plus_im", lin.eigenvalues[0].imag());
                w.set("lin_minus_re", lin.eigenvalues[1].real());
                w.set("lin_minus_im", lin.eigenvalues[1].imag());
                w.set("se_plus_re", se.eigenvalues[0].real());
                w.set("se_plus_im", se.eigenvalues[0].imag());
                w.set("se_minus_re", se.eigenvalues[1].real());
                w.set("se_minus_im", se.eigenvalues[1].imag());
            }
            if (s.wants("phase")) w.set("phase", static_cast<double>(phase_code(lin.classification)));
        } catch (const std::exception&) {
            st |= status::analytic_failed;
        }
    }

    if (wants_numeric(s)) {
        try {
            const SteadyStateResult ss = steady_state(make_liouvillian(p, ws->ops), ws->trunc, steady);
            w.set("residual", ss.residual);
            w.set("min_eig_bound", ss.min_eig_bound);
            if (!ss.converged) {
                st |= status::numeric_unconverged;
            } else {
                const CorrelationRecord r = correlations(ss.rho, ws->moments);
                for (const auto& [obs, v] : {std::pair{"g1", r.g1}, std::pair{"g2", r.g2}, std::pair{"g12", r.g12}}) {
                    if (!s.wants(obs)) continue;
                    w.set(std::string(obs) + "_numeric", v);
                    undefined_check(v, obs);
                }
                if (s.wants("occupations")) {
                    w.set("n1_numeric", r.n1);
                    w.set("n2_numeric", r.n2);
                    w.set("nm_numeric", r.nm);
                }
            }
        } catch (const std::exception&) {
            st |= status::numeric_failed;
        }
    }
    w.set("status", static_cast<double>(st));
    return row;
}

/// max |a - n| / max(|a|, |n|) over rows and correlation columns where both are
/// finite and not both zero; NaN when no pair qualifies.
inline double max_rel_disagreement(const ResultTable& t)
{
    double worst = nan;
    for (const char* g : {"g1", "g2", "g12"}) {
        const std::string a = std::string(g) + "_analytic", n = std::string(g) + "_numeric";
        if (!t.has_column(a) || !t.has_column(n)) continue;
        const std::size_t ia = t.column(a), in = t.column(n);
        for (const auto& r : t.rows) {
            const double x = r[ia], y = r[in];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            const double scale = std::max(std::abs(x), std::abs(y));
            if (scale == 0.0) continue;
            const double d = std::abs(x - y) / scale;
            if (!(worst >= d)) worst = d;
        }
    }
    return worst;
}

/// Runs job(i) for i in [0, n) on `threads` workers; each worker owns one State.
/// The first exception is rethrown after all workers stop.
template <class State, class MakeState, class Job>
void parallel_for(std::size_t n, std::size_t threads, MakeState make_state, Job job)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        try {
            State state = make_state();
            for (std::size_t i = next++; i < n; i = next++) job(state, i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
}

} // namespace detail

/// Evaluates the requested observables at every point of the sweep (crossed with
/// `grid` when given). Rows are ordered by index, one per point; failures show up in
/// the status column only. Output does not depend on the thread count.
inline ResultTable run_sweep(const SweepSpec& spec, const SystemParams& params, const TruncationSpec& trunc,
                             const SweepOptions& opt = {}, const std::optional<GridAxis>& grid = std::nullopt)
{
    if (spec.points < 2 || !(spec.start < spec.stop)) {
        throw InvalidParameters("run_sweep: need points >= 2 and start < stop");
    }
    if (grid && (grid->points < 2 || !(grid->start < grid->stop) || grid->parameter == spec.parameter)) {
        throw InvalidParameters("run_sweep: invalid grid axis");
    }
    trunc.validate();

    ResultTable t;
    t.columns = detail::sweep_columns(spec, grid);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < t.columns.size(); ++i) index[t.columns[i]] = i;

    const std::size_t outer = grid ? grid->points : 1;
    const std::size_t n = outer * spec.points;
    std::vector<SystemParams> points(n, params);
    for (std::size_t i = 0; i < n; ++i) {
        SystemParams& p = points[i];
        if (grid) set_parameter(p, grid->parameter, grid->value_at(i / spec.points));
        set_parameter(p, spec.parameter, spec.value_at(i % spec.points));
        if (spec.link) set_parameter(p, spec.link->target, get_parameter(p, spec.link->source) + spec.link->offset);
    }

    t.rows.resize(n);
    const bool numeric = detail::wants_numeric(spec);
    using Workspace = std::optional<detail::NumericWorkspace>;
    detail::parallel_for<Workspace>(
        n, opt.threads,
        [&] { return numeric ? Workspace(std::in_place, trunc) : Workspace(); },
        [&](Workspace& ws, std::size_t i) {
            std::vector<double> row =
                detail::evaluate_point(spec, points[i], index, ws ? &*ws : nullptr, opt.steady);
            if (grid) row[index.at(grid->parameter)] = get_parameter(points[i], grid->parameter);
            row[index.at(spec.parameter)] = get_parameter(points[i], spec.parameter);
            if (spec.link) row[index.at(spec.link->target)] = get_parameter(points[i], spec.link->target);
            t.rows[i] = std::move(row);
        });

    std::size_t flagged = 0;
    const std::size_t is = index.at("status");
    for (const auto& r : t.rows) flagged += r[is] != 0.0;

    t.metadata.emplace_back("tool", "ptblockade");
    t.metadata.emplace_back("version", version);
    for (const auto& kv : describe_configuration(params, trunc, opt.steady, spec)) t.metadata.push_back(kv);
    if (grid) {
        t.metadata.emplace_back("grid_parameter", grid->parameter);
        t.metadata.emplace_back("grid_start", detail::format_number(grid->start));
        t.metadata.emplace_back("grid_stop", detail::format_number(grid->stop));
        t.metadata.emplace_back("grid_points", std::to_string(grid->points));
    }
    t.metadata.emplace_back("analytic_form", "exact");
    t.metadata.emplace_back("rows", std::to_string(t.rows.size()));
    t.metadata.emplace_back("flagged_rows", std::to_string(flagged));
    if (spec.route == Route::both) {
        t.metadata.emplace_back("max_rel_disagreement", detail::number17(detail::max_rel_disagreement(t)));
    }
    return t;
}

/// Rows whose status carries any of the failure bits (undefined values excluded).
inline std::size_t failed_rows(const ResultTable& t)
{
    const std::size_t is = t.column("status");
    std::size_t n = 0;
    for (const auto& r : t.rows) {
        const int st = static_cast<int>(r[is]);
        n += (st & (status::analytic_failed | status::numeric_unconverged | status::numeric_failed)) != 0;
    }
    return n;
}

} // namespace ptb
