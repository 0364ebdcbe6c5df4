// Command-line front end: sweeps from a config file, figure presets, truncation
// certification and PT-phase scans.
//
// Exit codes: 0 success, 2 configuration error, 3 per-point failures (the table is
// still written), 1 anything else.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ptblockade/engine/certify.hpp"
#include "ptblockade/experiment/config.hpp"
#include "ptblockade/experiment/figures.hpp"
#include "ptblockade/experiment/sweep.hpp"
#include "ptblockade/version.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_point_failures = 3;

struct Overrides {
    std::map<std::string, std::string> values;

    /// One `--key value` flag per config key, except those listed in `skip`.
    void attach(CLI::App& cmd, const std::set<std::string>& skip = {})
    {
        for (const auto& key : ptb::detail::known_keys()) {
            if (skip.count(key)) continue;
            cmd.add_option_function<std::string>(
                "--" + key, [this, key](const std::string& v) { values[key] = v; },
                "override '" + key + "' from the config file");
        }
    }
};

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ptb::ConfigError(0, "config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Config file text, or the reference parameter set when no file is given.
std::string config_text(const std::string& path)
{
    if (!path.empty()) return read_file(path);
    std::string text;
    const ptb::SystemParams p = ptb::SystemParams::reference();
    for (const auto& [k, v] : ptb::describe_configuration(p, ptb::TruncationSpec{}, {}, std::nullopt)) {
        text += k + " = " + v + "\n";
    }
    return text;
}

ptb::OutputFormat parse_format(const std::string& f)
{
    if (f == "csv") return ptb::OutputFormat::csv;
    if (f == "json") return ptb::OutputFormat::json;
    throw ptb::ConfigError(0, "format", "expected csv or json, got '" + f + "'");
}

void write_table(const ptb::ResultTable& t, ptb::OutputFormat format, const std::string& out)
{
    if (out == "-") {
        std::cout << (format == ptb::OutputFormat::csv ? ptb::to_csv(t) : ptb::to_json(t));
        std::cout.flush();
    } else {
        ptb::emit(t, format, out);
    }
}

int report_rows(const ptb::ResultTable& t)
{
    const std::size_t failed = ptb::failed_rows(t);
    if (failed > 0) {
        std::cerr << "ptblockade: " << failed << " of " << t.rows.size()
                  << " points failed (see the status column)\n";
        return exit_point_failures;
    }
    return 0;
}

/// Parses "start:stop:points".
ptb::GridAxis parse_range(const std::string& name, const std::string& text)
{
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? a : text.find(':', a + 1);
    if (b == std::string::npos) throw ptb::ConfigError(0, name, "expected start:stop:points, got '" + text + "'");
    auto field = [&](const std::string& s) { return ptb::detail::RawValue{s, 0}; };
    ptb::GridAxis g{name, ptb::detail::parse_number(name, field(text.substr(0, a))),
                    ptb::detail::parse_number(name, field(text.substr(a + 1, b - a - 1))),
                    ptb::detail::parse_count(name, field(text.substr(b + 1)))};
    if (g.points < 2 || !(g.start < g.stop)) throw ptb::ConfigError(0, name, "need start < stop and points >= 2");
    return g;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Photon-blockade sweeps for a gain-loss coupled-cavity optomechanical system"};
    app.set_version_flag("--version", std::string(ptb::version));
    app.require_subcommand(1);

    std::size_t threads = 0;
    std::string format_name = "csv";

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run the sweep described by a config file");
    std::string sweep_config, sweep_out = "-";
    Overrides sweep_overrides;
    sweep->add_option("--config", sweep_config, "config file")->required();
    sweep->add_option("--out", sweep_out, "output file, '-' for stdout");
    sweep->add_option("--format", format_name, "csv or json");
    sweep->add_option("--threads", threads, "worker threads (0: all cores)");
    sweep_overrides.attach(*sweep);

    // figure
    auto* figure = app.add_subcommand("figure", "reproduce a figure preset");
    std::string figure_id, figure_out = ".";
    figure->add_option("id", figure_id, "fig2, fig4, fig5, fig6, fig7a or fig7b")->required();
    figure->add_option("--out", figure_out, "output directory");
    figure->add_option("--format", format_name, "csv or json");
    figure->add_option("--threads", threads, "worker threads (0: all cores)");

    // certify
    auto* certify = app.add_subcommand("certify", "find a Fock truncation the correlations do not depend on");
    std::string certify_config, cap_text = "6,6,8";
    double certify_tol = 1e-3;
    Overrides certify_overrides;
    certify->add_option("--config", certify_config, "config file")->required();
    certify->add_option("--tol", certify_tol, "relative tolerance on g1, g2, g12");
    certify->add_option("--cap", cap_text, "largest n1_max,n2_max,nm_max to try");
    certify_overrides.attach(*certify);

    // phase
    auto* phase = app.add_subcommand("phase", "classify the PT phase over a range of J");
    std::string phase_range = "0:1:201", phase_config, phase_out = "-";
    Overrides phase_overrides;
    phase->add_option("--J", phase_range, "start:stop:points");
    phase->add_option("--config", phase_config, "config file (default: reference parameters)");
    phase->add_option("--out", phase_out, "output file, '-' for stdout");
    phase->add_option("--format", format_name, "csv or json");
    phase_overrides.attach(*phase, {"J"});

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        const ptb::OutputFormat format = parse_format(format_name);

        if (*sweep) {
            const ptb::Config cfg = ptb::parse_config_text(read_file(sweep_config), sweep_overrides.values);
            if (!cfg.sweep) throw ptb::ConfigError(0, "sweep_parameter", "config describes no sweep");
            const ptb::ResultTable t =
                ptb::run_sweep(*cfg.sweep, cfg.params, cfg.trunc, {threads, cfg.numeric.steady});
            write_table(t, format, sweep_out);
            return report_rows(t);
        }

        if (*figure) {
            ptb::FigureOptions opt;
            opt.threads = threads;
            const ptb::FigureRun run = ptb::reproduce_figure(figure_id, figure_out, opt, format);
            for (const auto& f : run.files) std::cout << f.string() << "\n";
            if (run.failed_rows > 0) {
                std::cerr << "ptblockade: " << run.failed_rows << " points failed (see the status columns)\n";
                return exit_point_failures;
            }
            return 0;
        }

        if (*certify) {
            const ptb::Config cfg = ptb::parse_config_text(read_file(certify_config), certify_overrides.values);
            ptb::CertifyOptions opt;
            opt.observable_tol = certify_tol;
            opt.steady = cfg.numeric.steady;
            const auto caps = ptb::detail::split_list(cap_text);
            if (caps.size() != 3) throw ptb::ConfigError(0, "cap", "expected n1_max,n2_max,nm_max");
            opt.cap = {ptb::detail::parse_count("cap", {caps[0], 0}), ptb::detail::parse_count("cap", {caps[1], 0}),
                       ptb::detail::parse_count("cap", {caps[2], 0})};
            auto print_step = [](const ptb::CertificationStep& s) {
                auto show = [](const std::optional<double>& v) { return v ? ptb::detail::number17(*v) : "undefined"; };
                std::cout << s.trunc.to_string() << "  g1=" << show(s.record.g1) << "  g2=" << show(s.record.g2)
                          << "  g12=" << show(s.record.g12) << (s.converged ? "" : "  (not converged)") << "\n";
            };
            try {
                const ptb::CertificationReport rep = ptb::truncation_certify_report(cfg.params, cfg.trunc, opt);
                for (const auto& s : rep.history) print_step(s);
                std::cout << "certified " << rep.certified.to_string() << "\n";
                return 0;
            } catch (const ptb::CertificationFailure& e) {
                std::cerr << "ptblockade: " << e.what() << "\n";
                return exit_point_failures;
            }
        }

        if (*phase) {
            const ptb::Config cfg = ptb::parse_config_text(config_text(phase_config), phase_overrides.values);
            const ptb::GridAxis j = parse_range("J", phase_range);
            ptb::SweepSpec s{"J", j.start, j.stop, j.points, ptb::Route::analytic, {"eigenvalues", "phase"},
                             std::nullopt};
            const ptb::ResultTable t = ptb::run_sweep(s, cfg.params, cfg.trunc, {threads, cfg.numeric.steady});
            write_table(t, format, phase_out);
            return report_rows(t);
        }
    } catch (const ptb::ConfigError& e) {
        std::cerr << "ptblockade: " << e.what() << "\n";
        return exit_config;
    } catch (const ptb::UnknownFigure& e) {
        std::cerr << "ptblockade: " << e.what() << "\n";
        return exit_config;
    } catch (const ptb::InvalidParameters& e) {
        std::cerr << "ptblockade: invalid parameters: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "ptblockade: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
