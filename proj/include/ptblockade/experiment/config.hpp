#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "ptblockade/engine/steady_state.hpp"
#include "ptblockade/model/params.hpp"

namespace ptb {

/// Configuration problem; line is 0 for command-line overrides and missing keys.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line_, std::string key_, const std::string& why)
        : std::runtime_error(format(line_, key_, why)), line(line_), key(std::move(key_))
    {
    }
    std::size_t line;
    std::string key;

private:
    static std::string format(std::size_t line, const std::string& key, const std::string& why)
    {
        std::string where = line > 0 ? "line " + std::to_string(line) : "command line";
        return "config error (" + where + ", key '" + key + "'): " + why;
    }
};

enum class Route { analytic, numeric, both };

inline const char* to_string(Route r)
{
    return r == Route::analytic ? "analytic" : (r == Route::numeric ? "numeric" : "both");
}

/// delta2 := delta1 + offset, resolved per sweep point before dispatch.
struct ParameterLink {
    std::string target;
    std::string source;
    double offset = 0.0;
};

/// Point i of an evenly spaced grid; the last point is `stop` exactly.
inline double grid_value(double start, double stop, std::size_t points, std::size_t i)
{
    if (i + 1 == points) return stop;
    return start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
}

struct SweepSpec {
    std::string parameter = "delta1";
    double start = 0.0;
    double stop = 1.0;
    std::size_t points = 2;
    Route route = Route::both;
    std::vector<std::string> observables{"g1", "g2", "g12"};
    std::optional<ParameterLink> link;

    double value_at(std::size_t i) const { return grid_value(start, stop, points, i); }

    bool wants(const std::string& obs) const
    {
        return std::find(observables.begin(), observables.end(), obs) != observables.end();
    }
};

inline const std::vector<std::string>& sweepable_parameters()
{
    static const std::vector<std::string> names{"delta1", "delta2", "kappa1", "kappa2", "omega_m",
                                                "gamma_m", "g",      "J",      "E",      "n_th"};
    return names;
}

inline const std::vector<std::string>& known_observables()
{
    static const std::vector<std::string> names{"g1",         "g2",          "g12",  "occupations",
                                                "amplitudes", "eigenvalues", "phase"};
    return names;
}

inline double get_parameter(const SystemParams& p, const std::string& name)
{
    if (name == "delta1") return p.delta1;
    if (name == "delta2") return p.delta2;
    if (name == "kappa1") return p.kappa1;
    if (name == "kappa2") return p.kappa2;
    if (name == "omega_m") return p.omega_m;
    if (name == "gamma_m") return p.gamma_m;
    if (name == "g") return p.g;
    if (name == "J") return p.J;
    if (name == "n_th") return p.n_th;
    if (name == "E") return p.E.real();
    throw InvalidParameters("unknown parameter '" + name + "'");
}

/// Sets one named field; "E" sets the real part of the drive.
inline void set_parameter(SystemParams& p, const std::string& name, double v)
{
    if (name == "delta1") p.delta1 = v;
    else if (name == "delta2") p.delta2 = v;
    else if (name == "kappa1") p.kappa1 = v;
    else if (name == "kappa2") p.kappa2 = v;
    else if (name == "omega_m") p.omega_m = v;
    else if (name == "gamma_m") p.gamma_m = v;
    else if (name == "g") p.g = v;
    else if (name == "J") p.J = v;
    else if (name == "n_th") p.n_th = v;
    else if (name == "E") p.E = {v, p.E.imag()};
    else throw InvalidParameters("unknown parameter '" + name + "'");
}

struct NumericSettings {
    SteadyStateOptions steady{};
};

struct Config {
    SystemParams params;
    TruncationSpec trunc;
    std::optional<SweepSpec> sweep;
    NumericSettings numeric;
    /// Every setting after defaults, file values and overrides, in a fixed order.
    std::vector<std::pair<std::string, std::string>> resolved;
};

namespace detail {

// Shortest text that parses back to the same double.
inline std::string format_number(double v)
{
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct RawValue {
    std::string text;
    std::size_t line = 0;
};

inline double parse_number(const std::string& key, const RawValue& v)
{
    double out = 0.0;
    const char* first = v.text.data();
    const char* last = first + v.text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || v.text.empty()) {
        throw ConfigError(v.line, key, "unparsable number '" + v.text + "'");
    }
    return out;
}

inline std::size_t parse_count(const std::string& key, const RawValue& v)
{
    std::size_t out = 0;
    const char* first = v.text.data();
    const char* last = first + v.text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || v.text.empty()) {
        throw ConfigError(v.line, key, "expected a non-negative integer, got '" + v.text + "'");
    }
    return out;
}

inline const std::set<std::string>& known_keys()
{
    static const std::set<std::string> keys{
        "delta1",        "delta2",       "kappa1",         "kappa2",       "omega_m",
        "gamma_m",       "g",            "J",              "E",            "E_imag",
        "n_th",          "temperature_mK", "omega_m_MHz",  "gain_model",   "n1_max",
        "n2_max",        "nm_max",       "sweep_parameter", "sweep_start", "sweep_stop",
        "sweep_points",  "route",        "observables",    "link",         "link_offset",
        "residual_tol",  "steady_method", "t_max"};
    return keys;
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace detail

/// Key/value echo of a fully resolved configuration, in a fixed order; the keys are
/// the config-file keys, so the echo can be pasted back as a config.
inline std::vector<std::pair<std::string, std::string>>
describe_configuration(const SystemParams& p, const TruncationSpec& t, const SteadyStateOptions& steady,
                       const std::optional<SweepSpec>& sweep)
{
    std::vector<std::pair<std::string, std::string>> out;
    auto put = [&](const std::string& k, const std::string& v) { out.emplace_back(k, v); };
    using detail::format_number;
    put("delta1", format_number(p.delta1));
    put("delta2", format_number(p.delta2));
    put("kappa1", format_number(p.kappa1));
    put("kappa2", format_number(p.kappa2));
    put("omega_m", format_number(p.omega_m));
    put("gamma_m", format_number(p.gamma_m));
    put("g", format_number(p.g));
    put("J", format_number(p.J));
    put("E", format_number(p.E.real()));
    put("E_imag", format_number(p.E.imag()));
    put("n_th", format_number(p.n_th));
    put("gain_model", to_string(p.gain_model));
    put("n1_max", std::to_string(t.n1_max));
    put("n2_max", std::to_string(t.n2_max));
    put("nm_max", std::to_string(t.nm_max));
    put("steady_method", steady.method == SteadyStateMethod::direct ? "direct" : "integrate");
    put("residual_tol", format_number(steady.residual_tol));
    put("t_max", format_number(steady.t_max));
    if (sweep) {
        const SweepSpec& s = *sweep;
        put("sweep_parameter", s.parameter);
        put("sweep_start", format_number(s.start));
        put("sweep_stop", format_number(s.stop));
        put("sweep_points", std::to_string(s.points));
        put("route", to_string(s.route));
        std::string obs;
        for (const auto& o : s.observables) obs += (obs.empty() ? "" : ",") + o;
        put("observables", obs);
        put("link", s.link ? s.link->target + ":=" + s.link->source : "none");
        if (s.link) put("link_offset", format_number(s.link->offset));
    }
    return out;
}

/// Parses flat `key = value` text ('#' starts a comment). Overrides (typically
/// from `--key value` flags) take precedence over file values. All rates are in
/// units of kappa1.
inline Config parse_config_text(const std::string& text,
                                const std::map<std::string, std::string>& overrides = {})
{
    using detail::RawValue;
    std::map<std::string, RawValue> raw;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(lineno, detail::trim(line), "expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (!detail::known_keys().count(key)) throw ConfigError(lineno, key, "unknown key");
        if (raw.count(key)) {
            throw ConfigError(lineno, key, "duplicate key (first set on line " +
                                               std::to_string(raw[key].line) + ")");
        }
        raw[key] = RawValue{value, lineno};
    }
    for (const auto& [key, value] : overrides) {
        if (!detail::known_keys().count(key)) throw ConfigError(0, key, "unknown key");
        raw[key] = RawValue{detail::trim(value), 0};
    }

    auto has = [&](const char* k) { return raw.count(k) > 0; };
    auto number = [&](const char* k) { return detail::parse_number(k, raw.at(k)); };
    auto required = [&](const char* k) {
        if (!has(k)) throw ConfigError(0, k, "missing required key");
        return number(k);
    };
    auto line_of = [&](const char* k) { return has(k) ? raw.at(k).line : std::size_t{0}; };

    Config cfg;
    SystemParams& p = cfg.params;
    p.delta1 = required("delta1");
    p.kappa2 = required("kappa2");
    p.omega_m = required("omega_m");
    p.gamma_m = required("gamma_m");
    p.g = required("g");
    p.J = required("J");
    p.E = {required("E"), has("E_imag") ? number("E_imag") : 0.0};
    p.kappa1 = has("kappa1") ? number("kappa1") : 1.0;
    p.delta2 = has("delta2") ? number("delta2") : p.delta1;

    const bool thermal_block = has("temperature_mK") || has("omega_m_MHz");
    if (thermal_block) {
        if (has("n_th")) throw ConfigError(line_of("n_th"), "n_th", "give either n_th or temperature_mK + omega_m_MHz");
        if (!has("temperature_mK")) throw ConfigError(0, "temperature_mK", "required with omega_m_MHz");
        if (!has("omega_m_MHz")) throw ConfigError(0, "omega_m_MHz", "required with temperature_mK");
        try {
            p.n_th = thermal_occupation(number("temperature_mK"), number("omega_m_MHz"));
        } catch (const InvalidParameters& e) {
            throw ConfigError(line_of("temperature_mK"), "temperature_mK", e.what());
        }
    } else {
        p.n_th = has("n_th") ? number("n_th") : 0.0;
    }

    if (has("gain_model")) {
        const std::string& m = raw.at("gain_model").text;
        if (m == "negative_loss") p.gain_model = GainModel::negative_loss;
        else if (m == "pumped") p.gain_model = GainModel::pumped;
        else throw ConfigError(line_of("gain_model"), "gain_model", "expected negative_loss or pumped, got '" + m + "'");
    }

    auto check = [&](bool ok, const char* key, const char* why) {
        if (!ok) throw ConfigError(line_of(key), key, why);
    };
    check(std::isfinite(p.delta1), "delta1", "must be finite");
    check(p.kappa1 > 0.0, "kappa1", "must be > 0");
    check(p.omega_m > 0.0, "omega_m", "must be > 0");
    check(p.gamma_m >= 0.0, "gamma_m", "must be >= 0");
    check(p.J >= 0.0, "J", "must be >= 0");
    check(p.n_th >= 0.0, "n_th", "must be >= 0");

    TruncationSpec& t = cfg.trunc;
    if (has("n1_max")) t.n1_max = detail::parse_count("n1_max", raw.at("n1_max"));
    if (has("n2_max")) t.n2_max = detail::parse_count("n2_max", raw.at("n2_max"));
    if (has("nm_max")) t.nm_max = detail::parse_count("nm_max", raw.at("nm_max"));
    check(t.n1_max >= 2, "n1_max", "must be >= 2");
    check(t.n2_max >= 2, "n2_max", "must be >= 2");
    check(t.nm_max >= 2, "nm_max", "must be >= 2");

    if (has("residual_tol")) {
        cfg.numeric.steady.residual_tol = number("residual_tol");
        check(cfg.numeric.steady.residual_tol > 0.0, "residual_tol", "must be > 0");
    }
    if (has("t_max")) {
        cfg.numeric.steady.t_max = number("t_max");
        check(cfg.numeric.steady.t_max > 0.0, "t_max", "must be > 0");
    }
    if (has("steady_method")) {
        const std::string& m = raw.at("steady_method").text;
        if (m == "direct") cfg.numeric.steady.method = SteadyStateMethod::direct;
        else if (m == "integrate") cfg.numeric.steady.method = SteadyStateMethod::integrate;
        else throw ConfigError(line_of("steady_method"), "steady_method", "expected direct or integrate");
    }

    const bool any_sweep = has("sweep_parameter") || has("sweep_start") || has("sweep_stop") ||
                           has("sweep_points") || has("route") || has("observables") ||
                           has("link") || has("link_offset");
    if (any_sweep) {
        SweepSpec s;
        if (!has("sweep_parameter")) throw ConfigError(0, "sweep_parameter", "missing required key");
        s.parameter = raw.at("sweep_parameter").text;
        const auto& names = sweepable_parameters();
        if (std::find(names.begin(), names.end(), s.parameter) == names.end()) {
            throw ConfigError(line_of("sweep_parameter"), "sweep_parameter",
                              "'" + s.parameter + "' is not a sweepable parameter");
        }
        s.start = required("sweep_start");
        s.stop = required("sweep_stop");
        if (!has("sweep_points")) throw ConfigError(0, "sweep_points", "missing required key");
        s.points = detail::parse_count("sweep_points", raw.at("sweep_points"));
        check(s.points >= 2, "sweep_points", "must be >= 2");
        check(s.start < s.stop, "sweep_stop", "sweep_start must be < sweep_stop");
        if (has("route")) {
            const std::string& r = raw.at("route").text;
            if (r == "analytic") s.route = Route::analytic;
            else if (r == "numeric") s.route = Route::numeric;
            else if (r == "both") s.route = Route::both;
            else throw ConfigError(line_of("route"), "route", "expected analytic, numeric or both");
        }
        if (has("observables")) {
            s.observables = detail::split_list(raw.at("observables").text);
            check(!s.observables.empty(), "observables", "empty list");
            for (const auto& o : s.observables) {
                const auto& known = known_observables();
                if (std::find(known.begin(), known.end(), o) == known.end()) {
                    throw ConfigError(line_of("observables"), "observables", "unknown observable '" + o + "'");
                }
            }
        }
        if (has("link")) {
            const std::string& l = raw.at("link").text;
            if (l != "none") {
                const auto pos = l.find(":=");
                if (pos == std::string::npos) throw ConfigError(line_of("link"), "link", "expected 'target:=source' or 'none'");
                ParameterLink link{detail::trim(l.substr(0, pos)), detail::trim(l.substr(pos + 2)), 0.0};
                for (const auto* n : {&link.target, &link.source}) {
                    if (std::find(names.begin(), names.end(), *n) == names.end()) {
                        throw ConfigError(line_of("link"), "link", "'" + *n + "' is not a parameter");
                    }
                }
                if (link.target == link.source || link.target == s.parameter) {
                    throw ConfigError(line_of("link"), "link", "link target must differ from source and sweep parameter");
                }
                s.link = link;
            }
        } else if (s.parameter == "delta1" && !has("delta2")) {
            s.link = ParameterLink{"delta2", "delta1", 0.0};
        }
        if (has("link_offset")) {
            if (!s.link) throw ConfigError(line_of("link_offset"), "link_offset", "no link is active");
            s.link->offset = number("link_offset");
        }
        cfg.sweep = s;
    }

    cfg.resolved = describe_configuration(p, t, cfg.numeric.steady, cfg.sweep);
    if (thermal_block) {
        cfg.resolved.emplace_back("temperature_mK", detail::format_number(number("temperature_mK")));
        cfg.resolved.emplace_back("omega_m_MHz", detail::format_number(number("omega_m_MHz")));
    }
    return cfg;
}

inline Config parse_config(const std::string& path,
                           const std::map<std::string, std::string>& overrides = {})
{
    std::ifstream f(path);
    if (!f) throw ConfigError(0, "<file>", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), overrides);
}

} // namespace ptb
