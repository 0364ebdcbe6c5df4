#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ptblockade/engine/correlations.hpp"
#include "ptblockade/engine/steady_state.hpp"

namespace ptb {

class CertificationFailure : public std::runtime_error {
public:
    CertificationFailure(const std::string& what, std::string mode_)
        : std::runtime_error(what), mode(std::move(mode_))
    {
    }
    std::string mode; // "n1_max", "n2_max" or "nm_max"
};

struct CertifyOptions {
    double observable_tol = 1e-3;         // relative change of g1, g2, g12
    TruncationSpec cap{6, 6, 8};          // no cutoff may exceed these
    SteadyStateOptions steady{};
};

struct CertificationStep {
    TruncationSpec trunc;
    CorrelationRecord record;
    bool converged = false;
};

struct CertificationReport {
    TruncationSpec certified;
    std::vector<CertificationStep> history;
};

namespace detail {

inline double relative_change(const std::optional<double>& a, const std::optional<double>& b)
{
    if (!a && !b) return 0.0;
    if (!a || !b) return std::numeric_limits<double>::infinity();
    const double scale = std::max(std::abs(*a), std::abs(*b));
    return scale > 0.0 ? std::abs(*a - *b) / scale : 0.0;
}

inline double max_relative_change(const CorrelationRecord& a, const CorrelationRecord& b)
{
    return std::max({relative_change(a.g1, b.g1), relative_change(a.g2, b.g2),
                     relative_change(a.g12, b.g12)});
}

inline std::size_t& cutoff(TruncationSpec& t, int mode)
{
    return mode == 0 ? t.n1_max : (mode == 1 ? t.n2_max : t.nm_max);
}

inline const char* cutoff_name(int mode)
{
    return mode == 0 ? "n1_max" : (mode == 1 ? "n2_max" : "nm_max");
}

} // namespace detail

/// Raises each cutoff by one in turn; a raise that moves any correlation by more
/// than observable_tol (relative) is kept and the sweep repeats. Returns once no
/// single raise matters. Throws CertificationFailure naming the mode whose raise to
/// the cap still moved the correlations.
inline CertificationReport truncation_certify_report(const SystemParams& p, const TruncationSpec& base,
                                                     const CertifyOptions& opt = {})
{
    base.validate();
    auto evaluate = [&](const TruncationSpec& t) {
        const OperatorSet ops = build_operator_set(t);
        const SteadyStateResult ss = steady_state(make_liouvillian(p, ops), t, opt.steady);
        CertificationStep step{t, correlations(ss.rho, MomentOperators(ops)), ss.converged};
        step.record.params = p;
        return step;
    };

    CertificationReport rep;
    TruncationSpec current = base;
    TruncationSpec cap = opt.cap;
    rep.history.push_back(evaluate(current));
    CorrelationRecord reference = rep.history.back().record;
    for (bool raised = true; raised;) {
        raised = false;
        for (int mode = 0; mode < 3; ++mode) {
            TruncationSpec trial = current;
            if (++detail::cutoff(trial, mode) > detail::cutoff(cap, mode)) continue;
            CertificationStep step = evaluate(trial);
            const double change = detail::max_relative_change(reference, step.record);
            const bool matters = change > opt.observable_tol || !step.converged;
            rep.history.push_back(step);
            if (!matters) continue;
            if (detail::cutoff(trial, mode) == detail::cutoff(cap, mode)) {
                std::ostringstream os;
                os << "truncation_certify: " << detail::cutoff_name(mode) << " reached the cap "
                   << cap.to_string() << " with correlations still moving (relative change "
                   << change << " > " << opt.observable_tol << ")";
                throw CertificationFailure(os.str(), detail::cutoff_name(mode));
            }
            current = trial;
            reference = step.record;
            raised = true;
        }
    }
    rep.certified = current;
    return rep;
}

inline TruncationSpec truncation_certify(const SystemParams& p, const TruncationSpec& base,
                                         double observable_tol, const CertifyOptions& opt = {})
{
    CertifyOptions o = opt;
    o.observable_tol = observable_tol;
    return truncation_certify_report(p, base, o).certified;
}

} // namespace ptb
