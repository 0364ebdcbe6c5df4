#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "ptblockade/analytic/amplitudes.hpp"
#include "ptblockade/model/records.hpp"

namespace ptb {

enum class CorrelationForm { exact, approximate };

namespace detail {

// num / den with den == 0 mapped to undefined (num == 0) or an error (num != 0).
inline std::optional<double> ratio(double num, double den, const char* which)
{
    if (den > 0.0) return num / den;
    if (num == 0.0) return std::nullopt;
    throw std::domain_error(std::string("correlations_from_amplitudes: ") + which +
                            " undefined, one-photon amplitude is zero while the two-photon "
                            "amplitude is not");
}

} // namespace detail

/// g1, g2, g12 at zero delay from the two-photon ansatz. `exact` normalizes by the
/// full mean photon numbers (|C10|^2 + |C11|^2 + 2|C20|^2 etc.); `approximate`
/// keeps only the leading one-photon terms.
inline CorrelationRecord correlations_from_amplitudes(const AmplitudeSet& a, CorrelationForm form)
{
    const double p10 = std::norm(a.c10), p01 = std::norm(a.c01);
    const double p20 = std::norm(a.c20), p11 = std::norm(a.c11), p02 = std::norm(a.c02);
    if (p10 == 0.0 && p01 == 0.0 && p20 == 0.0 && p11 == 0.0 && p02 == 0.0) {
        throw std::invalid_argument("correlations_from_amplitudes: all amplitudes are zero");
    }

    CorrelationRecord r;
    r.n1 = p10 + p11 + 2.0 * p20;
    r.n2 = p01 + p11 + 2.0 * p02;
    if (form == CorrelationForm::exact) {
        r.g1 = detail::ratio(2.0 * p20, r.n1 * r.n1, "g1");
        r.g2 = detail::ratio(2.0 * p02, r.n2 * r.n2, "g2");
        r.g12 = detail::ratio(p11, r.n1 * r.n2, "g12");
    } else {
        r.g1 = detail::ratio(2.0 * p20, p10 * p10, "g1");
        r.g2 = detail::ratio(2.0 * p02, p01 * p01, "g2");
        r.g12 = detail::ratio(p11, p10 * p01, "g12");
    }
    r.g12_via_g2 = detail::ratio(2.0 * p02, p01 * p01, "g12 (via g2 form)");
    return r;
}

} // namespace ptb
