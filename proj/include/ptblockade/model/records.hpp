#pragma once

#include <limits>
#include <optional>

#include "ptblockade/model/params.hpp"

namespace ptb {

/// Equal-time second-order correlations at one parameter point. An empty optional
/// means undefined (occupation below the floor, or 0/0 in the amplitude formulas).
struct CorrelationRecord {
    std::optional<double> g1;
    std::optional<double> g2;
    std::optional<double> g12;
    /// From amplitudes only: the 2|C02|^2/|C01|^4 form that the reduced g12 equals
    /// when the closed-form amplitudes are used.
    std::optional<double> g12_via_g2;

    double n1 = std::numeric_limits<double>::quiet_NaN();
    double n2 = std::numeric_limits<double>::quiet_NaN();
    double nm = std::numeric_limits<double>::quiet_NaN();

    SystemParams params;
};

} // namespace ptb
