#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptb {

class InvalidParameters : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// How the active cavity's gain enters the master equation.
enum class GainModel {
    negative_loss, ///< -kappa2 * D[a2], a loss channel with negative rate (the default)
    pumped,        ///< +kappa2 * D[a2^dagger], an incoherent pump; for sensitivity studies
};

inline const char* to_string(GainModel m)
{
    return m == GainModel::pumped ? "pumped" : "negative_loss";
}

/// Rates, detunings and couplings of the driven double-cavity optomechanical model,
/// all in units of kappa1. kappa2 is signed: positive is gain on cavity 2,
/// negative turns cavity 2 into a second lossy cavity.
struct SystemParams {
    double delta1 = 0.0;
    double delta2 = 0.0;
    double kappa1 = 1.0;
    double kappa2 = 1.0;
    double omega_m = 100.0;
    double gamma_m = 1e-4;
    double g = 3.0;
    double J = 0.5;
    std::complex<double> E{0.01, 0.0};
    double n_th = 0.0;
    GainModel gain_model = GainModel::negative_loss;

    /// g / omega_m; the closed-form layer assumes this is small.
    double weak_coupling_ratio() const { return g / omega_m; }

    /// g^2 / omega_m, the single-photon Kerr shift.
    double kerr_shift() const { return g * g / omega_m; }

    void validate() const
    {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(delta1) || !finite(delta2) || !finite(kappa1) || !finite(kappa2) ||
            !finite(omega_m) || !finite(gamma_m) || !finite(g) || !finite(J) ||
            !finite(E.real()) || !finite(E.imag()) || !finite(n_th)) {
            throw InvalidParameters("SystemParams: all parameters must be finite");
        }
        if (!(kappa1 > 0.0)) throw InvalidParameters("SystemParams: kappa1 must be > 0");
        if (!(omega_m > 0.0)) throw InvalidParameters("SystemParams: omega_m must be > 0");
        if (gamma_m < 0.0) throw InvalidParameters("SystemParams: gamma_m must be >= 0");
        if (J < 0.0) throw InvalidParameters("SystemParams: J must be >= 0");
        if (n_th < 0.0) throw InvalidParameters("SystemParams: n_th must be >= 0");
    }

    /// Reference working point: J = kappa1/2, g = 3, omega_m = 100, E = 0.01,
    /// gamma_m = omega_m / 1e6, n_th from T = 1 mK.
    static SystemParams reference();
};

/// Fock-space cutoffs per mode: cavity 1, cavity 2, mechanics.
struct TruncationSpec {
    std::size_t n1_max = 3;
    std::size_t n2_max = 3;
    std::size_t nm_max = 4;

    std::size_t dimension() const { return (n1_max + 1) * (n2_max + 1) * (nm_max + 1); }

    void validate() const
    {
        if (n1_max < 2 || n2_max < 2 || nm_max < 2) {
            throw InvalidParameters("TruncationSpec: every cutoff must be >= 2 (got " +
                                    to_string() + ")");
        }
    }

    std::string to_string() const
    {
        return "(" + std::to_string(n1_max) + "," + std::to_string(n2_max) + "," +
               std::to_string(nm_max) + ")";
    }

    bool operator==(const TruncationSpec&) const = default;
};

namespace constants {
// SI values, exact since the 2019 redefinition.
inline constexpr double planck = 6.62607015e-34;    // J s
inline constexpr double boltzmann = 1.380649e-23;   // J / K
} // namespace constants

/// Bose occupation 1 / (exp(h f / k_B T) - 1) for a mode of frequency
/// omega = 2 pi f, with f given in MHz and T in mK.
inline double thermal_occupation(double temperature_mK, double frequency_MHz)
{
    if (!(frequency_MHz > 0.0)) throw InvalidParameters("thermal_occupation: frequency must be > 0");
    if (temperature_mK < 0.0) throw InvalidParameters("thermal_occupation: temperature must be >= 0");
    if (temperature_mK == 0.0) return 0.0;
    const double x = constants::planck * frequency_MHz * 1e6 /
                     (constants::boltzmann * temperature_mK * 1e-3);
    return 1.0 / std::expm1(x);
}

inline SystemParams SystemParams::reference()
{
    SystemParams p;
    p.kappa1 = 1.0;
    p.kappa2 = 1.0;
    p.omega_m = 100.0;
    p.gamma_m = p.omega_m / 1e6;
    p.J = 0.5;
    p.g = 3.0;
    p.E = {0.01, 0.0};
    p.delta1 = p.delta2 = 0.0;
    // kappa1 = 2 pi x 1 MHz, so omega_m = 2 pi x 100 MHz
    p.n_th = thermal_occupation(1.0, 100.0);
    return p;
}

} // namespace ptb
