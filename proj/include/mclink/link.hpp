#pragma once

#include <optional>
#include <vector>

#include "mclink/receiver.hpp"
#include "mclink/transmitter.hpp"

namespace mclink {

struct GaussFit {
    GaussPulse pulse;
    double residual{};  ///< max |fit - data| over the window, relative to the data peak
};

/// Least-squares fit of C0 / sqrt(2 pi sigma2) exp(-(t - mu)^2 / (2 sigma2)) to the samples of
/// trace within [t_lo, t_hi], started from the window's moments.
GaussFit fit_gaussian(const TimeSeries& trace, double t_lo, double t_hi);

struct LinkConfig {
    double dx_target = 2e-6;  ///< oracle spacing [m]
    double cfl = 0.25;
    double sample_dt = 1e-3;  ///< analytic receiver grid [s]
    Method method = Method::appro1;
    double fit_warning = 0.2;  ///< residual above which the analytic receiver is flagged
};

struct BitOutcome {
    double window_start{};
    double window_end{};
    std::optional<GaussFit> fit;  ///< empty when the window held no signal
    bool fit_warning{};
    bool demodulated{};
    double width{};  ///< duration of the output plateau inside the window [s]
};

struct LinkResult {
    TimeSeries transmitted;        ///< C_Y at the Reaction III outlet
    TimeSeries received;           ///< C_Y after the propagation channel
    TimeSeries output;             ///< analytic receiver output C_O
    TimeSeries oracle_output;      ///< finite-difference receiver output C_O
    std::vector<BitOutcome> bits;
    double plateau{};              ///< amp_dilution * C_Amp_VII
};

/// Transmitter -> straight convection-diffusion channel -> receiver.
LinkResult run_link(const TransmitterDesign& tx, double channel_length, const ReceiverDesign& rx,
                    const FlowEnv& env, const std::vector<Bit>& bits, const LinkConfig& cfg = {});

}  // namespace mclink
