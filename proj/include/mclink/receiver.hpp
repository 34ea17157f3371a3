#pragma once

#include "mclink/flow.hpp"
#include "mclink/oracle.hpp"
#include "mclink/signals.hpp"
#include "mclink/transport.hpp"

namespace mclink {

struct ReceiverDesign {
    double L_T{};  ///< T-junction branch [m]
    double L_C{};  ///< conjunction [m]
    double L_4{};  ///< Reaction IV channel [m]
    double L_5{};  ///< Reaction V channel [m]
    double C_ThL_VI{};
    double C_Amp_VII{};
    double k{};
    double presence_tau = 1e-3;        ///< residual level that triggers amplification [mol/m^3]
    double amp_dilution = 1.0 / 3.0;   ///< fraction of C_Amp_VII reaching Reaction V
};

enum class Method { appro1, appro2 };

void validate(const ReceiverDesign& d);

struct TJunctionOutput {
    GaussPulse pulse;   ///< halved and delayed received pulse
    double threshold{};  ///< halved ThL supply, present for t >= delay
    double delay{};      ///< (L_T + L_C) / v_eff
};

TJunctionOutput t_junction_outlet(const ReceiverDesign& d, const FlowEnv& env,
                                  const GaussPulse& pulse);

/// Residual C_Y after the thresholding channel, on the absolute time grid t.
TimeSeries reaction4_outlet(const ReceiverDesign& d, const FlowEnv& env, const GaussPulse& pulse,
                            Method method, const Eigen::ArrayXd& t,
                            const QuadratureConfig& quad = {});

/// Rectangular C_O: amp_dilution * C_Amp_VII wherever the delayed residual exceeds presence_tau.
TimeSeries reaction5_output(const ReceiverDesign& d, const FlowEnv& env, const TimeSeries& residual);

TimeSeries demodulate(const ReceiverDesign& d, const FlowEnv& env, const GaussPulse& pulse,
                      Method method, const Eigen::ArrayXd& t, const QuadratureConfig& quad = {});

/// Time from the receiver inlet to the Reaction V outlet.
double receiver_delay(const ReceiverDesign& d, const FlowEnv& env);

struct ReceiverOracleResult {
    TimeSeries residual;        ///< C_Y at the Reaction IV outlet
    TimeSeries output;          ///< C_O at the Reaction V outlet
    TimeSeries catalyst_out;    ///< C_Y at the Reaction V outlet
};

/// Finite-difference cross-check of Reactions IV and V driven by an arbitrary received trace.
ReceiverOracleResult receiver_oracle(const ReceiverDesign& d, const FlowEnv& env,
                                     const TimeSeries& received, double dx_target = 2e-6);

}  // namespace mclink
