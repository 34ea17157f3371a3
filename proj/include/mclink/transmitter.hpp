#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mclink/flow.hpp"
#include "mclink/oracle.hpp"
#include "mclink/signals.hpp"

namespace mclink {

/// Folded Reaction II channel. Lengths in metres.
struct SerpentineSpec {
    double L21{};
    double L22{};
    double L23{};
    double Ls{};  ///< bend width
    double Hs{};  ///< bend height
    int delay_lines{};
};

/// One transmitted bit: a rectangular injection starting at onset.
struct Bit {
    double onset{};  ///< [s]
    double T_on{};   ///< [s]
};

struct TransmitterDesign {
    double L_Y{};  ///< Y-junction branch length [m]
    double L_1{};  ///< Reaction I channel [m]
    double L_3{};  ///< Reaction III channel [m]
    double L_C{};  ///< conjunction [m]
    SerpentineSpec serpentine;
    std::optional<double> L_2;  ///< equivalent Reaction II length; overrides the serpentine
    double C_Sy0_I{};
    double C_X0_II{};
    double C_X0_III{};
    double C_Sp0_IV{};
    double k{};        ///< shared rate constant [m^3/(mol s)]
    double T_on{};     ///< injection duration of a single bit [s]
};

enum class SearchFrame {
    junction_origin,  ///< candidate length measured from the Y-junction inlet
    channel,          ///< candidate length replaces L_2 in the full front-end composition
};

struct OptimizerTolerances {
    double zeta = 1.0;
    double delta = 0.13;
    double epsilon = 1e-3;
    double tau = 1e-3;
    double dt = 1e-3;                        ///< trace grid for differentiation and scans [s]
    std::optional<double> peak_time_override;  ///< replaces the slope search [s, absolute]
    SearchFrame frame = SearchFrame::junction_origin;
};

void validate(const SerpentineSpec& s);
void validate(const TransmitterDesign& d);
void validate(const OptimizerTolerances& tol);

double serpentine_equivalent_length(const SerpentineSpec& s);
/// L_2 of the design: the explicit value when given, else the serpentine equivalent.
double reaction2_length(const TransmitterDesign& d);

double y_junction_delay(const TransmitterDesign& d, const FlowEnv& env);
double conjunction_delay(const TransmitterDesign& d, const FlowEnv& env);

RectPulse y_junction_outlet(const TransmitterDesign& d, const FlowEnv& env, const RectPulse& inlet);

/// C_Y at the Reaction I outlet.
TimeSeries reaction1_outlet(const TransmitterDesign& d, const FlowEnv& env,
                            const Eigen::ArrayXd& t, const std::vector<Bit>& bits);
/// C_P at the serpentine exit.
TimeSeries reaction2_outlet(const TransmitterDesign& d, const FlowEnv& env,
                            const Eigen::ArrayXd& t, const std::vector<Bit>& bits);
/// C_Y and C_P at the Reaction III inlet, after the conjunction merge.
std::pair<TimeSeries, TimeSeries> reaction3_inlets(const TransmitterDesign& d, const FlowEnv& env,
                                                   const Eigen::ArrayXd& t,
                                                   const std::vector<Bit>& bits);

/// Pointwise C_Y and C_P at the Reaction III inlet; L2 replaces the design's Reaction II length.
double reaction3_inlet_y(const TransmitterDesign& d, const FlowEnv& env, double t,
                         const std::vector<Bit>& bits);
double reaction3_inlet_p(const TransmitterDesign& d, const FlowEnv& env, double t,
                         const std::vector<Bit>& bits, double L2);

/// Earliest time where the slope of C_Y at the Reaction III inlet drops from above delta
/// into [-delta, delta].
double pulse_peak_time(const TransmitterDesign& d, const FlowEnv& env,
                       const OptimizerTolerances& tol);

struct DesignReport {
    double L_2{};
    double t_Y_max{};
    double peak{};      ///< C_Y at the Reaction III inlet at t_Y_max
    double target{};    ///< zeta * peak
    double t_max_TX{};
    double p_at_L2{};   ///< C_P at t_max_TX with the returned L_2
    OptimizerTolerances tol;
};

DesignReport optimize_L2(const TransmitterDesign& d, const FlowEnv& env,
                         const OptimizerTolerances& tol);

/// Span between the first C_Y and last C_P excursion above tau at the Reaction III inlet.
double min_time_gap(const TransmitterDesign& d, const FlowEnv& env,
                    const OptimizerTolerances& tol);

/// Oracle solve of Y + P -> Z over L_3 driven by the superposed inlet traces; returns C_Y at the
/// Reaction III outlet.
TimeSeries generate_pulse(const TransmitterDesign& d, const FlowEnv& env, const OracleGrid& grid,
                          const std::vector<Bit>& bits);

/// Simulation end time that lets the last bit's P tail pass the Reaction III outlet.
double transmitter_horizon(const TransmitterDesign& d, const FlowEnv& env,
                           const std::vector<Bit>& bits);

}  // namespace mclink
