#include "mclink/transmitter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mclink/errors.hpp"
#include "mclink/transport.hpp"

namespace mclink {
namespace {

// Product of A + B -> AB at distance L after a junction that halves both streams.
double diluted_product(double L, double t, const FlowEnv& env, double C_A, double C_B, double k,
                       const std::vector<Bit>& bits) {
    double sum = 0.0;
    const ReactionSpec rx{k, 0.5 * C_B};
    for (const auto& b : bits)
        sum += rect_product(L, t, env, RectPulse{0.5 * C_A, b.T_on, b.onset}, rx);
    return sum;
}

std::vector<Bit> single_bit(const TransmitterDesign& d) { return {Bit{0.0, d.T_on}}; }

template <class F>
TimeSeries trace(const Eigen::ArrayXd& t, double station, std::string species, F&& f) {
    Eigen::ArrayXd c(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) c[i] = std::max(0.0, f(t[i]));
    return TimeSeries(t, std::move(c), station, Source::analytical, std::move(species));
}

template <class F>
double bisect(F&& f, double lo, double hi, double xtol) {
    // f(lo) and f(hi) have opposite signs; returns the bracket end on the f(lo) side.
    const bool lo_negative = f(lo) < 0.0;
    while (hi - lo > xtol) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) < 0.0) == lo_negative)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double p_shift(const TransmitterDesign& d, const FlowEnv& env, SearchFrame frame) {
    const double tc = conjunction_delay(d, env);
    return frame == SearchFrame::channel ? y_junction_delay(d, env) + tc : tc;
}

double p_in_frame(const TransmitterDesign& d, const FlowEnv& env, double t, double L,
                  SearchFrame frame) {
    const double shifted = t - p_shift(d, env, frame);
    return 0.5 * diluted_product(L, shifted, env, d.C_X0_III, d.C_Sp0_IV, d.k, single_bit(d));
}

}  // namespace

void validate(const SerpentineSpec& s) {
    if (s.L21 < 0.0 || s.L22 < 0.0 || s.L23 < 0.0 || s.Ls < 0.0 || s.Hs < 0.0)
        throw ConfigError("SerpentineSpec: lengths must be >= 0");
    if (s.delay_lines < 0 || s.delay_lines > 2)
        throw ConfigError("SerpentineSpec: only 0, 1 or 2 delay lines are supported");
}

void validate(const TransmitterDesign& d) {
    if (d.L_Y < 0.0 || d.L_C < 0.0) throw ConfigError("TransmitterDesign: L_Y, L_C must be >= 0");
    if (!(d.L_1 > 0.0) || !(d.L_3 > 0.0))
        throw ConfigError("TransmitterDesign: L_1 and L_3 must be > 0");
    if (!d.L_2) validate(d.serpentine);
    if (!(reaction2_length(d) > d.L_1))
        throw ConfigError("TransmitterDesign: L_2 must exceed L_1");
    if (d.C_Sy0_I < 0.0 || d.C_X0_II < 0.0 || d.C_X0_III < 0.0 || d.C_Sp0_IV < 0.0)
        throw ConfigError("TransmitterDesign: concentrations must be >= 0");
    if (!(d.k >= 0.0)) throw ConfigError("TransmitterDesign: k must be >= 0");
    if (!(d.T_on > 0.0)) throw ConfigError("TransmitterDesign: T_on must be > 0");
}

void validate(const OptimizerTolerances& tol) {
    if (!(tol.zeta >= 0.0 && tol.zeta <= 1.0)) throw ConfigError("zeta must lie in [0, 1]");
    if (!(tol.delta > 0.0)) throw ConfigError("delta must be > 0");
    if (!(tol.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (!(tol.tau > 0.0)) throw ConfigError("tau must be > 0");
    if (!(tol.dt > 0.0 && tol.dt <= 5e-3)) throw ConfigError("trace step must lie in (0, 5 ms]");
}

double serpentine_equivalent_length(const SerpentineSpec& s) {
    validate(s);
    const double straight = s.L21 + s.L22 + s.L23;
    switch (s.delay_lines) {
        case 2: return straight + 4.0 * s.Hs + 3.0 * s.Ls;
        case 1: return straight + 2.0 * s.Hs + s.Ls;
        default: return straight;
    }
}

double reaction2_length(const TransmitterDesign& d) {
    return d.L_2 ? *d.L_2 : serpentine_equivalent_length(d.serpentine);
}

double y_junction_delay(const TransmitterDesign& d, const FlowEnv& env) {
    return std::numbers::sqrt2 * d.L_Y / env.v_eff;
}

double conjunction_delay(const TransmitterDesign& d, const FlowEnv& env) {
    return d.L_C / env.v_eff;
}

RectPulse y_junction_outlet(const TransmitterDesign& d, const FlowEnv& env, const RectPulse& inlet) {
    return {inlet.C0, inlet.T_on, inlet.t0 + y_junction_delay(d, env)};
}

TimeSeries reaction1_outlet(const TransmitterDesign& d, const FlowEnv& env,
                            const Eigen::ArrayXd& t, const std::vector<Bit>& bits) {
    const double ty = y_junction_delay(d, env);
    return trace(t, d.L_Y + d.L_1, "Y", [&](double ti) {
        return diluted_product(d.L_1, ti - ty, env, d.C_X0_II, d.C_Sy0_I, d.k, bits);
    });
}

TimeSeries reaction2_outlet(const TransmitterDesign& d, const FlowEnv& env,
                            const Eigen::ArrayXd& t, const std::vector<Bit>& bits) {
    const double ty = y_junction_delay(d, env);
    const double L2 = reaction2_length(d);
    return trace(t, d.L_Y + L2, "P", [&](double ti) {
        return diluted_product(L2, ti - ty, env, d.C_X0_III, d.C_Sp0_IV, d.k, bits);
    });
}

double reaction3_inlet_y(const TransmitterDesign& d, const FlowEnv& env, double t,
                         const std::vector<Bit>& bits) {
    const double shift = y_junction_delay(d, env) + conjunction_delay(d, env);
    return 0.5 * diluted_product(d.L_1, t - shift, env, d.C_X0_II, d.C_Sy0_I, d.k, bits);
}

double reaction3_inlet_p(const TransmitterDesign& d, const FlowEnv& env, double t,
                         const std::vector<Bit>& bits, double L2) {
    const double shift = y_junction_delay(d, env) + conjunction_delay(d, env);
    return 0.5 * diluted_product(L2, t - shift, env, d.C_X0_III, d.C_Sp0_IV, d.k, bits);
}

std::pair<TimeSeries, TimeSeries> reaction3_inlets(const TransmitterDesign& d, const FlowEnv& env,
                                                   const Eigen::ArrayXd& t,
                                                   const std::vector<Bit>& bits) {
    const double station = d.L_Y + d.L_1 + d.L_C;
    const double L2 = reaction2_length(d);
    auto y = trace(t, station, "Y", [&](double ti) { return reaction3_inlet_y(d, env, ti, bits); });
    auto p = trace(t, station, "P",
                   [&](double ti) { return reaction3_inlet_p(d, env, ti, bits, L2); });
    return {std::move(y), std::move(p)};
}

double pulse_peak_time(const TransmitterDesign& d, const FlowEnv& env,
                       const OptimizerTolerances& tol) {
    validate(tol);
    const auto bits = single_bit(d);
    const double t_end = d.T_on + y_junction_delay(d, env) + conjunction_delay(d, env) +
                         d.L_1 / env.v_eff + 1.0;
    const Eigen::ArrayXd t = time_grid(0.0, t_end, tol.dt);
    Eigen::ArrayXd y(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) y[i] = reaction3_inlet_y(d, env, t[i], bits);

    double prev = 0.0;
    for (Eigen::Index i = 1; i + 1 < t.size(); ++i) {
        const double slope = (y[i + 1] - y[i - 1]) / (2.0 * tol.dt);
        if (i > 1 && prev > tol.delta && std::abs(slope) <= tol.delta) return t[i];
        prev = slope;
    }
    throw SearchError("pulse_peak_time: slope never falls into the [-delta, delta] band");
}

DesignReport optimize_L2(const TransmitterDesign& d, const FlowEnv& env,
                         const OptimizerTolerances& tol) {
    validate(tol);
    validate(env);
    const auto bits = single_bit(d);
    DesignReport rep;
    rep.tol = tol;
    rep.t_Y_max = tol.peak_time_override ? *tol.peak_time_override : pulse_peak_time(d, env, tol);
    const auto cy = [&](double t) { return reaction3_inlet_y(d, env, t, bits); };
    rep.peak = cy(rep.t_Y_max);
    rep.target = tol.zeta * rep.peak;
    if (!(rep.peak > 0.0)) throw SearchError("optimize_L2: C_Y peak is zero");

    if (tol.zeta >= 1.0) {
        rep.t_max_TX = rep.t_Y_max;
    } else {
        // Rising edge: start from the first grid time on the way up that lies below the target.
        double lo = rep.t_Y_max;
        while (lo > 0.0 && cy(lo) >= rep.target) lo -= tol.dt;
        if (lo <= 0.0 && cy(0.0) >= rep.target)
            throw SearchError("optimize_L2: target not reachable on the rising edge");
        lo = std::max(lo, 0.0);
        rep.t_max_TX = bisect([&](double t) { return cy(t) - rep.target; }, lo, lo + tol.dt, 1e-12);
    }

    const auto p_at = [&](double L) { return p_in_frame(d, env, rep.t_max_TX, L, tol.frame); };
    double L_lo = 1e-6;
    if (p_at(L_lo) < tol.epsilon)
        throw ConfigError("optimize_L2: C_P below epsilon even for a 1 um channel (t_max_TX = " +
                          std::to_string(rep.t_max_TX) + " s)");
    double L_hi = std::max(2.0 * d.L_1, 2e-6);
    while (p_at(L_hi) >= tol.epsilon) {
        L_lo = L_hi;
        L_hi *= 2.0;
        if (L_hi > 1.0) throw ConfigError("optimize_L2: no channel length drops C_P below epsilon");
    }
    rep.L_2 = bisect([&](double L) { return p_at(L) - tol.epsilon; }, L_lo, L_hi, 1e-10);
    rep.p_at_L2 = p_at(rep.L_2);
    return rep;
}

double min_time_gap(const TransmitterDesign& d, const FlowEnv& env,
                    const OptimizerTolerances& tol) {
    validate(tol);
    const auto bits = single_bit(d);
    const double L2 = reaction2_length(d);
    const double t_end = transmitter_horizon(d, env, bits) + 2.0;
    const double dt = 1e-4;
    const auto n = static_cast<long>(t_end / dt);
    const auto cy = [&](double t) { return reaction3_inlet_y(d, env, t, bits) - tol.tau; };
    const auto cp = [&](double t) { return reaction3_inlet_p(d, env, t, bits, L2) - tol.tau; };

    std::optional<double> y_start;
    for (long i = 1; i <= n && !y_start; ++i) {
        const double t = static_cast<double>(i) * dt;
        if (cy(t) > 0.0) y_start = bisect(cy, t - dt, t, 1e-12);
    }
    std::optional<double> p_end;
    for (long i = n; i >= 1 && !p_end; --i) {
        const double t = static_cast<double>(i) * dt;
        if (cp(t - dt) > 0.0) p_end = bisect(cp, t - dt, t, 1e-12);
    }
    if (!y_start || !p_end) throw SearchError("min_time_gap: traces never exceed tau");
    return *p_end - *y_start;
}

double transmitter_horizon(const TransmitterDesign& d, const FlowEnv& env,
                           const std::vector<Bit>& bits) {
    double last = 0.0;
    for (const auto& b : bits) last = std::max(last, b.onset + b.T_on);
    const double travel = y_junction_delay(d, env) + conjunction_delay(d, env) +
                          (reaction2_length(d) + d.L_3) / env.v_eff;
    return last + travel + 1.0;
}

TimeSeries generate_pulse(const TransmitterDesign& d, const FlowEnv& env, const OracleGrid& grid,
                          const std::vector<Bit>& bits) {
    validate(d);
    const double L2 = reaction2_length(d);
    SpeciesSystem sys;
    sys.species.push_back({"Y", [&](double t) { return reaction3_inlet_y(d, env, t, bits); }, {}, {}});
    sys.species.push_back(
        {"P", [&](double t) { return reaction3_inlet_p(d, env, t, bits, L2); }, {}, {}});
    sys.species.push_back({"Z", {}, {}, {}});
    sys.reactions.push_back({0, 1, 2, d.k, false});
    const double station = d.L_3;
    const auto res = solve(sys, env, grid, std::span<const double>(&station, 1));
    return res.probes.at(station)[0].relabel("Y", d.L_Y + d.L_1 + d.L_C + d.L_3);
}

}  // namespace mclink
