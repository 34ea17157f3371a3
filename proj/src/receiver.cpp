#include "mclink/receiver.hpp"

#include "mclink/errors.hpp"

namespace mclink {

void validate(const ReceiverDesign& d) {
    if (!(d.L_T > 0.0 && d.L_C > 0.0 && d.L_4 > 0.0 && d.L_5 > 0.0))
        throw ConfigError("ReceiverDesign: all lengths must be > 0");
    if (d.C_ThL_VI < 0.0 || d.C_Amp_VII < 0.0)
        throw ConfigError("ReceiverDesign: supplies must be >= 0");
    if (!(d.presence_tau > 0.0)) throw ConfigError("ReceiverDesign: presence_tau must be > 0");
    if (!(d.k >= 0.0)) throw ConfigError("ReceiverDesign: k must be >= 0");
    if (!(d.amp_dilution > 0.0 && d.amp_dilution <= 1.0))
        throw ConfigError("ReceiverDesign: amp_dilution must lie in (0, 1]");
}

TJunctionOutput t_junction_outlet(const ReceiverDesign& d, const FlowEnv& env,
                                  const GaussPulse& pulse) {
    const double delay = (d.L_T + d.L_C) / env.v_eff;
    return {GaussPulse{0.5 * pulse.C0, pulse.mu + delay, pulse.sigma2}, 0.5 * d.C_ThL_VI, delay};
}

TimeSeries reaction4_outlet(const ReceiverDesign& d, const FlowEnv& env, const GaussPulse& pulse,
                            Method method, const Eigen::ArrayXd& t, const QuadratureConfig& quad) {
    validate(d);
    const auto tj = t_junction_outlet(d, env, pulse);
    const double station = d.L_T + d.L_C + d.L_4;
    if (method == Method::appro1) {
        Eigen::ArrayXd c = gauss_appro1(d.L_4, t, env, tj.pulse, ReactionSpec{d.k, tj.threshold});
        return TimeSeries(t, std::move(c), station, Source::analytical, "Y");
    }
    return gauss_appro2(d.L_4, t, env, tj.pulse, tj.threshold, quad).relabel("Y", station);
}

TimeSeries reaction5_output(const ReceiverDesign& d, const FlowEnv& env, const TimeSeries& residual) {
    validate(d);
    const double shift = (d.L_C + d.L_5) / env.v_eff;
    const double plateau = d.amp_dilution * d.C_Amp_VII;
    Eigen::ArrayXd c(residual.size());
    for (Eigen::Index i = 0; i < c.size(); ++i)
        c[i] = residual.at(residual.t()[i] - shift) > d.presence_tau ? plateau : 0.0;
    return TimeSeries(residual.t(), std::move(c), residual.station() + d.L_C + d.L_5,
                      Source::analytical, "O");
}

TimeSeries demodulate(const ReceiverDesign& d, const FlowEnv& env, const GaussPulse& pulse,
                      Method method, const Eigen::ArrayXd& t, const QuadratureConfig& quad) {
    return reaction5_output(d, env, reaction4_outlet(d, env, pulse, method, t, quad));
}

double receiver_delay(const ReceiverDesign& d, const FlowEnv& env) {
    return (d.L_T + 2.0 * d.L_C + d.L_4 + d.L_5) / env.v_eff;
}

ReceiverOracleResult receiver_oracle(const ReceiverDesign& d, const FlowEnv& env,
                                     const TimeSeries& received, double dx_target) {
    validate(d);
    const double t_max = received.t()[received.size() - 1];
    const double t_T = (d.L_T + d.L_C) / env.v_eff;
    const double thl = 0.5 * d.C_ThL_VI;

    SpeciesSystem iv;
    iv.species.push_back({"Y", [&](double t) { return 0.5 * received.at(t - t_T); }, {}, {}});
    iv.species.push_back({"ThL", [=](double) { return thl; }, [=](double) { return thl; }, {}});
    iv.reactions.push_back({0, 1, -1, d.k, false});
    const auto grid_iv = default_grid(env, d.L_4, t_max, dx_target);
    const double x4 = d.L_4;
    auto res_iv = solve(iv, env, grid_iv, std::span<const double>(&x4, 1));
    TimeSeries residual = res_iv.probes.at(x4)[0].relabel("Y", d.L_T + d.L_C + d.L_4);

    const double t_C = d.L_C / env.v_eff;
    const double amp = d.amp_dilution * d.C_Amp_VII;
    SpeciesSystem v;
    v.species.push_back({"Y", [&](double t) { return residual.at(t - t_C); }, {}, {}});
    v.species.push_back({"Amp", [=](double) { return amp; }, [=](double) { return amp; }, {}});
    v.species.push_back({"O", {}, {}, {}});
    v.reactions.push_back({0, 1, 2, d.k, true});
    const auto grid_v = default_grid(env, d.L_5, t_max, dx_target);
    const double x5 = d.L_5;
    auto res_v = solve(v, env, grid_v, std::span<const double>(&x5, 1));
    const double station = residual.station() + d.L_C + d.L_5;
    return {residual, res_v.probes.at(x5)[2].relabel("O", station),
            res_v.probes.at(x5)[0].relabel("Y", station)};
}

}  // namespace mclink
