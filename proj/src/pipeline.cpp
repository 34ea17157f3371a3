#include "mclink/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>

#include "mclink/errors.hpp"
#include "mclink/link.hpp"
#include "mclink/oracle.hpp"
#include "mclink/transport.hpp"

namespace mclink {

namespace {

constexpr double kPresence = 1e-3;  // level that counts as signal for widths [mol/m^3]

std::string micron_label(double x) {
    char buf[48];
    const double um = x * 1e6;
    if (std::abs(um - std::round(um)) < 1e-9)
        std::snprintf(buf, sizeof buf, "L%.0fum", um);
    else
        std::snprintf(buf, sizeof buf, "L%.3fum", um);
    return buf;
}

TimeSeries zeros(const Eigen::ArrayXd& t, double station, Source src, std::string species) {
    return TimeSeries(t, Eigen::ArrayXd::Zero(t.size()), station, src, std::move(species));
}

double linf(const TimeSeries& a, const TimeSeries& b) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.c()[i] - b.at(a.t()[i])));
    return m;
}

bool two_valued(const TimeSeries& s, double plateau) {
    return (s.c() == 0.0 || s.c() == plateau).all();
}

class Runner {
public:
    Runner(const Scenario& sc, const RunOptions& opts) : sc_(sc), opts_(opts) {
        rec_.scenario = sc.name;
        rec_.scenario_hash = fnv1a_hex(sc.source_text);
        rec_.tool_version = std::string(tool_version());
        rec_.tolerances["grid.dx_m"] = sc.grid.dx;
        rec_.tolerances["grid.cfl"] = sc.grid.cfl;
        rec_.tolerances["grid.sample_dt_s"] = sc.grid.sample_dt;
        rec_.tolerances["presence_level_mol_per_m3"] = kPresence;
    }

    RunRecord run() && {
        if (sc_.channel) channel_study(*sc_.channel);
        if (sc_.tx && sc_.rx) {
            link();
        } else if (sc_.tx) {
            if (sc_.tx->variants.empty()) {
                transmitter("tx.", "tx_", sc_.tx->design, sc_.tx->optimizer);
            } else {
                for (const auto& v : sc_.tx->variants)
                    transmitter("tx." + v.label + ".", "tx_" + v.label + "_", v.design, v.optimizer);
            }
        } else if (sc_.rx) {
            receiver(*sc_.rx);
        }
        return std::move(rec_);
    }

private:
    OracleGrid oracle_grid(double probe_max, double t_max) const {
        return default_grid(sc_.env, probe_max, t_max, sc_.grid.dx, sc_.grid.cfl);
    }

    Eigen::ArrayXd sample_grid(double t_end) const {
        return time_grid(0.0, sc_.grid.t_max > 0.0 ? sc_.grid.t_max : t_end, sc_.grid.sample_dt);
    }

    void channel_study(const ChannelStudy& ch) {
        const FlowEnv& env = sc_.env;
        const double x_max = *std::max_element(ch.lengths.begin(), ch.lengths.end());
        const double input_end =
            ch.rect ? ch.rect->t0 + ch.rect->T_on : ch.gauss->mu + 6.0 * std::sqrt(ch.gauss->sigma2);
        const Eigen::ArrayXd t = sample_grid(std::max(input_end, 0.0) + 1.5 * x_max / env.v_eff + 1.0);

        std::optional<OracleResult> oracle;
        if (opts_.oracle_check) oracle = channel_oracle(ch, t[t.size() - 1]);

        for (const double x : ch.lengths) {
            const std::string key = "channel." + micron_label(x) + ".";
            Probe probe{"channel_" + micron_label(x), {}};
            if (ch.rect) {
                probe.series.emplace_back(t, rect_reactant(x, t, env, *ch.rect, ch.reaction), x,
                                          Source::analytical, "A");
                probe.series.emplace_back(t, rect_product(x, t, env, *ch.rect, ch.reaction), x,
                                          Source::analytical, "AB");
                rec_.metrics[key + "peak_A_mol_per_m3"] = probe.series[0].peak();
                rec_.metrics[key + "peak_AB_mol_per_m3"] = probe.series[1].peak();
            } else if (ch.method == ChannelMethod::appro1) {
                probe.series.emplace_back(t, gauss_appro1(x, t, env, *ch.gauss, ch.reaction), x,
                                          Source::analytical, "A");
            } else {
                const auto inv = gauss_appro2_detailed(x, t, env, *ch.gauss, ch.reaction.C_B0, {});
                rec_.metrics[key + "inversion_error_bound_mol_per_m3"] = inv.error_bound;
                probe.series.push_back(inv.series.relabel("A", x));
            }
            if (ch.gauss) {
                rec_.metrics[key + "peak_A_mol_per_m3"] = probe.series[0].peak();
                rec_.metrics[key + "width_A_s"] = probe.series[0].width_above(kPresence);
            }
            if (oracle) {
                const auto& per_species = oracle->probes.at(x);
                const std::size_t n_analytic = probe.series.size();
                double scale = 0.0;
                for (const auto& ana : probe.series) scale = std::max(scale, ana.peak());
                for (std::size_t i = 0; i < n_analytic; ++i) {
                    const TimeSeries& ana = probe.series[i];
                    const int idx = ana.species() == "A" ? 0 : 2;
                    TimeSeries orc = per_species[static_cast<std::size_t>(idx)].resample(t).relabel(
                        ana.species(), x);
                    const double err = linf(ana, orc);
                    rec_.metrics[key + "oracle_linf_" + ana.species() + "_mol_per_m3"] = err;
                    rec_.metrics[key + "oracle_linf_" + ana.species() + "_rel_scale"] =
                        scale > 0.0 ? err / scale : 0.0;
                    probe.series.push_back(std::move(orc));
                }
            }
            rec_.probes.push_back(std::move(probe));
        }
    }

    OracleResult channel_oracle(const ChannelStudy& ch, double t_max) const {
        SpeciesSystem sys;
        if (ch.rect) {
            const RectPulse r = *ch.rect;
            sys.species.push_back(
                {"A", [r](double t) { return t >= r.t0 && t < r.t0 + r.T_on ? r.C0 : 0.0; }, {}, {}});
        } else {
            const GaussPulse g = *ch.gauss;
            sys.species.push_back({"A", [g](double t) { return g(t); }, {}, {}});
        }
        const double cb = ch.reaction.C_B0;
        sys.species.push_back({"B", [cb](double) { return cb; }, [cb](double) { return cb; }, {}});
        sys.species.push_back({"AB", {}, {}, {}});
        sys.reactions.push_back({0, 1, 2, ch.reaction.k, false});
        const double x_max = *std::max_element(ch.lengths.begin(), ch.lengths.end());
        return solve(sys, sc_.env, oracle_grid(x_max, t_max), ch.lengths);
    }

    void transmitter(const std::string& key, const std::string& probe_prefix,
                     const TransmitterDesign& d, const std::optional<OptimizerTolerances>& tol) {
        const FlowEnv& env = sc_.env;
        const auto& bits = sc_.bits;
        const Eigen::ArrayXd t = sample_grid(transmitter_horizon(d, env, bits));
        const double t_y = y_junction_delay(d, env);

        TimeSeries r1 = reaction1_outlet(d, env, t, bits);
        TimeSeries r2 = reaction2_outlet(d, env, t, bits);
        auto [r3y, r3p] = reaction3_inlets(d, env, t, bits);
        rec_.metrics[key + "L_2_m"] = reaction2_length(d);
        rec_.metrics[key + "y_junction_delay_s"] = t_y;
        rec_.metrics[key + "reaction1.peak_mol_per_m3"] = r1.peak();
        rec_.metrics[key + "reaction1.peak_time_local_s"] = r1.peak_time() - t_y;
        for (const double tl : sc_.tx->reaction1_probe_times) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "reaction1.C_Y_at_local_%gs_mol_per_m3", tl);
            rec_.metrics[key + buf] = r1.at(tl + t_y);
        }
        rec_.metrics[key + "reaction2.peak_mol_per_m3"] = r2.peak();
        rec_.metrics[key + "reaction3_inlet.peak_Y_mol_per_m3"] = r3y.peak();
        rec_.metrics[key + "reaction3_inlet.peak_P_mol_per_m3"] = r3p.peak();

        if (tol) {
            const std::string tk = key + "optimizer.";
            rec_.tolerances[tk + "zeta"] = tol->zeta;
            rec_.tolerances[tk + "delta_mol_per_m3_s"] = tol->delta;
            rec_.tolerances[tk + "epsilon_mol_per_m3"] = tol->epsilon;
            rec_.tolerances[tk + "tau_mol_per_m3"] = tol->tau;
            rec_.tolerances[tk + "dt_s"] = tol->dt;
            if (tol->peak_time_override)
                rec_.tolerances[tk + "peak_time_override_s"] = *tol->peak_time_override;
            const DesignReport rep = optimize_L2(d, env, *tol);
            rec_.metrics[key + "optimized.L_2_m"] = rep.L_2;
            rec_.metrics[key + "optimized.t_Y_max_s"] = rep.t_Y_max;
            rec_.metrics[key + "optimized.peak_Y_mol_per_m3"] = rep.peak;
            rec_.metrics[key + "optimized.target_mol_per_m3"] = rep.target;
            rec_.metrics[key + "optimized.t_max_TX_s"] = rep.t_max_TX;
            rec_.metrics[key + "delta_T_min_s"] = min_time_gap(d, env, *tol);
        }

        Probe p1{probe_prefix + "reaction1_outlet", {}};
        Probe p2{probe_prefix + "reaction2_outlet", {}};
        Probe p3{probe_prefix + "reaction3_inlet", {}};
        if (opts_.oracle_check && !bits.empty()) {
            TimeSeries orc = reaction1_oracle(d, t).resample(t).relabel("Y", r1.station());
            const double err = linf(r1, orc);
            rec_.metrics[key + "reaction1.oracle_linf_mol_per_m3"] = err;
            rec_.metrics[key + "reaction1.oracle_linf_rel_peak"] = r1.peak() > 0.0 ? err / r1.peak() : 0.0;
            p1.series.push_back(std::move(orc));
        }
        p1.series.insert(p1.series.begin(), std::move(r1));
        p2.series.push_back(std::move(r2));
        p3.series.push_back(std::move(r3y));
        p3.series.push_back(std::move(r3p));
        rec_.probes.push_back(std::move(p1));
        rec_.probes.push_back(std::move(p2));
        rec_.probes.push_back(std::move(p3));

        if (!sc_.tx->generate) return;
        const double station = d.L_Y + d.L_1 + d.L_C + d.L_3;
        TimeSeries out = bits.empty()
                             ? zeros(t, station, Source::oracle, "Y")
                             : generate_pulse(d, env, oracle_grid(d.L_3, t[t.size() - 1]), bits)
                                   .resample(t);
        rec_.metrics[key + "output.peak_mol_per_m3"] = out.peak();
        const double travel = t_y + conjunction_delay(d, env) + (d.L_1 + d.L_3) / env.v_eff;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            const double lo = bits[i].onset + travel;
            const double hi = i + 1 < bits.size() ? bits[i + 1].onset + travel : t[t.size() - 1] + 1.0;
            double peak = 0.0;
            for (Eigen::Index j = 0; j < t.size(); ++j)
                if (t[j] >= lo && t[j] < hi) peak = std::max(peak, out.c()[j]);
            rec_.metrics[key + "output.bit" + std::to_string(i) + ".peak_mol_per_m3"] = peak;
        }
        rec_.probes.push_back(Probe{probe_prefix + "output", {std::move(out)}});
    }

    TimeSeries reaction1_oracle(const TransmitterDesign& d, const Eigen::ArrayXd& t) const {
        const double t_y = y_junction_delay(d, sc_.env);
        const auto bits = sc_.bits;
        const double x0 = 0.5 * d.C_X0_II;
        const double sy = 0.5 * d.C_Sy0_I;
        SpeciesSystem sys;
        sys.species.push_back({"X",
                               [bits, t_y, x0](double time) {
                                   for (const auto& b : bits)
                                       if (time - t_y >= b.onset && time - t_y < b.onset + b.T_on)
                                           return x0;
                                   return 0.0;
                               },
                               {},
                               {}});
        sys.species.push_back({"Sy", [sy](double) { return sy; }, [sy](double) { return sy; }, {}});
        sys.species.push_back({"Y", {}, {}, {}});
        sys.reactions.push_back({0, 1, 2, d.k, false});
        const double station = d.L_1;
        const auto res =
            solve(sys, sc_.env, oracle_grid(d.L_1, t[t.size() - 1]), std::span<const double>(&station, 1));
        return res.probes.at(station)[2];
    }

    void receiver(const RxSettings& rx) {
        const FlowEnv& env = sc_.env;
        const GaussPulse& g = *rx.received_pulse;
        const double t_end = g.mu + 6.0 * std::sqrt(g.sigma2) + receiver_delay(rx.design, env) + 1.0;
        const Eigen::ArrayXd t = sample_grid(t_end);
        record_rx_tolerances(rx);

        TimeSeries residual = reaction4_outlet(rx.design, env, g, rx.method, t, rx.quadrature);
        TimeSeries output = reaction5_output(rx.design, env, residual);
        const double plateau = rx.design.amp_dilution * rx.design.C_Amp_VII;
        rec_.metrics["rx.residual.peak_mol_per_m3"] = residual.peak();
        rec_.metrics["rx.output.peak_mol_per_m3"] = output.peak();
        rec_.metrics["rx.output.plateau_mol_per_m3"] = plateau;
        rec_.metrics["rx.output.width_s"] = output.width_above(0.0);
        rec_.metrics["rx.output.two_valued"] = two_valued(output, plateau) ? 1.0 : 0.0;

        Probe pr{"rx_residual", {residual}};
        Probe po{"rx_output", {output}};
        if (opts_.oracle_check) {
            Eigen::ArrayXd c(t.size());
            for (Eigen::Index i = 0; i < t.size(); ++i) c[i] = g(t[i]);
            const TimeSeries received(t, std::move(c), 0.0, Source::analytical, "Y");
            const auto orc = receiver_oracle(rx.design, env, received, sc_.grid.dx);
            TimeSeries ores = orc.residual.resample(t).relabel("Y", residual.station());
            TimeSeries oout = orc.output.resample(t).relabel("O", output.station());
            rec_.metrics["rx.residual.oracle_linf_mol_per_m3"] = linf(residual, ores);
            rec_.metrics["rx.residual.oracle_linf_rel_peak"] =
                residual.peak() > 0.0 ? linf(residual, ores) / residual.peak() : 0.0;
            rec_.metrics["rx.output.oracle_width_s"] = oout.width_above(0.5 * plateau);
            rec_.metrics["rx.output.oracle_peak_mol_per_m3"] = oout.peak();
            pr.series.push_back(std::move(ores));
            po.series.push_back(std::move(oout));
        }
        rec_.probes.push_back(std::move(pr));
        rec_.probes.push_back(std::move(po));
    }

    void record_rx_tolerances(const RxSettings& rx) {
        rec_.tolerances["rx.presence_tau_mol_per_m3"] = rx.design.presence_tau;
        rec_.tolerances["rx.amp_dilution"] = rx.design.amp_dilution;
        if (rx.method == Method::appro2) {
            rec_.tolerances["rx.quadrature.tol_mol_per_m3"] = rx.quadrature.tol;
            rec_.tolerances["rx.quadrature.decay_ratio"] = rx.quadrature.decay_ratio;
        }
    }

    void link() {
        const RxSettings& rx = *sc_.rx;
        record_rx_tolerances(rx);
        LinkConfig cfg;
        cfg.dx_target = sc_.grid.dx;
        cfg.cfl = sc_.grid.cfl;
        cfg.sample_dt = sc_.grid.sample_dt;
        cfg.method = rx.method;
        rec_.tolerances["link.fit_warning_rel"] = cfg.fit_warning;

        const LinkResult res =
            run_link(sc_.tx->design, sc_.channel_length.value_or(0.0), rx.design, sc_.env, sc_.bits, cfg);
        rec_.metrics["link.plateau_mol_per_m3"] = res.plateau;
        rec_.metrics["link.transmitted.peak_mol_per_m3"] = res.transmitted.peak();
        rec_.metrics["link.received.peak_mol_per_m3"] = res.received.peak();
        rec_.metrics["link.output.peak_mol_per_m3"] = res.output.peak();
        rec_.metrics["link.output.two_valued"] = two_valued(res.output, res.plateau) ? 1.0 : 0.0;
        rec_.metrics["link.oracle_output.peak_mol_per_m3"] = res.oracle_output.peak();
        std::size_t ok = 0;
        for (std::size_t i = 0; i < res.bits.size(); ++i) {
            const BitOutcome& b = res.bits[i];
            const std::string k = "link.bit" + std::to_string(i) + ".";
            rec_.metrics[k + "demodulated"] = b.demodulated ? 1.0 : 0.0;
            rec_.metrics[k + "width_s"] = b.width;
            if (b.fit) {
                rec_.metrics[k + "fit.mu_s"] = b.fit->pulse.mu;
                rec_.metrics[k + "fit.sigma2_s2"] = b.fit->pulse.sigma2;
                rec_.metrics[k + "fit.C0_mol_s_per_m3"] = b.fit->pulse.C0;
                rec_.metrics[k + "fit.residual_rel"] = b.fit->residual;
            }
            if (b.fit_warning)
                rec_.warnings.push_back("bit " + std::to_string(i) +
                                        ": Gaussian fit residual above the analytic-receiver limit");
            ok += b.demodulated ? 1U : 0U;
        }
        rec_.metrics["link.bits_demodulated"] = static_cast<double>(ok);
        rec_.metrics["link.bits_sent"] = static_cast<double>(res.bits.size());

        rec_.probes.push_back(Probe{"link_transmitted", {res.transmitted}});
        rec_.probes.push_back(Probe{"link_received", {res.received}});
        rec_.probes.push_back(Probe{"link_output", {res.output, res.oracle_output}});
    }

    const Scenario& sc_;
    const RunOptions& opts_;
    RunRecord rec_;
};

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string_view tool_version() { return MCLINK_VERSION; }

RunRecord run_scenario(const Scenario& sc, const RunOptions& opts) {
    return Runner(sc, opts).run();
}

SweepResult sweep(const std::filesystem::path& scenario, const std::string& parameter,
                  const std::vector<double>& values, const RunOptions& opts) {
    if (values.empty()) throw ConfigError("sweep: no values given");
    SweepResult out{parameter, values, {}};
    for (const double v : values) {
        const Scenario sc = load_scenario(scenario, {Override{parameter, v}});
        RunRecord rec = run_scenario(sc, opts);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        rec.scenario_hash = fnv1a_hex(sc.source_text + "\n# override " + parameter + "=" + buf);
        rec.metrics["sweep." + parameter] = v;
        out.runs.push_back(std::move(rec));
    }
    return out;
}

}  // namespace mclink
