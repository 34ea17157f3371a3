#include "mclink/link.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "mclink/errors.hpp"

namespace mclink {

GaussFit fit_gaussian(const TimeSeries& trace, double t_lo, double t_hi) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < trace.size(); ++i)
        if (trace.t()[i] >= t_lo && trace.t()[i] <= t_hi) idx.push_back(i);
    if (idx.size() < 4) throw DomainError("fit_gaussian: fewer than 4 samples in window");
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::ArrayXd t(n), c(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        t[j] = trace.t()[idx[static_cast<std::size_t>(j)]];
        c[j] = std::max(0.0, trace.c()[idx[static_cast<std::size_t>(j)]]);
    }
    const double peak = c.maxCoeff();
    if (!(peak > 0.0)) throw DomainError("fit_gaussian: window holds no signal");

    // Moments on the trapezoid rule.
    Eigen::ArrayXd w = Eigen::ArrayXd::Zero(n);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const double h = 0.5 * (t[j + 1] - t[j]);
        w[j] += h;
        w[j + 1] += h;
    }
    const double area = (w * c).sum();
    const double mean = (w * c * t).sum() / area;
    const double var = (w * c * (t - mean).square()).sum() / area;

    Eigen::Vector3d p(area, mean, std::max(var, 1e-8));
    const auto model = [&](const Eigen::Vector3d& q) -> Eigen::ArrayXd {
        return q[0] / std::sqrt(2.0 * std::numbers::pi * q[2]) *
               (-(t - q[1]).square() / (2.0 * q[2])).exp();
    };
    Eigen::ArrayXd r = model(p) - c;
    double cost = r.square().sum();
    double lambda = 1e-3;
    for (int it = 0; it < 200; ++it) {
        const Eigen::ArrayXd m = model(p);
        Eigen::MatrixXd J(n, 3);
        J.col(0) = (m / p[0]).matrix();
        J.col(1) = (m * (t - p[1]) / p[2]).matrix();
        J.col(2) = (m * ((t - p[1]).square() / (2.0 * p[2] * p[2]) - 1.0 / (2.0 * p[2]))).matrix();
        const Eigen::Matrix3d JtJ = J.transpose() * J;
        const Eigen::Vector3d g = J.transpose() * r.matrix();
        Eigen::Matrix3d A = JtJ;
        A.diagonal() += lambda * JtJ.diagonal();
        const Eigen::Vector3d step = A.ldlt().solve(-g);
        const Eigen::Vector3d trial = p + step;
        if (trial[0] > 0.0 && trial[2] > 0.0) {
            const Eigen::ArrayXd rt = model(trial) - c;
            const double ct = rt.square().sum();
            if (ct < cost) {
                const bool done = (cost - ct) <= 1e-14 * cost;
                p = trial;
                r = rt;
                cost = ct;
                lambda = std::max(lambda * 0.3, 1e-12);
                if (done) break;
                continue;
            }
        }
        lambda *= 10.0;
        if (lambda > 1e12) break;
    }
    return {GaussPulse{p[0], p[1], p[2]}, r.abs().maxCoeff() / peak};
}

namespace {

TimeSeries propagate(const TimeSeries& in, double length, const FlowEnv& env, double t_max,
                     const LinkConfig& cfg) {
    if (length == 0.0) return in;
    SpeciesSystem sys;
    sys.species.push_back({"Y", [&](double t) { return in.at(t); }, {}, {}});
    const auto grid = default_grid(env, length, t_max, cfg.dx_target, cfg.cfl);
    auto res = solve(sys, env, grid, std::span<const double>(&length, 1));
    return res.probes.at(length)[0].relabel("Y", in.station() + length);
}

}  // namespace

LinkResult run_link(const TransmitterDesign& tx, double channel_length, const ReceiverDesign& rx,
                    const FlowEnv& env, const std::vector<Bit>& bits, const LinkConfig& cfg) {
    validate(env);
    validate(tx);
    validate(rx);
    if (channel_length < 0.0) throw ConfigError("run_link: channel_length must be >= 0");
    for (std::size_t i = 1; i < bits.size(); ++i)
        if (!(bits[i].onset > bits[i - 1].onset))
            throw ConfigError("run_link: bit onsets must increase strictly");

    const double tx_travel = y_junction_delay(tx, env) + conjunction_delay(tx, env) +
                             (tx.L_1 + tx.L_3) / env.v_eff;
    const double ch_travel = channel_length / env.v_eff;
    const double rx_travel = receiver_delay(rx, env);
    double last = 0.0;
    for (const auto& b : bits) last = std::max(last, b.onset + b.T_on);
    const double t_max = last + tx_travel + ch_travel + rx_travel + 3.0;
    const Eigen::ArrayXd grid = time_grid(0.0, t_max, cfg.sample_dt);

    LinkResult out{TimeSeries(grid, Eigen::ArrayXd::Zero(grid.size()), 0.0, Source::oracle, "Y"),
                   TimeSeries(grid, Eigen::ArrayXd::Zero(grid.size()), 0.0, Source::oracle, "Y"),
                   TimeSeries(grid, Eigen::ArrayXd::Zero(grid.size()), 0.0, Source::analytical, "O"),
                   TimeSeries(grid, Eigen::ArrayXd::Zero(grid.size()), 0.0, Source::oracle, "O"),
                   {},
                   rx.amp_dilution * rx.C_Amp_VII};
    if (bits.empty()) return out;

    const auto tx_grid = default_grid(env, tx.L_3, t_max, cfg.dx_target, cfg.cfl);
    const TimeSeries transmitted = generate_pulse(tx, env, tx_grid, bits);
    const TimeSeries received = propagate(transmitted, channel_length, env, t_max, cfg);
    out.transmitted = transmitted.resample(grid);
    out.received = received.resample(grid);

    // Bit windows on the received trace, split just ahead of each bit's nominal arrival.
    std::vector<double> bounds;
    double min_gap = INFINITY;
    for (std::size_t i = 1; i < bits.size(); ++i)
        min_gap = std::min(min_gap, bits[i].onset - bits[i - 1].onset);
    const double margin = std::min(0.5, 0.25 * min_gap);
    bounds.push_back(0.0);
    for (std::size_t i = 1; i < bits.size(); ++i)
        bounds.push_back(bits[i].onset + tx_travel + ch_travel - margin);
    bounds.push_back(t_max);

    Eigen::ArrayXd combined = Eigen::ArrayXd::Zero(grid.size());
    const double floor = 1e-6 * std::max(out.received.peak(), 1e-300);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        BitOutcome bo;
        bo.window_start = bounds[i];
        bo.window_end = bounds[i + 1];
        double local_peak = 0.0;
        for (Eigen::Index j = 0; j < grid.size(); ++j)
            if (grid[j] >= bo.window_start && grid[j] <= bo.window_end)
                local_peak = std::max(local_peak, out.received.c()[j]);
        if (local_peak > floor) {
            bo.fit = fit_gaussian(out.received, bo.window_start, bo.window_end);
            bo.fit_warning = bo.fit->residual > cfg.fit_warning;
            const auto o = demodulate(rx, env, bo.fit->pulse, cfg.method, grid);
            combined = combined.max(o.c());
        }
        out.bits.push_back(bo);
    }
    out.output = TimeSeries(grid, combined,
                            channel_length + rx.L_T + 2.0 * rx.L_C + rx.L_4 + rx.L_5,
                            Source::analytical, "O");

    const auto oracle_rx = receiver_oracle(rx, env, out.received, cfg.dx_target);
    out.oracle_output = oracle_rx.output.resample(grid);

    for (std::size_t i = 0; i < bits.size(); ++i) {
        auto& bo = out.bits[i];
        const double lo = bo.window_start + rx_travel;
        const double hi = bo.window_end + rx_travel;
        for (Eigen::Index j = 0; j + 1 < grid.size(); ++j)
            if (grid[j] >= lo && grid[j] < hi && combined[j] == out.plateau && out.plateau > 0.0)
                bo.width += grid[j + 1] - grid[j];
        bo.demodulated = bo.width > 0.0;
    }
    return out;
}

}  // namespace mclink
