#include <algorithm>
#include <cmath>
#include <numbers>

#include "mclink/errors.hpp"
#include "mclink/signals.hpp"

namespace mclink {

double GaussPulse::operator()(double t) const {
    const double d = t - mu;
    return C0 / std::sqrt(2.0 * std::numbers::pi * sigma2) * std::exp(-d * d / (2.0 * sigma2));
}

double GaussPulse::peak() const { return C0 / std::sqrt(2.0 * std::numbers::pi * sigma2); }

void validate(const RectPulse& p) {
    if (!(p.C0 >= 0.0)) throw ConfigError("RectPulse: C0 must be >= 0");
    if (!(p.T_on > 0.0)) throw ConfigError("RectPulse: T_on must be > 0");
    if (!(p.t0 >= 0.0)) throw ConfigError("RectPulse: t0 must be >= 0");
}

void validate(const GaussPulse& p) {
    if (!(p.C0 > 0.0)) throw ConfigError("GaussPulse: C0 must be > 0");
    if (!(p.sigma2 > 0.0)) throw ConfigError("GaussPulse: sigma2 must be > 0");
}

void validate(const ReactionSpec& r) {
    if (!(r.k >= 0.0)) throw ConfigError("ReactionSpec: k must be >= 0");
    if (!(r.C_B0 >= 0.0)) throw ConfigError("ReactionSpec: C_B0 must be >= 0");
}

std::string_view to_string(Source s) {
    return s == Source::analytical ? "analytical" : "oracle";
}

Eigen::ArrayXd time_grid(double t0, double t1, double dt) {
    if (!(dt > 0.0) || !(t1 > t0)) throw ConfigError("time_grid: need dt > 0 and t1 > t0");
    const auto n = static_cast<Eigen::Index>(std::floor((t1 - t0) / dt + 0.5)) + 1;
    Eigen::ArrayXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) t[i] = t0 + static_cast<double>(i) * dt;
    return t;
}

TimeSeries::TimeSeries(Eigen::ArrayXd t, Eigen::ArrayXd c, double station, Source source,
                       std::string species)
    : t_(std::move(t)), c_(std::move(c)), station_(station), source_(source),
      species_(std::move(species)) {
    if (t_.size() != c_.size()) throw ConfigError("TimeSeries: t and c differ in length");
    if (t_.size() < 2) throw ConfigError("TimeSeries: need at least two samples");
    for (Eigen::Index i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1])) throw ConfigError("TimeSeries: times must increase strictly");
    if (!c_.allFinite()) throw StabilityError("TimeSeries: non-finite concentration");
    const double floor = -1e-9 * std::max(1.0, c_.abs().maxCoeff());
    if (c_.minCoeff() < floor) throw StabilityError("TimeSeries: negative concentration");
}

double TimeSeries::at(double time) const {
    if (time < t_[0]) return 0.0;
    const auto n = t_.size();
    if (time >= t_[n - 1]) return c_[n - 1];
    const auto* first = t_.data();
    const auto* it = std::upper_bound(first, first + n, time);
    const auto i = static_cast<Eigen::Index>(it - first);
    const double w = (time - t_[i - 1]) / (t_[i] - t_[i - 1]);
    return (1.0 - w) * c_[i - 1] + w * c_[i];
}

double TimeSeries::peak() const { return c_.maxCoeff(); }

double TimeSeries::peak_time() const {
    Eigen::Index idx = 0;
    c_.maxCoeff(&idx);
    return t_[idx];
}

std::optional<std::pair<double, double>> TimeSeries::support(double level) const {
    std::optional<std::pair<double, double>> out;
    for (Eigen::Index i = 0; i < c_.size(); ++i) {
        if (c_[i] > level) {
            if (!out) out = std::pair{t_[i], t_[i]};
            out->second = t_[i];
        }
    }
    return out;
}

double TimeSeries::width_above(double level) const {
    double w = 0.0;
    for (Eigen::Index i = 0; i + 1 < c_.size(); ++i)
        if (c_[i] > level) w += t_[i + 1] - t_[i];
    return w;
}

TimeSeries TimeSeries::relabel(std::string species, double station) const {
    return TimeSeries(t_, c_, station, source_, std::move(species));
}

TimeSeries TimeSeries::resample(const Eigen::ArrayXd& grid) const {
    Eigen::ArrayXd c(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) c[i] = at(grid[i]);
    return TimeSeries(grid, std::move(c), station_, source_, species_);
}

}  // namespace mclink
