#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <string_view>

namespace mclink {

/// Rectangular inlet pulse of height C0 lasting T_on from t0.
struct RectPulse {
    double C0{};    ///< [mol/m^3]
    double T_on{};  ///< [s]
    double t0{};    ///< [s]
};

/// Gaussian inlet pulse C0 / sqrt(2 pi sigma2) exp(-(t - mu)^2 / (2 sigma2)).
struct GaussPulse {
    double C0{};      ///< area [mol s/m^3]
    double mu{};      ///< [s]
    double sigma2{};  ///< [s^2]

    [[nodiscard]] double operator()(double t) const;
    [[nodiscard]] double peak() const;
};

/// Bimolecular reaction A + B -> AB with B supplied at C_B0.
struct ReactionSpec {
    double k{};     ///< [m^3/(mol s)]
    double C_B0{};  ///< [mol/m^3]
};

void validate(const RectPulse& p);
void validate(const GaussPulse& p);
void validate(const ReactionSpec& r);

enum class Source { analytical, oracle };
std::string_view to_string(Source s);

/// Uniform grid t0, t0 + dt, ..., up to and including t1 (within half a step).
Eigen::ArrayXd time_grid(double t0, double t1, double dt);

/// Concentration trace sampled at one spatial station.
class TimeSeries {
public:
    TimeSeries(Eigen::ArrayXd t, Eigen::ArrayXd c, double station, Source source,
               std::string species = {});

    [[nodiscard]] const Eigen::ArrayXd& t() const noexcept { return t_; }
    [[nodiscard]] const Eigen::ArrayXd& c() const noexcept { return c_; }
    [[nodiscard]] double station() const noexcept { return station_; }
    [[nodiscard]] Source source() const noexcept { return source_; }
    [[nodiscard]] const std::string& species() const noexcept { return species_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return t_.size(); }

    /// Linear interpolation, zero before the first sample, held after the last.
    [[nodiscard]] double at(double time) const;
    [[nodiscard]] double peak() const;
    /// Time of the first sample attaining the maximum.
    [[nodiscard]] double peak_time() const;
    /// First and last sample time with c > level, if any.
    [[nodiscard]] std::optional<std::pair<double, double>> support(double level) const;
    /// Total duration of samples with c > level, counted in sample intervals.
    [[nodiscard]] double width_above(double level) const;

    [[nodiscard]] TimeSeries relabel(std::string species, double station) const;
    /// Linear interpolation onto a new grid.
    [[nodiscard]] TimeSeries resample(const Eigen::ArrayXd& grid) const;

private:
    Eigen::ArrayXd t_;
    Eigen::ArrayXd c_;
    double station_;
    Source source_;
    std::string species_;
};

}  // namespace mclink
