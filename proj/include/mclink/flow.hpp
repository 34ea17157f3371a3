#pragma once

#include <optional>

namespace mclink {

/// Flow and transport environment of a channel network.
struct FlowEnv {
    double v_eff{};              ///< mean flow velocity [m/s]
    double D{};                  ///< molecular diffusivity [m^2/s]
    double D_eff{};              ///< effective axial diffusivity [m^2/s]
    std::optional<double> rho;   ///< fluid density [kg/m^3]
    std::optional<double> mu;    ///< dynamic viscosity [Pa s]
};

/// Straight channel segment with rectangular cross-section.
struct ChannelGeometry {
    double length{};  ///< [m]
    double width{};   ///< [m]
    double height{};  ///< [m]
};

/// Throws ConfigError unless v_eff > 0, D > 0, D_eff >= D and optional fields are positive.
void validate(const FlowEnv& env);
void validate(const ChannelGeometry& geom);

/// Reynolds number rho v D_H / mu.
double reynolds_number(double rho, double v_eff, double D_H, double mu);

/// Hydraulic diameter 2 h w / (h + w) of a rectangular duct.
double hydraulic_diameter(const ChannelGeometry& geom);

/// Poiseuille profile 2 v_eff (1 - r^2 / R^2) at radius r.
double poiseuille_velocity(double r, double R, double v_eff);

/// Taylor-Aris effective diffusivity of a rectangular channel.
double taylor_aris_deff(double D, double v_eff, double h, double w);

/// Returns env with D_eff replaced by the Taylor-Aris value for geom.
FlowEnv with_taylor_aris(FlowEnv env, const ChannelGeometry& geom);

}  // namespace mclink
