#include "mclink/flow.hpp"

#include <cmath>
#include <string>

#include "mclink/errors.hpp"

namespace mclink {

void validate(const FlowEnv& env) {
    if (!(env.v_eff > 0.0)) throw ConfigError("FlowEnv: v_eff must be > 0");
    if (!(env.D > 0.0)) throw ConfigError("FlowEnv: D must be > 0");
    if (!(env.D_eff >= env.D)) throw ConfigError("FlowEnv: D_eff must be >= D");
    if (env.rho && !(*env.rho > 0.0)) throw ConfigError("FlowEnv: rho must be > 0");
    if (env.mu && !(*env.mu > 0.0)) throw ConfigError("FlowEnv: mu must be > 0");
}

void validate(const ChannelGeometry& geom) {
    if (!(geom.length > 0.0 && geom.width > 0.0 && geom.height > 0.0))
        throw ConfigError("ChannelGeometry: length, width and height must be > 0");
}

double reynolds_number(double rho, double v_eff, double D_H, double mu) {
    if (!(rho > 0.0 && v_eff > 0.0 && D_H > 0.0 && mu > 0.0))
        throw DomainError("reynolds_number: all inputs must be > 0");
    return rho * v_eff * D_H / mu;
}

double hydraulic_diameter(const ChannelGeometry& geom) {
    if (!(geom.width > 0.0 && geom.height > 0.0))
        throw DomainError("hydraulic_diameter: width and height must be > 0");
    return 2.0 * geom.height * geom.width / (geom.height + geom.width);
}

double poiseuille_velocity(double r, double R, double v_eff) {
    if (!(R > 0.0)) throw DomainError("poiseuille_velocity: R must be > 0");
    if (r < 0.0 || r > R) throw DomainError("poiseuille_velocity: r outside [0, R]");
    const double q = r / R;
    return 2.0 * v_eff * (1.0 - q * q);
}

double taylor_aris_deff(double D, double v_eff, double h, double w) {
    if (!(D > 0.0)) throw DomainError("taylor_aris_deff: D must be > 0");
    if (h < 0.0 || w < 0.0) throw DomainError("taylor_aris_deff: negative channel dimension");
    const double denom = h * h + 2.4 * h * w + w * w;
    if (denom == 0.0) return D;
    return D * (1.0 + 8.5 * v_eff * v_eff * h * h * w * w / (210.0 * D * D * denom));
}

FlowEnv with_taylor_aris(FlowEnv env, const ChannelGeometry& geom) {
    env.D_eff = taylor_aris_deff(env.D, env.v_eff, geom.height, geom.width);
    return env;
}

}  // namespace mclink
