#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mclink/flow.hpp"
#include "mclink/signals.hpp"

namespace mclink {

struct OracleGrid {
    double x_max{};  ///< [m]
    int nx{};        ///< number of cells; nodes are 0..nx
    double dt{};     ///< [s]
    double t_max{};  ///< [s]

    [[nodiscard]] double dx() const { return x_max / nx; }
    [[nodiscard]] long steps() const;
};

/// Grid whose domain extends 10 sqrt(D_eff t_max) past the last probe, with dx <= dx_target
/// and dt = cfl dx / v_eff rounded so that t_max is a whole number of steps.
OracleGrid default_grid(const FlowEnv& env, double probe_max, double t_max,
                        double dx_target = 2e-6, double cfl = 0.25);

using TimeFunction = std::function<double(double)>;

struct Species {
    std::string name;
    TimeFunction inlet;                       ///< Dirichlet value at x = 0; empty means zero
    std::function<double(double)> initial;    ///< C(x, 0); empty means zero
    std::optional<double> D;                  ///< defaults to env.D_eff
};

/// reactant_i + reactant_j -> product at rate k C_i C_j. A catalytic reaction leaves
/// reactant_i untouched. product < 0 discards the product.
struct Reaction {
    int reactant_i{};
    int reactant_j{};
    int product{-1};
    double k{};
    bool catalytic{false};
};

struct SpeciesSystem {
    std::vector<Species> species;
    std::vector<Reaction> reactions;
};

struct OracleOptions {
    bool explicit_diffusion = false;
    int output_stride = 1;                    ///< record every n-th step
    std::optional<std::string> snapshot_csv;  ///< raw field dump for debugging
    double snapshot_every = 0.0;              ///< [s]; 0 dumps only the final field
};

struct MassLedger {
    double initial{};
    double final{};
    double inflow{};
    double outflow{};
    [[nodiscard]] double relative_imbalance() const;
};

struct OracleResult {
    /// station -> one trace per species, in system order
    std::map<double, std::vector<TimeSeries>> probes;
    std::vector<MassLedger> mass;
    int max_substeps{};
};

void validate(const OracleGrid& grid, const FlowEnv& env, const SpeciesSystem& system,
              const OracleOptions& opts = {});

/// Operator-split finite-difference solve of the convection-diffusion-reaction system.
OracleResult solve(const SpeciesSystem& system, const FlowEnv& env, const OracleGrid& grid,
                   std::span<const double> probes, const OracleOptions& opts = {});

struct ConvergenceEntry {
    double station{};
    std::string species;
    std::vector<double> differences;  ///< L-inf difference between consecutive levels
    std::vector<double> orders;       ///< log2 ratio of consecutive differences
    bool monotone{};
};

struct ConvergenceReport {
    std::vector<ConvergenceEntry> entries;
};

/// Runs `levels` grids, halving dx and dt from `base` each time, and estimates observed orders.
ConvergenceReport convergence_report(const SpeciesSystem& system, const FlowEnv& env,
                                     const OracleGrid& base, std::span<const double> probes,
                                     int levels);

}  // namespace mclink
