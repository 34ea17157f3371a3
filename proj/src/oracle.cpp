#include "mclink/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "mclink/errors.hpp"
#include "mclink/tridiagonal.hpp"

namespace mclink {

TridiagonalFactor::TridiagonalFactor(const Eigen::ArrayXd& lower, const Eigen::ArrayXd& diag,
                                     const Eigen::ArrayXd& upper)
    : lower_(lower), upper_scaled_(diag.size()), inv_pivot_(diag.size()) {
    const auto n = diag.size();
    if (lower.size() != n || upper.size() != n || n == 0)
        throw ConfigError("TridiagonalFactor: inconsistent band sizes");
    double pivot = diag[0];
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i > 0) pivot = diag[i] - lower[i] * upper_scaled_[i - 1];
        if (pivot == 0.0) throw StabilityError("TridiagonalFactor: zero pivot");
        inv_pivot_[i] = 1.0 / pivot;
        upper_scaled_[i] = upper[i] * inv_pivot_[i];
    }
}

void TridiagonalFactor::solve_in_place(Eigen::Ref<Eigen::ArrayXd> rhs) const {
    const auto n = inv_pivot_.size();
    rhs[0] *= inv_pivot_[0];
    for (Eigen::Index i = 1; i < n; ++i) rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) * inv_pivot_[i];
    for (Eigen::Index i = n - 2; i >= 0; --i) rhs[i] -= upper_scaled_[i] * rhs[i + 1];
}

long OracleGrid::steps() const { return std::lround(t_max / dt); }

double MassLedger::relative_imbalance() const {
    const double scale = std::max({std::abs(inflow), std::abs(final), std::abs(initial), 1e-300});
    return std::abs(final - initial - inflow + outflow) / scale;
}

OracleGrid default_grid(const FlowEnv& env, double probe_max, double t_max, double dx_target,
                        double cfl) {
    if (!(env.v_eff > 0.0) || !(t_max > 0.0) || !(dx_target > 0.0) || !(cfl > 0.0))
        throw ConfigError("default_grid: need v_eff, t_max, dx_target and cfl > 0");
    const double x_max = probe_max + 10.0 * std::sqrt(env.D_eff * t_max);
    const int nx = std::max(32, static_cast<int>(std::ceil(x_max / dx_target)));
    const double dx = x_max / nx;
    const auto nt = static_cast<long>(std::ceil(t_max / (cfl * dx / env.v_eff)));
    return {x_max, nx, t_max / static_cast<double>(nt), t_max};
}

void validate(const OracleGrid& grid, const FlowEnv& env, const SpeciesSystem& system,
              const OracleOptions& opts) {
    if (grid.nx < 32) throw ConfigError("OracleGrid: nx must be >= 32");
    if (!(grid.x_max > 0.0) || !(grid.dt > 0.0) || !(grid.t_max > 0.0))
        throw ConfigError("OracleGrid: x_max, dt and t_max must be > 0");
    if (!(env.v_eff >= 0.0)) throw ConfigError("oracle: v_eff must be >= 0");
    const double cfl = env.v_eff * grid.dt / grid.dx();
    if (cfl > 1.0) throw ConfigError("OracleGrid: CFL number " + std::to_string(cfl) + " > 1");
    const int ns = static_cast<int>(system.species.size());
    if (ns == 0) throw ConfigError("SpeciesSystem: no species");
    for (const auto& s : system.species) {
        const double D = s.D.value_or(env.D_eff);
        if (!(D >= 0.0)) throw ConfigError("SpeciesSystem: negative diffusivity for " + s.name);
        if (opts.explicit_diffusion && D * grid.dt / (grid.dx() * grid.dx()) > 0.5)
            throw ConfigError("OracleGrid: diffusion number > 0.5 for explicit diffusion");
    }
    for (const auto& r : system.reactions) {
        if (!(r.k >= 0.0)) throw ConfigError("SpeciesSystem: negative rate constant");
        const auto bad = [&](int i) { return i < 0 || i >= ns; };
        if (bad(r.reactant_i) || bad(r.reactant_j) || r.product >= ns)
            throw ConfigError("SpeciesSystem: reaction refers to unknown species");
    }
    if (opts.output_stride < 1) throw ConfigError("OracleOptions: output_stride must be >= 1");
}

namespace {

using Field = std::vector<Eigen::ArrayXd>;

class Stepper {
public:
    Stepper(const SpeciesSystem& system, const FlowEnv& env, const OracleGrid& grid,
            const OracleOptions& opts)
        : sys_(system), grid_(grid), opts_(opts), nx_(grid.nx), dx_(grid.dx()),
          courant_(env.v_eff * grid.dt / grid.dx()) {
        const auto ns = sys_.species.size();
        for (std::size_t s = 0; s < ns; ++s) {
            const double D = sys_.species[s].D.value_or(env.D_eff);
            r_.push_back(D * grid.dt / (dx_ * dx_));
            if (!opts.explicit_diffusion) factors_.push_back(crank_nicolson_factor(r_.back()));
        }
    }

    Field initial_field() const {
        Field C(sys_.species.size(), Eigen::ArrayXd::Zero(nx_ + 1));
        for (std::size_t s = 0; s < C.size(); ++s) {
            const auto& sp = sys_.species[s];
            if (sp.initial)
                for (int i = 0; i <= nx_; ++i) C[s][i] = sp.initial(i * dx_);
            C[s][0] = inlet(s, 0.0);
        }
        return C;
    }

    double inlet(std::size_t s, double t) const {
        const auto& f = sys_.species[s].inlet;
        return f ? f(t) : 0.0;
    }

    // Advances the field from t to t + dt and updates the per-species flux ledgers.
    void step(Field& C, double t_next, std::vector<MassLedger>& mass) {
        const auto ns = C.size();
        for (std::size_t s = 0; s < ns; ++s) {
            auto& u = C[s];
            mass[s].inflow += courant_ * dx_ * u[0];
            mass[s].outflow += courant_ * dx_ * 0.5 * (u[nx_ - 1] + u[nx_]);
            if (courant_ > 0.0) {
                const Eigen::ArrayXd upwind = u.segment(1, nx_) - u.segment(0, nx_);
                u.segment(1, nx_) -= courant_ * upwind;
            }
        }
        react(C);
        for (std::size_t s = 0; s < ns; ++s) {
            auto& u = C[s];
            const double old0 = u[0];
            const double old_edge = u[0] - u[1];
            u[0] = inlet(s, t_next);
            if (opts_.explicit_diffusion)
                diffuse_explicit(u, r_[s], old0);
            else
                diffuse_crank_nicolson(u, s, old0);
            mass[s].inflow += 0.5 * r_[s] * dx_ * (old_edge + u[0] - u[1]);
        }
        check_sign(C, t_next);
    }

    int max_substeps() const { return max_substeps_; }

private:
    TridiagonalFactor crank_nicolson_factor(double r) const {
        const Eigen::Index n = nx_;  // unknowns are nodes 1..nx
        Eigen::ArrayXd lower = Eigen::ArrayXd::Constant(n, -0.5 * r);
        Eigen::ArrayXd diag = Eigen::ArrayXd::Constant(n, 1.0 + r);
        Eigen::ArrayXd upper = Eigen::ArrayXd::Constant(n, -0.5 * r);
        lower[n - 1] = -r;  // ghost node mirrors node nx - 1
        upper[n - 1] = 0.0;
        return {lower, diag, upper};
    }

    // u[0] already holds the new boundary value; old0 is the one before the step.
    void diffuse_crank_nicolson(Eigen::ArrayXd& u, std::size_t s, double old0) const {
        const double r = r_[s];
        if (r == 0.0) return;
        const Eigen::Index n = nx_;
        Eigen::ArrayXd rhs(n);
        rhs.head(n - 1) = 0.5 * r * u.segment(0, n - 1) + (1.0 - r) * u.segment(1, n - 1) +
                          0.5 * r * u.segment(2, n - 1);
        rhs[n - 1] = r * u[n - 1] + (1.0 - r) * u[n];
        rhs[0] += 0.5 * r * old0;
        factors_[s].solve_in_place(rhs);
        u.segment(1, n) = rhs;
    }

    void diffuse_explicit(Eigen::ArrayXd& u, double r, double old0) const {
        const Eigen::Index n = nx_;
        Eigen::ArrayXd lap(n);
        lap.head(n - 1) = u.segment(0, n - 1) - 2.0 * u.segment(1, n - 1) + u.segment(2, n - 1);
        lap[0] += old0 - u[0];
        lap[n - 1] = 2.0 * (u[n - 1] - u[n]);
        u.segment(1, n) += r * lap;
    }

    void rates(const Field& C, Field& dC) const {
        for (auto& d : dC) d.setZero();
        for (const auto& rx : sys_.reactions) {
            const Eigen::ArrayXd rate = rx.k * C[rx.reactant_i] * C[rx.reactant_j];
            if (!rx.catalytic) dC[rx.reactant_i] -= rate;
            dC[rx.reactant_j] -= rate;
            if (rx.product >= 0) dC[rx.product] += rate;
        }
    }

    void react(Field& C) {
        if (sys_.reactions.empty()) return;
        double stiffness = 0.0;
        for (const auto& rx : sys_.reactions) {
            const double cmax =
                std::max(C[rx.reactant_i].maxCoeff(), C[rx.reactant_j].maxCoeff());
            stiffness = std::max(stiffness, rx.k * cmax);
        }
        if (stiffness == 0.0) return;
        const int nsub = std::max(1, static_cast<int>(std::ceil(stiffness * grid_.dt / 0.1)));
        max_substeps_ = std::max(max_substeps_, nsub);
        const double h = grid_.dt / nsub;

        // Only nodes 1..nx react; node 0 is prescribed.
        const auto ns = C.size();
        Field y(ns), k1(ns), k2(ns), k3(ns), k4(ns), tmp(ns);
        for (std::size_t s = 0; s < ns; ++s) {
            y[s] = C[s].segment(1, nx_);
            k1[s].resize(nx_);
            k2[s].resize(nx_);
            k3[s].resize(nx_);
            k4[s].resize(nx_);
        }
        for (int sub = 0; sub < nsub; ++sub) {
            rates(y, k1);
            for (std::size_t s = 0; s < ns; ++s) tmp[s] = y[s] + 0.5 * h * k1[s];
            rates(tmp, k2);
            for (std::size_t s = 0; s < ns; ++s) tmp[s] = y[s] + 0.5 * h * k2[s];
            rates(tmp, k3);
            for (std::size_t s = 0; s < ns; ++s) tmp[s] = y[s] + h * k3[s];
            rates(tmp, k4);
            for (std::size_t s = 0; s < ns; ++s)
                y[s] += (h / 6.0) * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
        }
        for (std::size_t s = 0; s < ns; ++s) C[s].segment(1, nx_) = y[s];
    }

    void check_sign(const Field& C, double t) const {
        double cmax = 0.0;
        double cmin = 0.0;
        for (const auto& u : C) {
            cmax = std::max(cmax, u.maxCoeff());
            cmin = std::min(cmin, u.minCoeff());
        }
        if (cmin < -1e-9 * std::max(cmax, 1e-300))
            throw StabilityError("oracle: negative concentration " + std::to_string(cmin) +
                                 " at t = " + std::to_string(t));
    }

    const SpeciesSystem& sys_;
    OracleGrid grid_;
    OracleOptions opts_;
    int nx_;
    double dx_;
    double courant_;
    std::vector<double> r_;
    std::vector<TridiagonalFactor> factors_;
    int max_substeps_ = 0;
};

double mass_of(const Eigen::ArrayXd& u, double dx) {
    const auto n = u.size() - 1;
    return dx * (u.segment(1, n - 1).sum() + 0.5 * u[n]);
}

double sample(const Eigen::ArrayXd& u, double x, double dx) {
    const double pos = x / dx;
    const auto i = std::min(static_cast<Eigen::Index>(std::floor(pos)), u.size() - 2);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * u[i] + w * u[i + 1];
}

void dump(std::ofstream& out, const Field& C, const SpeciesSystem& sys, double t, double dx) {
    for (std::size_t s = 0; s < C.size(); ++s)
        for (Eigen::Index i = 0; i < C[s].size(); ++i)
            out << t << ',' << static_cast<double>(i) * dx << ',' << sys.species[s].name << ','
                << C[s][i] << '\n';
}

}  // namespace

OracleResult solve(const SpeciesSystem& system, const FlowEnv& env, const OracleGrid& grid,
                   std::span<const double> probes, const OracleOptions& opts) {
    validate(grid, env, system, opts);
    for (double p : probes)
        if (p < 0.0 || p > grid.x_max) throw ConfigError("oracle: probe outside the domain");

    Stepper stepper(system, env, grid, opts);
    Field C = stepper.initial_field();
    const auto ns = C.size();
    const double dx = grid.dx();
    const long nt = grid.steps();
    const long nout = nt / opts.output_stride + 1;

    std::vector<MassLedger> mass(ns);
    for (std::size_t s = 0; s < ns; ++s) mass[s].initial = mass_of(C[s], dx);

    Eigen::ArrayXd times(nout);
    std::vector<std::vector<Eigen::ArrayXd>> rec(probes.size(),
                                                 std::vector<Eigen::ArrayXd>(ns, Eigen::ArrayXd(nout)));
    const auto record = [&](long slot, double t) {
        times[slot] = t;
        for (std::size_t p = 0; p < probes.size(); ++p)
            for (std::size_t s = 0; s < ns; ++s) rec[p][s][slot] = sample(C[s], probes[p], dx);
    };
    record(0, 0.0);

    std::optional<std::ofstream> snap;
    long snap_stride = nt;
    if (opts.snapshot_csv) {
        snap.emplace(*opts.snapshot_csv);
        if (!*snap) throw ConfigError("oracle: cannot open snapshot file " + *opts.snapshot_csv);
        *snap << std::setprecision(10) << "t_seconds,x_m,species,concentration_mol_per_m3\n";
        if (opts.snapshot_every > 0.0)
            snap_stride = std::max(1L, std::lround(opts.snapshot_every / grid.dt));
    }

    for (long n = 1; n <= nt; ++n) {
        const double t = static_cast<double>(n) * grid.dt;
        stepper.step(C, t, mass);
        if (n % opts.output_stride == 0) record(n / opts.output_stride, t);
        if (snap && (n % snap_stride == 0 || n == nt)) dump(*snap, C, system, t, dx);
    }

    OracleResult out;
    for (std::size_t s = 0; s < ns; ++s) mass[s].final = mass_of(C[s], dx);
    out.mass = std::move(mass);
    out.max_substeps = stepper.max_substeps();
    for (std::size_t p = 0; p < probes.size(); ++p) {
        std::vector<TimeSeries> traces;
        for (std::size_t s = 0; s < ns; ++s)
            traces.emplace_back(times, rec[p][s], probes[p], Source::oracle, system.species[s].name);
        out.probes.emplace(probes[p], std::move(traces));
    }
    return out;
}

ConvergenceReport convergence_report(const SpeciesSystem& system, const FlowEnv& env,
                                     const OracleGrid& base, std::span<const double> probes,
                                     int levels) {
    if (levels < 3) throw ConfigError("convergence_report: need at least 3 refinement levels");
    std::vector<OracleResult> runs;
    for (int l = 0; l < levels; ++l) {
        OracleGrid g = base;
        g.nx = base.nx << l;
        g.dt = base.dt / static_cast<double>(1L << l);
        OracleOptions opts;
        opts.output_stride = 1 << l;
        runs.push_back(solve(system, env, g, probes, opts));
    }
    ConvergenceReport report;
    for (double p : probes) {
        for (std::size_t s = 0; s < system.species.size(); ++s) {
            ConvergenceEntry e{p, system.species[s].name, {}, {}, true};
            for (int l = 0; l + 1 < levels; ++l) {
                const auto& a = runs[l].probes.at(p)[s].c();
                const auto& b = runs[l + 1].probes.at(p)[s].c();
                e.differences.push_back((a - b).abs().maxCoeff());
            }
            for (std::size_t i = 0; i + 1 < e.differences.size(); ++i) {
                const double r = e.differences[i] / e.differences[i + 1];
                e.orders.push_back(std::log2(r));
                if (!(e.differences[i + 1] < e.differences[i])) e.monotone = false;
            }
            report.entries.push_back(std::move(e));
        }
    }
    return report;
}

}  // namespace mclink
