#ifndef OAL_DYNAMICS_HPP
#define OAL_DYNAMICS_HPP

// Numerical propagation: dense Lindblad master-equation integration (RK4,
// time-dependent Hamiltonians supported) and a Monte Carlo wave-function
// trajectory engine with the first-order jump rule.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "oal/models.hpp"
#include "oal/observables.hpp"

namespace oal {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

struct IntegratorConfig {
    double dt;
    double t_max;
    int record_stride = 1;

    void validate() const {
        if (!(dt > 0.0) || !(t_max >= 0.0) || record_stride < 1)
            throw ConfigError("invalid integrator config");
    }
};

enum class JumpRule { FirstOrder, NormExact };

struct TrajectoryConfig {
    int n_traj = 20;
    std::uint64_t master_seed = 0;
    double dt = 0.0;
    double t_max = 0.0;
    int record_stride = 1;
    JumpRule jump_rule = JumpRule::FirstOrder;

    void validate() const {
        if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
        IntegratorConfig{dt, t_max, record_stride}.validate();
    }
};

/// Time grid plus named observable columns, all of equal length.
struct ObservableSeries {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    int find(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return int(i);
        return -1;
    }
    bool has(const std::string& name) const { return find(name) >= 0; }
    const std::vector<double>& col(const std::string& name) const {
        const int i = find(name);
        if (i < 0) throw ConfigError("no observable column named " + name);
        return columns[std::size_t(i)];
    }
};

/// Deterministic per-trajectory substream: splitmix64 over (master, index).
inline std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace detail {

inline SparseMatrix sparsify(const Matrix& m) {
    SparseMatrix s = m.sparseView(1.0, 1e-15);
    s.makeCompressed();
    return s;
}

/// Sparse form of H(t) = static + sum_d e^{i f t} D + e^{-i f t} D^dag.
struct SparseHamiltonian {
    SparseMatrix stat;
    std::vector<SparseMatrix> drive, drive_adj;
    std::vector<double> freq;

    static SparseHamiltonian from(const TimeDependentHamiltonian& h) {
        SparseHamiltonian s;
        s.stat = sparsify(h.static_part);
        for (const auto& d : h.drives) {
            s.drive.push_back(sparsify(d.op));
            s.drive_adj.push_back(sparsify(d.op.adjoint()));
            s.freq.push_back(d.freq);
        }
        return s;
    }

    void apply(double t, const Vector& in, Vector& out) const {
        out.noalias() = stat * in;
        for (std::size_t d = 0; d < freq.size(); ++d) {
            const Complex phase = std::exp(Complex(0.0, freq[d] * t));
            out.noalias() += phase * (drive[d] * in);
            out.noalias() += std::conj(phase) * (drive_adj[d] * in);
        }
    }

    void apply_left(double t, const Matrix& rho, Matrix& out) const {
        out.noalias() = stat * rho;
        for (std::size_t d = 0; d < freq.size(); ++d) {
            const Complex phase = std::exp(Complex(0.0, freq[d] * t));
            out.noalias() += phase * (drive[d] * rho);
            out.noalias() += std::conj(phase) * (drive_adj[d] * rho);
        }
    }
};

inline void check_step_bound(const TimeDependentHamiltonian& h, double dt) {
    // inf-norm of H(0) overestimates the spectral radius; dt * rho(H) <= 0.1.
    const double norm = h.at(0.0).cwiseAbs().rowwise().sum().maxCoeff();
    if (dt * norm > 0.1)
        throw StepTooLarge("dt * |H| = " + std::to_string(dt * norm) + " exceeds 0.1");
}

struct SeriesRecorder {
    ObservableSeries series;
    bool has_p3 = false;

    explicit SeriesRecorder(const TruncatedSpace& space) {
        has_p3 = space.atom_dim == 3;
        series.names = {"mean_photon", "p1", "p2"};
        if (has_p3) series.names.push_back("p3");
        series.names.insert(series.names.end(), {"inversion", "entropy", "q", "norm_drift"});
        series.columns.resize(series.names.size());
    }

    void record(double t, const ObservableSet& o, double norm_drift) {
        series.times.push_back(t);
        std::size_t c = 0;
        series.columns[c++].push_back(o.mean_photon);
        series.columns[c++].push_back(o.populations.size() > 0 ? o.populations[0] : 1.0);
        series.columns[c++].push_back(o.populations.size() > 1 ? o.populations[1] : 0.0);
        if (has_p3) series.columns[c++].push_back(o.populations[2]);
        series.columns[c++].push_back(o.inversion);
        series.columns[c++].push_back(o.entropy_bits);
        series.columns[c++].push_back(o.q);
        series.columns[c++].push_back(norm_drift);
    }
};

} // namespace detail

struct LindbladResult {
    ObservableSeries series;
    DensityMatrix final_state;
};

/// RK4 integration of drho/dt = -i[H(t), rho] + sum_c (C rho Cd - {CdC, rho}/2).
/// Trace drift is recorded per sample; a per-step drift above 1e-6 aborts.
inline LindbladResult lindblad_evolve(const TimeDependentHamiltonian& h,
                                      const std::vector<Matrix>& collapse_ops,
                                      const DensityMatrix& rho0, const IntegratorConfig& cfg) {
    cfg.validate();
    detail::check_step_bound(h, cfg.dt);
    const int dim = int(rho0.matrix.rows());
    if (h.static_part.rows() != dim) throw DimensionMismatch("H/rho dimension mismatch");
    for (const auto& c : collapse_ops)
        if (c.rows() != dim) throw DimensionMismatch("collapse/rho dimension mismatch");

    const auto hs = detail::SparseHamiltonian::from(h);
    std::vector<SparseMatrix> cs, cds, cdcs;
    for (const auto& c : collapse_ops) {
        cs.push_back(detail::sparsify(c));
        cds.push_back(detail::sparsify(c.adjoint()));
        cdcs.push_back(detail::sparsify(c.adjoint() * c));
    }

    Matrix rho = rho0.matrix;
    Matrix hr(dim, dim), k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim);
    Matrix stage(dim, dim), scratch(dim, dim);
    const Complex mi(0.0, -1.0);

    auto rhs = [&](double t, const Matrix& r, Matrix& out) {
        hs.apply_left(t, r, hr);
        out = mi * (hr - hr.adjoint()); // r Hermitian: rH = (Hr)^dag
        for (std::size_t c = 0; c < cs.size(); ++c) {
            scratch.noalias() = cs[c] * r;
            out.noalias() += scratch * cds[c];
            scratch.noalias() = cdcs[c] * r;
            out -= 0.5 * (scratch + scratch.adjoint());
        }
    };

    const int n_steps = int(std::llround(cfg.t_max / cfg.dt));
    detail::SeriesRecorder rec(rho0.space);
    rec.record(0.0, extract(DensityMatrix{rho0.space, rho}), std::abs(rho.trace() - 1.0));

    double prev_trace = rho.trace().real();
    for (int step = 0; step < n_steps; ++step) {
        const double t = step * cfg.dt;
        const double half = 0.5 * cfg.dt;
        rhs(t, rho, k1);
        stage = rho + half * k1;
        rhs(t + half, stage, k2);
        stage = rho + half * k2;
        rhs(t + half, stage, k3);
        stage = rho + cfg.dt * k3;
        rhs(t + cfg.dt, stage, k4);
        rho += (cfg.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = 0.5 * (rho + Matrix(rho.adjoint()));

        const double tr = rho.trace().real();
        if (std::abs(tr - prev_trace) > 1e-6)
            throw StepTooLarge("trace drift " + std::to_string(tr - prev_trace) +
                               " in one step; reduce dt");
        prev_trace = tr;

        if ((step + 1) % cfg.record_stride == 0 || step + 1 == n_steps) {
            DensityMatrix cur{rho0.space, rho};
            rec.record((step + 1) * cfg.dt, extract(cur), std::abs(tr - 1.0));
        }
    }
    return {std::move(rec.series), DensityMatrix{rho0.space, rho}};
}

struct TrajectoryResult {
    ObservableSeries series;
    StateVector final_state;
    std::vector<double> jump_times;
};

/// One stochastic trajectory. The deterministic drift integrates the
/// non-Hermitian Schroedinger equation with RK4; the jump decision and the
/// post-step normalization follow the configured rule: FirstOrder divides
/// by sqrt(1 - dp) with dp = dt <Cd C>, NormExact renormalizes exactly.
inline TrajectoryResult mcwf_trajectory(const TimeDependentHamiltonian& h, const Matrix& collapse,
                                        const StateVector& psi0, const TrajectoryConfig& cfg,
                                        std::uint64_t seed) {
    cfg.validate();
    detail::check_step_bound(h, cfg.dt);
    const int dim = int(psi0.amplitudes.size());
    if (h.static_part.rows() != dim || collapse.rows() != dim)
        throw DimensionMismatch("H/C/psi dimension mismatch");

    // Fold -i/2 Cd C into the static part of the effective Hamiltonian.
    TimeDependentHamiltonian he = h;
    const Matrix cdc = collapse.adjoint() * collapse;
    he.static_part -= Complex(0.0, 0.5) * cdc;
    const auto hs = detail::SparseHamiltonian::from(he);
    const SparseMatrix c = detail::sparsify(collapse);
    const SparseMatrix cdcs = detail::sparsify(cdc);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    Vector psi = psi0.amplitudes;
    Vector k1(dim), k2(dim), k3(dim), k4(dim), stage(dim), work(dim);
    const Complex mi(0.0, -1.0);
    auto deriv = [&](double t, const Vector& in, Vector& out) {
        hs.apply(t, in, work);
        out = mi * work;
    };

    const int n_steps = int(std::llround(cfg.t_max / cfg.dt));
    detail::SeriesRecorder rec(psi0.space);
    TrajectoryResult result{{}, {psi0.space, psi}, {}};
    rec.record(0.0, extract(StateVector{psi0.space, psi}), std::abs(psi.norm() - 1.0));

    for (int step = 0; step < n_steps; ++step) {
        const double t = step * cfg.dt;
        const double dp = cfg.dt * (psi.adjoint() * (cdcs * psi))(0).real();
        if (dp > 0.1)
            throw DeltaPTooLarge("collapse probability " + std::to_string(dp) +
                                 " exceeds 0.1; reduce dt");
        const double u = uniform(rng);
        if (dp < u) {
            const double half = 0.5 * cfg.dt;
            deriv(t, psi, k1);
            stage = psi + half * k1;
            deriv(t + half, stage, k2);
            stage = psi + half * k2;
            deriv(t + half, stage, k3);
            stage = psi + cfg.dt * k3;
            deriv(t + cfg.dt, stage, k4);
            psi += (cfg.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (cfg.jump_rule == JumpRule::FirstOrder)
                psi /= std::sqrt(1.0 - dp);
            else
                psi /= psi.norm();
        } else {
            work.noalias() = c * psi;
            psi = work / work.norm();
            result.jump_times.push_back(t);
        }
        if ((step + 1) % cfg.record_stride == 0 || step + 1 == n_steps) {
            StateVector cur{psi0.space, psi / psi.norm()};
            rec.record((step + 1) * cfg.dt, extract(cur), std::abs(psi.norm() - 1.0));
        }
    }
    result.series = std::move(rec.series);
    result.final_state = StateVector{psi0.space, psi / psi.norm()};
    return result;
}

struct EnsembleResult {
    ObservableSeries series; // mean columns plus <name>_stderr columns
    std::vector<std::size_t> jump_counts;
    double mean_jump_count = 0.0;
};

/// Trajectory ensemble: column means with standard errors. Aggregation is by
/// trajectory index, so results do not depend on execution order.
inline EnsembleResult mcwf_ensemble(const TimeDependentHamiltonian& h, const Matrix& collapse,
                                    const StateVector& psi0, const TrajectoryConfig& cfg) {
    cfg.validate();
    EnsembleResult out;
    std::vector<std::vector<double>> sum, sumsq;
    std::vector<std::string> base_names;
    std::vector<double> times;

    for (int idx = 0; idx < cfg.n_traj; ++idx) {
        auto traj = mcwf_trajectory(h, collapse, psi0, cfg,
                                    trajectory_seed(cfg.master_seed, std::uint64_t(idx)));
        if (idx == 0) {
            base_names = traj.series.names;
            times = traj.series.times;
            sum.assign(base_names.size(), std::vector<double>(times.size(), 0.0));
            sumsq = sum;
        }
        for (std::size_t c = 0; c < base_names.size(); ++c)
            for (std::size_t i = 0; i < times.size(); ++i) {
                const double v = traj.series.columns[c][i];
                sum[c][i] += v;
                sumsq[c][i] += v * v;
            }
        out.jump_counts.push_back(traj.jump_times.size());
        out.mean_jump_count += double(traj.jump_times.size()) / cfg.n_traj;
    }

    const double n = double(cfg.n_traj);
    out.series.times = times;
    for (std::size_t c = 0; c < base_names.size(); ++c) {
        std::vector<double> mean(times.size()), se(times.size(), 0.0);
        for (std::size_t i = 0; i < times.size(); ++i) {
            mean[i] = sum[c][i] / n;
            if (cfg.n_traj > 1) {
                const double var =
                    std::max(0.0, (sumsq[c][i] - n * mean[i] * mean[i]) / (n - 1.0));
                se[i] = std::sqrt(var / n);
            }
        }
        out.series.names.push_back(base_names[c]);
        out.series.columns.push_back(std::move(mean));
        out.series.names.push_back(base_names[c] + "_stderr");
        out.series.columns.push_back(std::move(se));
    }
    return out;
}

struct BranchState {
    DensityMatrix field;
    double probability;
};

/// Project the atom onto a bare level, trace it out, renormalize.
inline BranchState conditional_field_state(const StateVector& psi, int atom_level) {
    const TruncatedSpace& s = psi.space;
    if (atom_level < 0 || atom_level >= s.atom_dim)
        throw DimensionMismatch("atom level out of range");
    Vector block = psi.amplitudes.segment(atom_level * s.fock_dim, s.fock_dim);
    const double p = block.squaredNorm();
    if (p < 1e-10) throw NegligibleBranch("branch probability " + std::to_string(p));
    block /= std::sqrt(p);
    return {DensityMatrix{TruncatedSpace(s.fock_dim, 1), block * block.adjoint()}, p};
}

struct Envelope {
    std::vector<double> upper, lower;
};

/// Sliding min/max over a centered window, for comparing fast-oscillating
/// numerical populations against the smooth theoretical curves.
inline Envelope envelope(const std::vector<double>& times, const std::vector<double>& values,
                         double window) {
    if (times.size() != values.size()) throw DimensionMismatch("envelope input mismatch");
    const std::size_t n = times.size();
    Envelope env{std::vector<double>(n), std::vector<double>(n)};
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (lo < n && times[lo] < times[i] - 0.5 * window) ++lo;
        while (hi < n && times[hi] <= times[i] + 0.5 * window) ++hi;
        double mx = values[lo], mn = values[lo];
        for (std::size_t j = lo; j < hi; ++j) {
            mx = std::max(mx, values[j]);
            mn = std::min(mn, values[j]);
        }
        env.upper[i] = mx;
        env.lower[i] = mn;
    }
    return env;
}

} // namespace oal

#endif
