#ifndef OAL_MODELS_HPP
#define OAL_MODELS_HPP

// Parameter bookkeeping and Hamiltonian construction for the full three-level
// Lambda model and the effective strongly-driven two-level model, plus the
// regime-validity checker. All frequencies are in units of the large detuning,
// all times in its inverse.

#include <cmath>
#include <string>
#include <vector>

#include "oal/fock.hpp"

namespace oal {

/// Dimensionless parameters of the three-level model. kappa = 0 selects the
/// purely Hamiltonian regime.
struct LambdaParams {
    double delta_prime; // second detuning, < 1
    double g;           // atom-cavity coupling
    double omega;       // strong-laser Rabi frequency
    double omega1p;     // first auxiliary laser
    double omega2p;     // second auxiliary laser
    double kappa;       // cavity decay rate

    void validate() const {
        if (!(delta_prime > 0.0 && delta_prime < 1.0))
            throw ConfigError("delta_prime must lie in (0,1)");
        if (!(g >= 0.0) || !(omega >= 0.0) || !(omega1p >= 0.0) || !(omega2p >= 0.0))
            throw ConfigError("couplings must be nonnegative");
        if (!(kappa >= 0.0)) throw ConfigError("kappa must be >= 0");
    }
};

struct EffectiveParams {
    double g_eff;
    double omega_eff;
    double kappa;

    void validate() const {
        if (!(g_eff >= 0.0) || !(omega_eff >= 0.0))
            throw ConfigError("effective couplings must be nonnegative");
        if (!(kappa >= 0.0)) throw ConfigError("kappa must be >= 0");
    }
};

/// g_eff = g Omega / Delta', Omega_eff = Omega Omega'_2 / Delta'.
inline EffectiveParams effective_params(const LambdaParams& p) {
    return {p.g * p.omega / p.delta_prime, p.omega * p.omega2p / p.delta_prime, p.kappa};
}

enum class HamiltonianKind { FullLambda, EffectiveDriven, EffectiveFinal };

struct HamiltonianSpec {
    HamiltonianKind kind;
    TruncatedSpace space;

    void validate() const {
        if (kind == HamiltonianKind::FullLambda && space.atom_dim != 3)
            throw DimensionMismatch("full-lambda Hamiltonian needs atom_dim=3");
        if (kind != HamiltonianKind::FullLambda && space.atom_dim != 2)
            throw DimensionMismatch("effective Hamiltonians need atom_dim=2");
    }
};

/// H(t) = static + sum_d (e^{i f_d t} op_d + h.c.), the shape both integrators
/// consume for time-dependent problems.
struct DriveTerm {
    Matrix op;
    double freq;
};

struct TimeDependentHamiltonian {
    Matrix static_part;
    std::vector<DriveTerm> drives;

    Matrix at(double t) const {
        Matrix h = static_part;
        for (const auto& d : drives) {
            const Complex phase = std::exp(Complex(0.0, d.freq * t));
            h += phase * d.op + std::conj(phase) * d.op.adjoint();
        }
        return h;
    }
};

/// Three-level interaction-picture Hamiltonian, atom levels ordered
/// {|1>, |2>, |3>}:
///   -D' 1 + D' S33 - (1-D') n + [(g a + O'2)|3><2| + h.c.]
///   + [O'1 b_t |3><1| + h.c.],   b_t = 1 + (O/O'1) e^{i(1-D')t}.
inline TimeDependentHamiltonian full_hamiltonian_terms(const LambdaParams& p,
                                                       const TruncatedSpace& space) {
    p.validate();
    HamiltonianSpec{HamiltonianKind::FullLambda, space}.validate();
    const double detuning_gap = 1.0 - p.delta_prime; // (Delta - Delta')/Delta

    const Matrix a = annihilation_op(space).matrix;
    const Matrix n = number_op(space).matrix;
    const Matrix s33 = atom_projector(space, 2).matrix;
    const Matrix s23p = atom_transfer(space, 2, 1).matrix; // |3><2|
    const Matrix s13p = atom_transfer(space, 2, 0).matrix; // |3><1|

    Matrix h0 = -p.delta_prime * Matrix::Identity(space.dim(), space.dim());
    h0 += p.delta_prime * s33;
    h0 -= detuning_gap * n;
    Matrix cav = p.g * (a * s23p) + p.omega2p * s23p;
    h0 += cav + cav.adjoint();
    Matrix laser = p.omega1p * s13p;
    h0 += laser + laser.adjoint();

    TimeDependentHamiltonian h{h0, {}};
    h.drives.push_back({p.omega * s13p, detuning_gap});
    return h;
}

inline FieldOperator build_full_hamiltonian(const LambdaParams& p, const TruncatedSpace& space,
                                            double t) {
    return {space, full_hamiltonian_terms(p, space).at(t)};
}

/// Effective two-level Hamiltonians, atom levels ordered {|1>, |2>}:
///   driven:  -g_eff (adag s+ + a s-) - Omega_eff (s+ + s-)
///   final:   -(g_eff/2) (adag + a)(s+ + s-)
inline FieldOperator build_effective_hamiltonian(const EffectiveParams& e,
                                                 const TruncatedSpace& space,
                                                 HamiltonianKind kind) {
    e.validate();
    HamiltonianSpec{kind, space}.validate();
    const Matrix a = annihilation_op(space).matrix;
    const Matrix sp = atom_transfer(space, 1, 0).matrix; // |2><1|
    Matrix h;
    if (kind == HamiltonianKind::EffectiveDriven) {
        Matrix jc = -e.g_eff * (a.adjoint() * sp);
        h = jc + jc.adjoint() - e.omega_eff * (sp + sp.adjoint());
    } else if (kind == HamiltonianKind::EffectiveFinal) {
        h = -0.5 * e.g_eff * Matrix(a.adjoint() + a) * Matrix(sp + sp.adjoint());
    } else {
        throw DimensionMismatch("build_effective_hamiltonian cannot build full-lambda");
    }
    return {space, h};
}

enum class CheckStatus { Pass, Warn, Fail };

struct ValidityEntry {
    std::string name;
    double value;
    CheckStatus status;
};

struct ValidityReport {
    std::vector<ValidityEntry> entries;
    CheckStatus overall = CheckStatus::Pass;
    bool passed() const { return overall == CheckStatus::Pass; }
};

/// Margins of the perturbative reduction and the strong-driving RWA. A ratio
/// below 0.15 passes, below 0.35 warns, otherwise fails.
inline ValidityReport check_validity(const LambdaParams& p) {
    const auto eff = effective_params(p);
    ValidityReport r;
    auto add = [&r](const std::string& name, double value) {
        CheckStatus s = value < 0.15 ? CheckStatus::Pass
                                     : (value < 0.35 ? CheckStatus::Warn : CheckStatus::Fail);
        r.entries.push_back({name, value, s});
        if (static_cast<int>(s) > static_cast<int>(r.overall)) r.overall = s;
    };
    add("omega1p/delta_prime", p.omega1p / p.delta_prime);
    add("(omega/delta_prime)^2", std::pow(p.omega / p.delta_prime, 2));
    add("g/delta", p.g);
    add("(omega2p/delta)^2", p.omega2p * p.omega2p);
    add("((delta-delta_prime)/delta)^2", std::pow(1.0 - p.delta_prime, 2));
    add("g_eff/omega_eff", eff.omega_eff > 0.0 ? eff.g_eff / eff.omega_eff : HUGE_VAL);
    return r;
}

} // namespace oal

#endif
