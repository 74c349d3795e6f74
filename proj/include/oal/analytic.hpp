#ifndef OAL_ANALYTIC_HPP
#define OAL_ANALYTIC_HPP

// Closed-form solution of the effective master equation: the (alpha(t), f(t))
// pair and everything derived from it -- joint and conditional states, photon
// statistics, entanglement entropy, inversion and decoherence landmarks.
// Exact oracle for the numerical integrators.

#include <cmath>

#include "oal/fock.hpp"

namespace oal {

/// kappa = 0 selects the unitary-limit closed forms.
struct AnalyticSolution {
    double g_eff;
    double kappa;

    bool unitary_limit() const { return kappa == 0.0; }
    double steady_mean_photon() const {
        return kappa > 0.0 ? (g_eff / kappa) * (g_eff / kappa) : HUGE_VAL;
    }
};

enum class Branch { Lower = 1, Upper = 2 }; // atom detected in |1> / |2>

/// alpha(t) = i (g/k)(1 - e^{-kt/2}); unitary limit i g t / 2.
inline Complex alpha_t(const AnalyticSolution& s, double t) {
    if (s.unitary_limit()) return Complex(0.0, 0.5 * s.g_eff * t);
    return Complex(0.0, -s.g_eff / s.kappa * std::expm1(-0.5 * s.kappa * t));
}

namespace detail {

inline double log_f(const AnalyticSolution& s, double t) {
    if (s.unitary_limit()) return -0.5 * s.g_eff * s.g_eff * t * t;
    const double onemu = -std::expm1(-0.5 * s.kappa * t); // 1 - e^{-kt/2}
    return -2.0 * s.g_eff * s.g_eff / s.kappa * t +
           4.0 * s.g_eff * s.g_eff / (s.kappa * s.kappa) * onemu;
}

/// log of the coherence ratio r(t) = f(t) e^{2|alpha|^2} <= 1; zero in the
/// unitary limit where f = e^{-2|alpha|^2} exactly.
inline double log_r(const AnalyticSolution& s, double t) {
    if (s.unitary_limit()) return 0.0;
    return log_f(s, t) + 2.0 * std::norm(alpha_t(s, t));
}

} // namespace detail

/// Decoherence function f(t) = exp{-2 g^2 t / k + 4 (g/k)^2 (1 - e^{-kt/2})};
/// unitary limit exp(-g^2 t^2 / 2).
inline double f_t(const AnalyticSolution& s, double t) { return std::exp(detail::log_f(s, t)); }

inline double mean_photon(const AnalyticSolution& s, double t) {
    return std::norm(alpha_t(s, t));
}

/// Unconditional photon distribution: Poisson with mean |alpha(t)|^2.
inline double photon_pdf(const AnalyticSolution& s, double t, int n) {
    const double lam = mean_photon(s, t);
    if (lam == 0.0) return n == 0 ? 1.0 : 0.0;
    double logp = -lam + n * std::log(lam);
    for (int k = 2; k <= n; ++k) logp -= std::log(double(k));
    return std::exp(logp);
}

/// p_{1,2}(t) = (1 +- f)/2.
inline double branch_probability(const AnalyticSolution& s, double t, Branch b) {
    const double f = f_t(s, t);
    return b == Branch::Lower ? 0.5 * (1.0 + f) : 0.5 * (1.0 - f);
}

/// Conditional photon statistics after measuring the atom in |1> or |2>:
/// p_n^{(1,2)} = Poisson_n(|a|^2) [1 +- (-1)^n r] / (1 +- f), r = f e^{2|a|^2}.
inline double conditional_photon_pdf(const AnalyticSolution& s, double t, Branch b, int n) {
    if (n < 0) return 0.0;
    const double lr = detail::log_r(s, t);
    if (lr > 1e-12)
        throw NegativeProbability("f exceeds e^{-2|alpha|^2}: inconsistent (alpha, f)");
    const double base = photon_pdf(s, t, n);
    const double r = std::exp(lr);
    const double f = f_t(s, t);
    const bool even = (n % 2 == 0);
    if (b == Branch::Lower) return base * (even ? (1.0 + r) : (1.0 - r)) / (1.0 + f);
    // Branch 2: both 1 - r and 1 - f can underflow; use expm1 for the ratio.
    const double one_minus_r = -std::expm1(lr);
    const double one_minus_f = -std::expm1(detail::log_f(s, t));
    if (one_minus_f == 0.0) return n == 1 ? 1.0 : 0.0; // t = 0 limit: one photon
    return base * (even ? one_minus_r : (1.0 + r)) / one_minus_f;
}

namespace detail {

template <typename Pdf>
inline double mandel_q_of(Pdf&& pdf, int support) {
    double norm = 0.0, m1 = 0.0, m2 = 0.0;
    for (int n = 0; n < support; ++n) {
        const double p = pdf(n);
        norm += p;
        m1 += n * p;
        m2 += double(n) * n * p;
    }
    if (norm <= 0.0 || m1 / norm < 1e-12) return 0.0;
    m1 /= norm;
    m2 /= norm;
    return (m2 - m1 * m1) / m1 - 1.0;
}

} // namespace detail

/// Mandel-Fano Q of the unconditional distribution (identically 0: Poisson).
inline double mandel_q(const AnalyticSolution& s, double t) {
    const int support = suggest_fock_dim(std::abs(alpha_t(s, t)));
    return detail::mandel_q_of([&](int n) { return photon_pdf(s, t, n); }, support);
}

inline double mandel_q(const AnalyticSolution& s, double t, Branch b) {
    const int support = suggest_fock_dim(std::abs(alpha_t(s, t)));
    return detail::mandel_q_of([&](int n) { return conditional_photon_pdf(s, t, b, n); },
                               support);
}

/// Reduced atomic density matrix in the |+>, |-> basis.
inline Eigen::Matrix2cd atom_density(const AnalyticSolution& s, double t) {
    const double f = f_t(s, t);
    Eigen::Matrix2cd m;
    m << 0.5, 0.5 * f, 0.5 * f, 0.5;
    return m;
}

inline double population(const AnalyticSolution& s, double t, Branch b) {
    return branch_probability(s, t, b);
}

/// Atomic inversion I(t) = p1 - p2 = f(t).
inline double inversion(const AnalyticSolution& s, double t) { return f_t(s, t); }

namespace detail {

inline double binary_entropy_bits(double lam1) {
    const double lam2 = 1.0 - lam1;
    auto xlg = [](double x) { return x > 0.0 ? x * std::log2(x) : 0.0; };
    return -xlg(lam1) - xlg(lam2) + 0.0; // + 0.0 avoids returning -0

}

} // namespace detail

/// Entropy of entanglement in bits from the atom eigenvalues (1 +- f)/2.
inline double entanglement_entropy(const AnalyticSolution& s, double t) {
    return detail::binary_entropy_bits(0.5 * (1.0 + f_t(s, t)));
}

/// Onset of the exponential decoherence regime: the inflection point of I(t).
inline double inflection_time(const AnalyticSolution& s) {
    const double n = s.steady_mean_photon();
    if (!(s.kappa > 0.0) || !(n > 0.0))
        throw ConfigError("inflection_time needs kappa > 0");
    return -2.0 / s.kappa * std::log(1.0 + (1.0 - std::sqrt(1.0 + 16.0 * n)) / (8.0 * n));
}

struct DecoherenceRates {
    double gamma_d;       // k (sqrt(1+16N) - 1)/4, ~ g_eff at large N
    double gamma_d_prime; // 2 k N, the standard cat-state rate
};

inline DecoherenceRates decoherence_rates(const AnalyticSolution& s) {
    const double n = s.steady_mean_photon();
    return {s.kappa * (std::sqrt(1.0 + 16.0 * n) - 1.0) / 4.0, 2.0 * s.kappa * n};
}

/// The four field blocks of the decomposition over |+><+|, |-><-|, |+><-|,
/// |-><+| plus the assembled atom-field density matrix in the bare basis.
struct JointState {
    Matrix rho1, rho2, rho3, rho4; // field blocks, fock_dim x fock_dim
    DensityMatrix rho_af;          // space with atom_dim = 2, bare {|1>,|2>} basis
};

inline JointState joint_state(const AnalyticSolution& s, double t, const TruncatedSpace& space) {
    if (space.atom_dim != 2) throw DimensionMismatch("joint_state needs atom_dim=2");
    const TruncatedSpace field(space.fock_dim, 1);
    const Complex a = alpha_t(s, t);
    const Vector plus = coherent_state(field, a).amplitudes;
    const Vector minus = coherent_state(field, -a).amplitudes;
    const double r = std::exp(detail::log_r(s, t));

    JointState j{0.5 * (plus * plus.adjoint()),
                 0.5 * (minus * minus.adjoint()),
                 0.5 * r * (plus * minus.adjoint()),
                 0.5 * r * (minus * plus.adjoint()),
                 {space, Matrix()}};

    const int F = space.fock_dim;
    Matrix pm(2 * F, 2 * F);
    pm.block(0, 0, F, F) = j.rho1;
    pm.block(F, F, F, F) = j.rho2;
    pm.block(0, F, F, F) = j.rho3;
    pm.block(F, 0, F, F) = j.rho4;
    // Rotate |+/-> blocks into the bare {|1>,|2>} basis with the Hadamard.
    Matrix had = Matrix::Zero(2 * F, 2 * F);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    had.block(0, 0, F, F) = inv_sqrt2 * Matrix::Identity(F, F);
    had.block(0, F, F, F) = inv_sqrt2 * Matrix::Identity(F, F);
    had.block(F, 0, F, F) = inv_sqrt2 * Matrix::Identity(F, F);
    had.block(F, F, F, F) = -inv_sqrt2 * Matrix::Identity(F, F);
    j.rho_af.matrix = had * pm * had;
    return j;
}

/// Field state conditioned on detecting the atom in |1> or |2>:
/// [rho1 + rho2 +- (rho3 + rho4)] / (2 p_{1,2}).
inline DensityMatrix conditional_field_state(const AnalyticSolution& s, double t, Branch b,
                                             const TruncatedSpace& field) {
    if (field.atom_dim != 1)
        throw DimensionMismatch("conditional_field_state builds a field-only state");
    const TruncatedSpace pair(field.fock_dim, 2);
    const JointState j = joint_state(s, t, pair);
    const double p = branch_probability(s, t, b);
    const double sign = (b == Branch::Lower) ? 1.0 : -1.0;
    Matrix m = (j.rho1 + j.rho2 + sign * (j.rho3 + j.rho4)) / (2.0 * p);
    return {field, m};
}

struct ConditionalFieldState {
    Branch branch;
    Complex alpha;
    double f;
    double probability;
};

inline ConditionalFieldState conditional_summary(const AnalyticSolution& s, double t, Branch b) {
    return {b, alpha_t(s, t), f_t(s, t), branch_probability(s, t, b)};
}

/// Even/odd cat of the transient regime: (|a> +- |-a>)/sqrt(2(1 +- e^{-2|a|^2}))
/// with a = i g_eff t / 2, renormalized after truncation.
inline StateVector conditional_cat_state(const AnalyticSolution& s, double t, Branch b,
                                         const TruncatedSpace& field) {
    const Complex a(0.0, 0.5 * s.g_eff * t);
    const Vector plus = coherent_state(field, a).amplitudes;
    const Vector minus = coherent_state(field, -a).amplitudes;
    Vector v = (b == Branch::Lower) ? Vector(plus + minus) : Vector(plus - minus);
    const double norm = v.norm();
    if (norm < 1e-300) return fock_state(field, 0, b == Branch::Lower ? 0 : 1);
    return {field, v / norm};
}

} // namespace oal

#endif
