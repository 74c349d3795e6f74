#ifndef OAL_OBSERVABLES_HPP
#define OAL_OBSERVABLES_HPP

// Extraction of reported quantities from numerical states: populations, mean
// photon number, photon distribution, Mandel-Fano Q, von Neumann entropy of
// the reduced atom, inversion. Shared by both integrators and the analytic
// assembler.

#include <cmath>
#include <vector>

#include "oal/fock.hpp"

namespace oal {

struct ObservableSet {
    double mean_photon = 0.0;
    std::vector<double> populations; // one entry per atom level (bare basis)
    std::vector<double> photon_pdf;  // fock_dim entries
    double q = 0.0;
    double entropy_bits = 0.0;
    double inversion = 0.0; // p1 - p2 (0 for a field-only state)
};

namespace detail {

inline double entropy_bits_of(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + Matrix(rho.adjoint())));
    double s = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()(i);
        if (lam > 1e-15) s -= lam * std::log2(lam);
    }
    return s + 0.0; // avoid -0

}

inline ObservableSet extract_impl(const TruncatedSpace& space,
                                  const std::vector<double>& pdf,
                                  const std::vector<double>& pops,
                                  const Matrix& atom_rho) {
    ObservableSet o;
    o.photon_pdf = pdf;
    o.populations = pops;
    double m1 = 0.0, m2 = 0.0;
    for (int n = 0; n < space.fock_dim; ++n) {
        m1 += n * pdf[n];
        m2 += double(n) * n * pdf[n];
    }
    o.mean_photon = m1;
    o.q = (m1 > 1e-12) ? (m2 - m1 * m1) / m1 - 1.0 : 0.0;
    if (space.atom_dim >= 2) {
        o.inversion = pops[0] - pops[1];
        o.entropy_bits = entropy_bits_of(atom_rho);
    }
    return o;
}

} // namespace detail

inline ObservableSet extract(const DensityMatrix& rho) {
    const TruncatedSpace& s = rho.space;
    std::vector<double> pdf(s.fock_dim, 0.0), pops(s.atom_dim, 0.0);
    for (int lvl = 0; lvl < s.atom_dim; ++lvl)
        for (int n = 0; n < s.fock_dim; ++n) {
            const double p = rho.matrix(s.index(lvl, n), s.index(lvl, n)).real();
            pdf[n] += p;
            pops[lvl] += p;
        }
    Matrix atom;
    if (s.atom_dim >= 2) atom = partial_trace(rho, Subsystem::Atom).matrix;
    return detail::extract_impl(s, pdf, pops, atom);
}

inline ObservableSet extract(const StateVector& psi) {
    const TruncatedSpace& s = psi.space;
    std::vector<double> pdf(s.fock_dim, 0.0), pops(s.atom_dim, 0.0);
    for (int lvl = 0; lvl < s.atom_dim; ++lvl)
        for (int n = 0; n < s.fock_dim; ++n) {
            const double p = std::norm(psi.amplitudes(s.index(lvl, n)));
            pdf[n] += p;
            pops[lvl] += p;
        }
    Matrix atom;
    if (s.atom_dim >= 2) {
        atom = Matrix::Zero(s.atom_dim, s.atom_dim);
        for (int i = 0; i < s.atom_dim; ++i)
            for (int j = 0; j < s.atom_dim; ++j)
                for (int n = 0; n < s.fock_dim; ++n)
                    atom(i, j) += psi.amplitudes(s.index(i, n)) *
                                  std::conj(psi.amplitudes(s.index(j, n)));
    }
    return detail::extract_impl(s, pdf, pops, atom);
}

struct EntropyPair {
    double s_atom;
    double s_field;
    double gap;
};

/// For a pure bipartite state the two reduced entropies must coincide.
inline EntropyPair entropy_pair_check(const StateVector& psi) {
    if (psi.space.atom_dim < 2) throw DimensionMismatch("entropy_pair_check needs an atom");
    const DensityMatrix rho = DensityMatrix::from_pure(psi);
    if (rho.purity() < 1.0 - 1e-8) throw NotPure("state is not pure");
    const double sa = detail::entropy_bits_of(partial_trace(rho, Subsystem::Atom).matrix);
    const double sf = detail::entropy_bits_of(partial_trace(rho, Subsystem::Field).matrix);
    return {sa, sf, std::abs(sa - sf)};
}

} // namespace oal

#endif
