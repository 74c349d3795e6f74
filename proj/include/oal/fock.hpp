#ifndef OAL_FOCK_HPP
#define OAL_FOCK_HPP

// Truncated Fock-space linear algebra: ladder operators, coherent states,
// displacement, tensor products with a small atomic subsystem, partial traces
// and Wigner functions. Everything is dense complex over Eigen.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oal/errors.hpp"

namespace oal {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr double kCoherentTailLimit = 1e-10;

/// Fock levels 0..fock_dim-1, optionally tensored with a 2- or 3-level atom.
/// Indexing is atom-major: index = level * fock_dim + n.
struct TruncatedSpace {
    int fock_dim;
    int atom_dim;

    explicit TruncatedSpace(int fock, int atom = 1) : fock_dim(fock), atom_dim(atom) {
        if (fock_dim < 2)
            throw DimensionMismatch("fock_dim must be >= 2, got " + std::to_string(fock));
        if (atom_dim < 1 || atom_dim > 3)
            throw DimensionMismatch("atom_dim must be in {1,2,3}, got " + std::to_string(atom));
    }

    int dim() const { return fock_dim * atom_dim; }
    int index(int level, int n) const { return level * fock_dim + n; }
    bool operator==(const TruncatedSpace& o) const {
        return fock_dim == o.fock_dim && atom_dim == o.atom_dim;
    }
    bool operator!=(const TruncatedSpace& o) const { return !(*this == o); }
};

struct FieldOperator {
    TruncatedSpace space;
    Matrix matrix;

    bool is_hermitian(double tol = 1e-10) const {
        return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() < tol;
    }
    bool is_unitary(double tol = 1e-8) const {
        Matrix d = matrix.adjoint() * matrix;
        d -= Matrix::Identity(d.rows(), d.cols());
        return d.cwiseAbs().maxCoeff() < tol;
    }
};

struct StateVector {
    TruncatedSpace space;
    Vector amplitudes;

    double norm() const { return amplitudes.norm(); }
    void normalize() { amplitudes /= amplitudes.norm(); }
};

struct DensityMatrix {
    TruncatedSpace space;
    Matrix matrix;

    double trace_error() const { return std::abs(matrix.trace() - Complex(1.0)); }
    double hermiticity_error() const {
        return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (matrix + matrix.adjoint()));
        return es.eigenvalues().minCoeff();
    }
    bool is_valid(double herm_tol = 1e-10, double trace_tol = 1e-8,
                  double eig_tol = 1e-8) const {
        return hermiticity_error() < herm_tol && trace_error() < trace_tol &&
               min_eigenvalue() > -eig_tol;
    }
    double purity() const { return (matrix * matrix).trace().real(); }

    static DensityMatrix from_pure(const StateVector& psi) {
        return {psi.space, psi.amplitudes * psi.amplitudes.adjoint()};
    }
};

/// Poisson mass at and above level `from` for a distribution of the given mean.
inline double poisson_tail(double mean, int from) {
    if (mean <= 0.0) return 0.0;
    // Walk the pmf up to `from`, then sum the remainder until it is negligible.
    double logp = -mean; // log pmf at n=0
    double head = 0.0;
    for (int n = 0; n < from; ++n) {
        head += std::exp(logp);
        logp += std::log(mean) - std::log(double(n + 1));
    }
    return std::max(0.0, 1.0 - head);
}

/// Fock dimension that keeps the Poisson tail of any coherent amplitude up to
/// alpha_max below 1e-10: ceil(|a|^2 + 8 sqrt(|a|^2+1)) + 2, at least 16.
inline int suggest_fock_dim(double alpha_max) {
    const double n = alpha_max * alpha_max;
    const int sized = static_cast<int>(std::ceil(n + 8.0 * std::sqrt(n + 1.0))) + 2;
    return std::max(16, sized);
}

namespace detail {

/// kron(I_atom, f) for a field-only matrix, atom-major ordering.
inline Matrix lift_field(const TruncatedSpace& space, const Matrix& f) {
    Matrix m = Matrix::Zero(space.dim(), space.dim());
    for (int lvl = 0; lvl < space.atom_dim; ++lvl)
        m.block(lvl * space.fock_dim, lvl * space.fock_dim, space.fock_dim, space.fock_dim) = f;
    return m;
}

inline Matrix annihilation_field(int fock_dim) {
    Matrix a = Matrix::Zero(fock_dim, fock_dim);
    for (int n = 1; n < fock_dim; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

inline void require_tail(Complex amplitude, int fock_dim) {
    const double tail = poisson_tail(std::norm(amplitude), fock_dim);
    if (tail >= kCoherentTailLimit)
        throw TruncationTooSmall("Poisson tail " + std::to_string(tail) + " for |alpha|=" +
                                 std::to_string(std::abs(amplitude)) + " at fock_dim=" +
                                 std::to_string(fock_dim));
}

} // namespace detail

inline FieldOperator annihilation_op(const TruncatedSpace& space) {
    return {space, detail::lift_field(space, detail::annihilation_field(space.fock_dim))};
}

inline FieldOperator creation_op(const TruncatedSpace& space) {
    return {space, detail::lift_field(space, detail::annihilation_field(space.fock_dim).adjoint())};
}

inline FieldOperator number_op(const TruncatedSpace& space) {
    Matrix n = Matrix::Zero(space.fock_dim, space.fock_dim);
    for (int k = 0; k < space.fock_dim; ++k) n(k, k) = double(k);
    return {space, detail::lift_field(space, n)};
}

/// Photon-number parity (-1)^n, identity on the atom factor.
inline FieldOperator parity_op(const TruncatedSpace& space) {
    Matrix p = Matrix::Zero(space.fock_dim, space.fock_dim);
    for (int k = 0; k < space.fock_dim; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return {space, detail::lift_field(space, p)};
}

/// |to><from| on the atom factor, identity on the field.
inline FieldOperator atom_transfer(const TruncatedSpace& space, int to, int from) {
    if (to < 0 || to >= space.atom_dim || from < 0 || from >= space.atom_dim)
        throw DimensionMismatch("atom level out of range");
    Matrix m = Matrix::Zero(space.dim(), space.dim());
    for (int n = 0; n < space.fock_dim; ++n)
        m(space.index(to, n), space.index(from, n)) = 1.0;
    return {space, m};
}

inline FieldOperator atom_projector(const TruncatedSpace& space, int level) {
    return atom_transfer(space, level, level);
}

inline StateVector fock_state(const TruncatedSpace& space, int level, int n) {
    if (n < 0 || n >= space.fock_dim || level < 0 || level >= space.atom_dim)
        throw DimensionMismatch("fock_state index out of range");
    Vector v = Vector::Zero(space.dim());
    v(space.index(level, n)) = 1.0;
    return {space, v};
}

/// Coherent state on the field factor (atom factor must be trivial or the
/// caller places it via tensor products). Amplitudes are renormalized after
/// truncation so downstream overlap formulas see a unit vector.
inline StateVector coherent_state(const TruncatedSpace& space, Complex alpha) {
    if (space.atom_dim != 1)
        throw DimensionMismatch("coherent_state expects a field-only space");
    detail::require_tail(alpha, space.fock_dim);
    Vector v(space.fock_dim);
    const double n2 = std::norm(alpha);
    // c_n = exp(-|a|^2/2) a^n / sqrt(n!)
    Complex c = std::exp(-0.5 * n2);
    for (int n = 0; n < space.fock_dim; ++n) {
        v(n) = c;
        c *= alpha / std::sqrt(double(n + 1));
    }
    v /= v.norm();
    return {space, v};
}

/// D(beta) = exp(beta a^dag - beta^* a), built by eigendecomposition of the
/// Hermitian generator so the result is unitary on the retained subspace.
inline FieldOperator displacement_op(const TruncatedSpace& space, Complex beta) {
    detail::require_tail(beta, space.fock_dim);
    const Matrix a = detail::annihilation_field(space.fock_dim);
    // i (beta a^dag - beta^* a) is Hermitian.
    Matrix gen = Complex(0, 1) * (beta * a.adjoint() - std::conj(beta) * a);
    gen = 0.5 * (gen + Matrix(gen.adjoint()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(gen);
    Vector phases(space.fock_dim);
    for (int k = 0; k < space.fock_dim; ++k)
        phases(k) = std::exp(Complex(0, -es.eigenvalues()(k)));
    Matrix d = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return {space, detail::lift_field(space, d)};
}

enum class Subsystem { Atom, Field };

inline DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep) {
    const TruncatedSpace& s = rho.space;
    if (s.atom_dim < 2) throw DimensionMismatch("partial_trace needs atom_dim >= 2");
    if (keep == Subsystem::Atom) {
        Matrix a = Matrix::Zero(s.atom_dim, s.atom_dim);
        for (int i = 0; i < s.atom_dim; ++i)
            for (int j = 0; j < s.atom_dim; ++j)
                for (int m = 0; m < s.fock_dim; ++m)
                    a(i, j) += rho.matrix(s.index(i, m), s.index(j, m));
        // The reduced atom lives in a degenerate "field" of its own; represent
        // it as a fock_dim=atom_dim field-only space so the type stays closed.
        return {TruncatedSpace(s.atom_dim, 1), a};
    }
    Matrix f = Matrix::Zero(s.fock_dim, s.fock_dim);
    for (int i = 0; i < s.atom_dim; ++i)
        f += rho.matrix.block(i * s.fock_dim, i * s.fock_dim, s.fock_dim, s.fock_dim);
    return {TruncatedSpace(s.fock_dim, 1), f};
}

struct WignerGrid {
    double xmin = -4.0, xmax = 4.0;
    double ymin = -4.0, ymax = 4.0;
    int nx = 161, ny = 161;

    double x(int i) const { return nx > 1 ? xmin + (xmax - xmin) * i / double(nx - 1) : xmin; }
    double y(int j) const { return ny > 1 ? ymin + (ymax - ymin) * j / double(ny - 1) : ymin; }
    double cell_area() const {
        return (xmax - xmin) / double(nx - 1) * (ymax - ymin) / double(ny - 1);
    }
};

namespace detail {

/// Exact matrix elements <m|D(gamma)|n> for m,n < F, via the closed form with
/// associated Laguerre polynomials. Unlike exponentiating the truncated
/// generator, these stay correct for displacements larger than the truncation.
inline Matrix displacement_elements(int F, Complex gamma) {
    Matrix d(F, F);
    const double x = std::norm(gamma);
    const double pref = std::exp(-0.5 * x);
    // Walk diagonals m - n = k >= 0; the k < 0 half follows from
    // D_{mn}(gamma) = D_{nm}(-gamma)^* = (-1)^{m-n} conj-symmetric form.
    for (int k = 0; k < F; ++k) {
        // c_n = sqrt(n!/(n+k)!) gamma^k exp(-x/2), built iteratively.
        Complex c = pref;
        for (int j = 1; j <= k; ++j) c *= gamma / std::sqrt(double(j));
        double lprev = 0.0, l = 1.0; // L_0^{(k)}(x) = 1
        for (int n = 0; n + k < F; ++n) {
            d(n + k, n) = c * l;
            if (k > 0) d(n, n + k) = std::conj(c * l) * ((k % 2 == 0) ? 1.0 : -1.0);
            // advance Laguerre: L_{n+1} = ((2n+1+k-x) L_n - (n+k) L_{n-1}) / (n+1)
            const double lnext = ((2.0 * n + 1.0 + k - x) * l - (n + k) * lprev) / (n + 1.0);
            lprev = l;
            l = lnext;
            // advance prefactor: c_{n+1} = c_n sqrt((n+1)/(n+1+k))
            c *= std::sqrt(double(n + 1) / double(n + 1 + k));
        }
    }
    return d;
}

} // namespace detail

/// W(beta) = (2/pi) Tr[rho D(beta) P D(-beta)] = (2/pi) Tr[rho D(2 beta) P],
/// on a field-only density matrix. Result indexed (iy, ix): row = y, col = x.
inline Eigen::MatrixXd wigner(const DensityMatrix& rho, const WignerGrid& grid) {
    if (rho.space.atom_dim != 1)
        throw DimensionMismatch("wigner expects a field-only density matrix");
    const int F = rho.space.fock_dim;
    // D(2 beta) uses exact elements, so truncation error comes only from the
    // state's own tail; rho must not press against the boundary.
    const double edge = rho.matrix(F - 1, F - 1).real();
    if (edge > 1e-8)
        throw TruncationTooSmall("state occupies the last Fock level (p=" +
                                 std::to_string(edge) + "); enlarge fock_dim");

    // (P rho)_{nm} = (-1)^n rho_{nm}; W = (2/pi) sum_{mn} (P rho)_{nm} D(2b)_{mn}.
    Matrix prho = rho.matrix;
    for (int n = 1; n < F; n += 2) prho.row(n) *= -1.0;

    Eigen::MatrixXd w(grid.ny, grid.nx);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Complex twob(2.0 * grid.x(i), 2.0 * grid.y(j));
            const Matrix d = detail::displacement_elements(F, twob);
            w(j, i) = (2.0 / M_PI) * prho.cwiseProduct(d.transpose()).sum().real();
        }
    }
    return w;
}

inline Complex expectation(const DensityMatrix& rho, const Matrix& op) {
    return (op * rho.matrix).trace();
}

inline Complex expectation(const StateVector& psi, const Matrix& op) {
    return (psi.amplitudes.adjoint() * op * psi.amplitudes)(0);
}

} // namespace oal

#endif
