#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oal/analytic.hpp"
#include "oal/observables.hpp"

using namespace oal;
using Catch::Approx;

TEST_CASE("extract on simple states") {
    TruncatedSpace space(16, 2);
    SECTION("ground product state") {
        auto o = extract(fock_state(space, 0, 0));
        CHECK(o.mean_photon == 0.0);
        CHECK(o.populations[0] == Approx(1.0));
        CHECK(o.populations[1] == Approx(0.0).margin(1e-15));
        CHECK(o.entropy_bits == Approx(0.0).margin(1e-12));
        CHECK(o.inversion == Approx(1.0));
        CHECK(o.q == 0.0);
    }
    SECTION("number state has Q = -1") {
        auto o = extract(fock_state(space, 1, 3));
        CHECK(o.mean_photon == Approx(3.0));
        CHECK(o.q == Approx(-1.0).margin(1e-12));
        CHECK(o.inversion == Approx(-1.0));
    }
    SECTION("pdf and populations normalize") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Vector v(space.dim());
        for (int i = 0; i < space.dim(); ++i) v(i) = Complex(u(rng), u(rng));
        v /= v.norm();
        auto o = extract(StateVector{space, v});
        double psum = 0.0, nsum = 0.0;
        for (double p : o.photon_pdf) psum += p;
        for (double p : o.populations) nsum += p;
        CHECK(psum == Approx(1.0).epsilon(1e-10));
        CHECK(nsum == Approx(1.0).epsilon(1e-10));
    }
    SECTION("pure-state and density-matrix paths agree") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Vector v(space.dim());
        for (int i = 0; i < space.dim(); ++i) v(i) = Complex(u(rng), u(rng));
        v /= v.norm();
        StateVector psi{space, v};
        auto a = extract(psi);
        auto b = extract(DensityMatrix::from_pure(psi));
        CHECK(a.mean_photon == Approx(b.mean_photon).margin(1e-12));
        CHECK(a.q == Approx(b.q).margin(1e-10));
        CHECK(a.entropy_bits == Approx(b.entropy_bits).margin(1e-10));
        CHECK(a.inversion == Approx(b.inversion).margin(1e-12));
    }
}

TEST_CASE("extract reproduces the closed-form solution at random times") {
    AnalyticSolution s{1.0, 1.0};
    TruncatedSpace space(28, 2);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ut(0.01, 6.0);
    for (int k = 0; k < 50; ++k) {
        const double t = ut(rng);
        auto o = extract(joint_state(s, t, space).rho_af);
        CHECK(o.mean_photon == Approx(mean_photon(s, t)).margin(1e-8));
        CHECK(o.populations[0] ==
              Approx(branch_probability(s, t, Branch::Lower)).margin(1e-8));
        CHECK(o.populations[1] ==
              Approx(branch_probability(s, t, Branch::Upper)).margin(1e-8));
        CHECK(o.inversion == Approx(f_t(s, t)).margin(1e-8));
        CHECK(o.entropy_bits == Approx(entanglement_entropy(s, t)).margin(1e-8));
        CHECK(std::abs(o.q) < 1e-8); // unconditional statistics stay Poissonian
    }
}

TEST_CASE("entropy is basis independent") {
    // The atom block of the joint state in the bare basis versus the +/- basis
    // must give identical spectra, hence identical entropies.
    AnalyticSolution s{1.0, 1.0};
    const double t = 1.2;
    TruncatedSpace space(24, 2);
    auto rho = partial_trace(joint_state(s, t, space).rho_af, Subsystem::Atom);
    Eigen::Matrix2cd bare = rho.matrix;
    Eigen::Matrix2cd had;
    had << 1, 1, 1, -1;
    had /= std::sqrt(2.0);
    Eigen::Matrix2cd pm = had * bare * had;
    CHECK(detail::entropy_bits_of(Matrix(bare)) ==
          Approx(detail::entropy_bits_of(Matrix(pm))).margin(1e-10));
    CHECK(detail::entropy_bits_of(Matrix(pm)) ==
          Approx(entanglement_entropy(s, t)).margin(1e-10));
}

TEST_CASE("cat state photon statistics") {
    TruncatedSpace field(24, 1);
    AnalyticSolution u{1.0, 0.0};
    const double t = 2.0; // |alpha| = 1
    auto even = extract(DensityMatrix::from_pure(conditional_cat_state(u, t, Branch::Lower, field)));
    auto odd = extract(DensityMatrix::from_pure(conditional_cat_state(u, t, Branch::Upper, field)));
    CHECK(even.q > 0.0);
    CHECK(odd.q < 0.0);
    // even cat: only even photon numbers populated
    for (int n = 1; n < 24; n += 2) CHECK(even.photon_pdf[n] == Approx(0.0).margin(1e-14));
    for (int n = 0; n < 24; n += 2) CHECK(odd.photon_pdf[n] == Approx(0.0).margin(1e-14));
}

TEST_CASE("entropy pair check on pure states") {
    TruncatedSpace space(20, 2);
    SECTION("product state has zero entropy on both sides") {
        auto r = entropy_pair_check(fock_state(space, 0, 2));
        CHECK(r.s_atom == Approx(0.0).margin(1e-10));
        CHECK(r.s_field == Approx(0.0).margin(1e-10));
        CHECK(r.gap < 1e-12);
    }
    SECTION("maximally entangled two-by-two support gives one bit") {
        Vector v = Vector::Zero(space.dim());
        v(space.index(0, 0)) = 1.0 / std::sqrt(2.0);
        v(space.index(1, 1)) = 1.0 / std::sqrt(2.0);
        auto r = entropy_pair_check(StateVector{space, v});
        CHECK(r.s_atom == Approx(1.0).margin(1e-10));
        CHECK(r.s_field == Approx(1.0).margin(1e-10));
        CHECK(r.gap < 1e-8);
    }
    SECTION("atom-field cat superposition at |alpha|^2 = 1") {
        // (|1>|a> + |2>|-a>)/sqrt(2) style state assembled by hand in the
        // +/- basis: entropies of the two reductions agree.
        AnalyticSolution u{1.0, 0.0};
        const double t = 2.0;
        TruncatedSpace field(20, 1);
        Vector plus = coherent_state(field, alpha_t(u, t)).amplitudes;
        Vector minus = coherent_state(field, -alpha_t(u, t)).amplitudes;
        Vector v(space.dim());
        for (int n = 0; n < 20; ++n) {
            // bare basis: |1> carries (plus+minus)/2, |2> carries (plus-minus)/2
            v(space.index(0, n)) = 0.5 * (plus(n) + minus(n));
            v(space.index(1, n)) = 0.5 * (plus(n) - minus(n));
        }
        StateVector psi{space, v};
        psi.normalize();
        auto r = entropy_pair_check(psi);
        CHECK(r.gap < 1e-8);
        CHECK(r.s_atom == Approx(entanglement_entropy(u, t)).margin(1e-8));
    }
    SECTION("entropy at |alpha|^2 = 2 matches the frozen binary-entropy value") {
        AnalyticSolution u{1.0, 0.0};
        const double t = 2.0 * std::sqrt(2.0);
        TruncatedSpace space2(28, 2);
        auto o = extract(joint_state(u, t, space2).rho_af);
        CHECK(o.entropy_bits == Approx(0.9997580013338501).margin(1e-8));
    }
    SECTION("mixed states are rejected") {
        TruncatedSpace small(4, 2);
        Vector v = Vector::Zero(small.dim());
        // feed a pure StateVector but through a deliberately mixed rho path:
        // here just check the guard on a non-normalized superposition trace
        v(small.index(0, 0)) = 1.0;
        StateVector psi{small, v};
        CHECK_NOTHROW(entropy_pair_check(psi));
        psi.amplitudes *= 0.5; // purity of rho drops to 1/16
        CHECK_THROWS_AS(entropy_pair_check(psi), NotPure);
    }
}
