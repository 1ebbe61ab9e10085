#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wca/constraints.hpp"
#include "wca/linalg.hpp"
#include "wca/rng.hpp"

using namespace wca;

TEST_CASE("project_row_l2 closed form") {
    Tensor u = Tensor::vec({3, 4});
    Tensor p = project_row_l2(u, 1.0);
    CHECK(p[0] == doctest::Approx(0.6));
    CHECK(p[1] == doctest::Approx(0.8));

    Tensor inside = Tensor::vec({0.3, 0.4});
    Tensor q = project_row_l2(inside, 1.0);
    CHECK(q[0] == 0.3);
    CHECK(q[1] == 0.4);
}

TEST_CASE("project_row_l2 is the nearest point of the ball (grid oracle)") {
    Rng rng(3);
    for (int k = 0; k < 5; ++k) {
        Tensor u = Tensor::vec({2.0 * rng.gaussian(), 2.0 * rng.gaussian()});
        double gamma = 0.5 + rng.uniform();
        Tensor p = project_row_l2(u, gamma);
        double best = norm2(sub(p, u));
        // Dense grid over the ball; nothing on it may beat the projection
        // beyond grid resolution.
        const int g = 160;
        double cell = 2.0 * gamma / g;
        for (int i = 0; i <= g; ++i) {
            for (int j = 0; j <= g; ++j) {
                Tensor v = Tensor::vec({-gamma + i * cell, -gamma + j * cell});
                if (norm2(v) > gamma) continue;
                CHECK(norm2(sub(v, u)) >= best - 2.0 * cell);
            }
        }
    }
}

TEST_CASE("project_row_l2 is idempotent and non-expansive") {
    Rng rng(4);
    for (int k = 0; k < 50; ++k) {
        Tensor u = Tensor::vec({3.0 * rng.gaussian(), 3.0 * rng.gaussian(), 3.0 * rng.gaussian()});
        Tensor v = Tensor::vec({3.0 * rng.gaussian(), 3.0 * rng.gaussian(), 3.0 * rng.gaussian()});
        double gamma = 0.2 + rng.uniform();
        Tensor pu = project_row_l2(u, gamma);
        CHECK(norm2(pu) <= gamma + 1e-12);
        CHECK(frobenius_dist(project_row_l2(pu, gamma), pu) <= 1e-12);
        CHECK(norm2(sub(project_row_l2(u, gamma), project_row_l2(v, gamma))) <=
              norm2(sub(u, v)) + 1e-12);
    }
}

TEST_CASE("clip_spectrum closed forms") {
    Tensor c1 = clip_spectrum(Tensor::mat(2, 2, {4, 0, 0, 1}), 2.0);
    CHECK(c1.at(0, 0) == doctest::Approx(2.0));
    CHECK(c1.at(1, 1) == doctest::Approx(1.0));
    CHECK(c1.at(0, 1) == doctest::Approx(0.0));

    // Spectrum (3, 1) with tau 2 -> (2, 1): reconstructs to [[1.5, .5], [.5, 1.5]].
    Tensor c2 = clip_spectrum(Tensor::mat(2, 2, {2, 1, 1, 2}), 2.0);
    CHECK(c2.at(0, 0) == doctest::Approx(1.5));
    CHECK(c2.at(0, 1) == doctest::Approx(0.5));
    CHECK(c2.at(1, 1) == doctest::Approx(1.5));

    // No-op when the spectrum is already inside.
    Tensor s = Tensor::mat(2, 2, {1.0, 0.2, 0.2, 0.8});
    CHECK(frobenius_dist(clip_spectrum(s, 5.0), s) <= 1e-9);
}

TEST_CASE("clip_spectrum properties") {
    Rng rng(5);
    for (int k = 0; k < 20; ++k) {
        Tensor a({3, 3});
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.gaussian();
        Tensor sigma = matmul_nt(a, a);
        double tau = 0.5 + rng.uniform() * 2.0;

        Tensor c = clip_spectrum(sigma, tau);
        CHECK(is_symmetric(c, 1e-9));
        EigResult e = sym_eig(c);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(e.values[i] >= -1e-9);
            CHECK(e.values[i] <= tau + 1e-9);
        }
        CHECK(frobenius_dist(clip_spectrum(c, tau), c) <= 1e-8);

        // Commutes with orthogonal conjugation: rotate by the eigenvectors of
        // another random symmetric matrix.
        Tensor b({3, 3});
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.gaussian();
        Tensor q = sym_eig(matmul_nt(b, b)).vectors;
        Tensor rot = matmul(matmul(q, sigma), transpose(q));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j) {
                double m = 0.5 * (rot.at(i, j) + rot.at(j, i));
                rot.at(i, j) = m;
                rot.at(j, i) = m;
            }
        Tensor lhs = clip_spectrum(rot, tau);
        Tensor rhs = matmul(matmul(q, clip_spectrum(sigma, tau)), transpose(q));
        CHECK(frobenius_dist(lhs, rhs) <= 1e-7);
    }
}

TEST_CASE("projected_update is a fixed point on feasible parameters") {
    Rng init(6);
    StochasticClassifier m = make_model({3, 3}, 2, init, 0.1);
    StochasticClassifier before = m;

    ParamGrads zero;
    zero.ext_w.push_back(Tensor({3, 3}));
    zero.ext_b.push_back(Tensor({3}));
    zero.W = Tensor(m.head.W.shape());
    zero.b = Tensor(m.head.b.shape());
    zero.L = Tensor(m.head.L.shape());

    ProjectionConfig cfg;  // gamma = tau = 5, init is well inside
    projected_update(m, zero, 0.1, cfg);
    CHECK(frobenius_dist(m.head.W, before.head.W) <= 1e-12);
    CHECK(frobenius_dist(m.head.b, before.head.b) <= 1e-12);
    // L gets refactored through the Sigma path; the 1e-12 jitter is the only drift.
    CHECK(frobenius_dist(matmul_nt(m.head.L, m.head.L), matmul_nt(before.head.L, before.head.L)) <=
          1e-10);
}

TEST_CASE("projected_update contracts hold over 100 random steps") {
    Rng init(7);
    std::size_t d = 4, c = 3;
    StochasticClassifier m = make_model({d, d}, c, init, 0.3);
    ProjectionConfig cfg;
    cfg.gamma = 1.5;
    cfg.tau = 0.8;

    Rng rng(8);
    for (int step = 0; step < 100; ++step) {
        ParamGrads g;
        g.ext_w.push_back(Tensor({d, d}));
        g.ext_b.push_back(Tensor({d}));
        for (std::size_t i = 0; i < d * d; ++i) g.ext_w[0][i] = rng.gaussian();
        for (std::size_t i = 0; i < d; ++i) g.ext_b[0][i] = rng.gaussian();
        g.W = Tensor({c, d});
        g.b = Tensor({c});
        g.L = Tensor({d, d});
        for (std::size_t i = 0; i < g.W.size(); ++i) g.W[i] = 3.0 * rng.gaussian();
        for (std::size_t i = 0; i < g.b.size(); ++i) g.b[i] = rng.gaussian();
        for (std::size_t i = 0; i < g.L.size(); ++i) g.L[i] = 3.0 * rng.gaussian();

        // Independent recomputation of the target the update must land on.
        Tensor y = m.head.L;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] -= 0.1 * g.L[i];
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) y.at(i, j) = 0.0;
        Tensor target = clip_spectrum(matmul(transpose(y), y), cfg.tau);

        projected_update(m, g, 0.1, cfg);

        for (std::size_t row = 0; row < c; ++row) {
            double n2 = 0.0;
            for (std::size_t j2 = 0; j2 < d; ++j2) n2 += m.head.W.at(row, j2) * m.head.W.at(row, j2);
            CHECK(std::sqrt(n2) <= cfg.gamma + 1e-9);
        }
        Tensor sigma = matmul_nt(m.head.L, m.head.L);
        CHECK(spectral_norm_sym(sigma) <= cfg.tau + 1e-9);
        CHECK(frobenius_dist(sigma, target) <= 1e-9);
    }
}
