#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fdnet/analysis.hpp"
#include "fdnet/datagen.hpp"
#include "fdnet/errors.hpp"
#include "fdnet/model.hpp"
#include "fdnet/numeric.hpp"
#include "fdnet/rng.hpp"
#include "fdnet/train.hpp"
#include "test_util.hpp"

using namespace fdnet;

TEST_CASE("project_box clamps and is non-expansive") {
    CHECK(project_box({0.2, -0.7}, 1.0) == std::vector<double>{0.2, -0.7});
    CHECK(project_box({3.0, -3.0}, 1.0) == std::vector<double>{1.0, -1.0});
    CHECK_THROWS_AS(project_box({1.0}, 0.0), config_error);

    Rng rng(6);
    for (int trial = 0; trial < 1000; ++trial) {
        const double q = rng.uniform(0.1, 3.0);
        std::vector<double> u(8), v(8);
        for (std::size_t i = 0; i < 8; ++i) {
            u[i] = rng.uniform(-5.0, 5.0);
            v[i] = rng.uniform(-5.0, 5.0);
        }
        std::vector<double> du = project_box(u, q);
        std::vector<double> dv = project_box(v, q);
        double before = 0.0, after = 0.0;
        for (std::size_t i = 0; i < 8; ++i) {
            before = std::max(before, std::fabs(u[i] - v[i]));
            after = std::max(after, std::fabs(du[i] - dv[i]));
        }
        REQUIRE(after <= before + 1e-15);
    }
}

TEST_CASE("phase2 step size rule") {
    CHECK(phase2_step_size(1.0, 1.0, 4) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(phase2_step_size(10.0, 1.0, 4) == doctest::Approx(1.0 / 1000.0).epsilon(1e-12));
}

TEST_CASE("theory admissibility of the phase-1 box") {
    const EmbeddingConfig cfg{4};
    SignedAlpha alpha;
    alpha.m = cfg.m;
    alpha.values.assign(static_cast<std::size_t>(cfg.dim_sym()), 0.0);
    alpha.at(5) = 0.8;
    alpha.at(-5) = -0.8;
    const std::vector<double> c0 = init_symmetric_c(cfg, 0.5, 1);
    // ||c0 . alpha / 2||_inf = 0.25 * 0.8 / 2 = 0.1; with lambda = 0.1 the
    // threshold is 1.
    CHECK(q1_satisfies_theory(1.0, c0, alpha, 0.1));
    CHECK_FALSE(q1_satisfies_theory(0.99, c0, alpha, 0.1));
}

TEST_CASE("joint learning rate schedule") {
    JointConfig cfg;
    cfg.alpha0 = 2e-3;
    cfg.gamma = 0.95;
    cfg.m0 = 5e4;
    CHECK(joint_lr(cfg, 0) == 2e-3);
    // at step s with gamma s / m0 = 1 the rate halves
    const long s = static_cast<long>(cfg.m0 / cfg.gamma);
    CHECK(joint_lr(cfg, s) == doctest::Approx(1e-3).epsilon(1e-6));
}

namespace {

// Little fixture: band-limited odd-frequency target at m = 8.
struct Mini {
    EmbeddingConfig cfg{8};
    TargetSpec spec;
    std::vector<double> grid;
    Dataset data;
    EmbeddedDataset ds;

    explicit Mini(double sigma = 0.0, double delta = 2.5e-3, std::uint64_t seed = 9) {
        spec.name = "mini";
        spec.noise_sigma = sigma;
        spec.terms = {{TrigKind::cosine, 3, 0.0, LinkKind::scale, 0.6, {}},
                      {TrigKind::sine, 5, 0.0, LinkKind::scale, 0.4, {}}};
        grid = gen_grid(delta);
        data = make_dataset(spec, grid, seed);
        ds = embed_dataset(data, cfg, EmbeddingChoice::symmetrized);
    }
};

}  // namespace

TEST_CASE("phase1 single hand-computed step") {
    // One sample at theta = 0, one iteration, identity activation, w1 = 0:
    // u1 = eta * (y - 0) * c0 . x, then the box projection.
    const EmbeddingConfig cfg{1};
    Dataset data;
    data.theta = {0.0};
    data.y = {1.0};
    const EmbeddedDataset ds = embed_dataset(data, cfg, EmbeddingChoice::symmetrized);

    DiagNetParams start = make_diag_net(cfg, Activation::identity, 0.5, 77);
    Phase1Config p1;
    p1.eta = 0.25;
    p1.lambda = 0.1;
    p1.q1 = 10.0;
    p1.iters = 1;
    p1.batch = 1;
    p1.eval_every = 0;
    const Phase1Result res = train_phase1(ds, start, p1, 1);

    const FourierVector x = embed_sym(0.0, cfg);
    for (int j = -2; j <= 2; ++j) {
        const double want = p1.eta * 1.0 * start.c[static_cast<std::size_t>(j + 2)] * x.at(j);
        CHECK(res.params.w[static_cast<std::size_t>(j + 2)] ==
              doctest::Approx(want).epsilon(1e-15));
    }
    CHECK(res.trace.rows.size() == 1);
    CHECK(res.trace.rows[0].loss == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("large ridge with zero signal drives w to zero") {
    const EmbeddingConfig cfg{4};
    TargetSpec silence;
    silence.name = "zero";
    silence.terms = {{TrigKind::cosine, 1, 0.0, LinkKind::scale, 0.0, {}}};
    Dataset data = make_dataset(silence, gen_grid(0.01), 2);
    const EmbeddedDataset ds = embed_dataset(data, cfg, EmbeddingChoice::symmetrized);

    DiagNetParams start = make_diag_net(cfg, Activation::relu, 0.5, 3);
    Phase1Config p1;
    p1.eta = 0.1;
    p1.lambda = 0.9;
    p1.q1 = 1.0;
    p1.iters = 300;
    p1.batch = 32;
    p1.eval_every = 0;
    std::fill(start.w.begin(), start.w.end(), 0.0);
    Phase1Config warm = p1;
    warm.w_init.assign(start.w.size(), 0.7);
    const Phase1Result res = train_phase1(ds, start, warm, 5);
    CHECK(linf_norm(res.params.w) <= p1.eta);
}

TEST_CASE("full-batch noiseless phase1 equals the deterministic recursion") {
    Mini mini(0.0, 0.01);
    DiagNetParams start = make_diag_net(mini.cfg, Activation::relu, 0.5, 13);

    Phase1Config p1;
    p1.eta = 0.05;
    p1.lambda = 0.2;
    p1.q1 = 0.02;  // tight box so the projection actually clips
    p1.iters = 40;
    p1.batch = static_cast<long>(mini.ds.size());
    p1.eval_every = 0;
    const Phase1Result res = train_phase1(mini.ds, start, p1, 21);

    // Independent recursion with a directly-computed full-batch gradient.
    std::vector<double> w(start.w.size(), 0.0);
    const std::size_t dim = w.size();
    for (long t = 0; t < p1.iters; ++t) {
        std::vector<double> g(dim, 0.0);
        for (std::size_t i = 0; i < mini.ds.size(); ++i) {
            const double* x = mini.ds.row(i);
            double yhat = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                yhat += start.c[j] * act(Activation::relu, w[j] * x[j]);
            }
            const double r = yhat - mini.data.y[i];
            for (std::size_t j = 0; j < dim; ++j) {
                // same kink rule as the trainer: upper subgradient at w_j == 0
                const double d = w[j] == 0.0 ? 1.0 : act_deriv(Activation::relu, w[j] * x[j]);
                g[j] += r * start.c[j] * d * x[j];
            }
        }
        for (std::size_t j = 0; j < dim; ++j) {
            g[j] = g[j] / static_cast<double>(mini.ds.size()) + p1.lambda * w[j];
            w[j] = std::clamp(w[j] - p1.eta * g[j], -p1.q1, p1.q1);
        }
    }
    for (std::size_t j = 0; j < dim; ++j) {
        CHECK(std::fabs(res.params.w[j] - w[j]) <= 1e-12);
    }
}

TEST_CASE("phase1 respects the box exactly and is deterministic") {
    Mini mini(0.3, 2.5e-3);
    DiagNetParams start = make_diag_net(mini.cfg, Activation::relu, 0.5, 4);
    Phase1Config p1;
    p1.eta = 0.05;
    p1.lambda = 0.1;
    p1.q1 = 0.015;
    p1.iters = 150;
    p1.batch = 64;
    p1.snapshot_every = 1;
    p1.eval_every = 0;
    const Phase1Result a = train_phase1(mini.ds, start, p1, 31);
    const Phase1Result b = train_phase1(mini.ds, start, p1, 31);

    CHECK(a.params.w == b.params.w);
    REQUIRE(a.trace.rows.size() == b.trace.rows.size());
    for (std::size_t i = 0; i < a.trace.rows.size(); ++i) {
        REQUIRE(a.trace.rows[i].loss == b.trace.rows[i].loss);
    }
    for (const ParamSnapshot& s : a.trace.snapshots) {
        REQUIRE(linf_norm(s.w) <= p1.q1);
    }
    CHECK(a.trace.wrapped);  // 150 * 64 > 801 samples

    const Phase1Result c = train_phase1(mini.ds, start, p1, 32);
    CHECK(a.params.w != c.params.w);
}

TEST_CASE("strict fresh-batch mode rejects short datasets") {
    Mini mini(0.0, 0.01);
    DiagNetParams start = make_diag_net(mini.cfg, Activation::relu, 0.5, 4);
    Phase1Config p1;
    p1.iters = 100;
    p1.batch = 64;  // needs 6400 > 201 samples
    p1.strict_fresh = true;
    CHECK_THROWS_AS(train_phase1(mini.ds, start, p1, 1), data_error);
    p1.batch = 500;  // more than the whole dataset
    p1.strict_fresh = false;
    CHECK_THROWS_AS(train_phase1(mini.ds, start, p1, 1), data_error);
}

TEST_CASE("phase2 with zero features keeps c inside the box and loss constant") {
    Mini mini(0.1, 0.01);
    DiagNetParams frozen = make_diag_net(mini.cfg, Activation::relu, 0.5, 8);
    // w = 0: every feature is relu(0) = 0
    Phase2Config p2;
    p2.eta_prime = 0.5;
    p2.schedule = Phase2Schedule::constant;
    p2.iters = 50;
    p2.q2 = 1.0;
    p2.batch = 32;
    p2.eval_every = 0;
    const Phase2Result res = train_phase2(mini.ds, frozen, p2, 3);
    CHECK(res.params.c == frozen.c);
    for (std::size_t i = 1; i < res.trace.rows.size(); ++i) {
        CHECK(res.trace.rows[i].loss >= 0.0);
    }
    CHECK(linf_norm(res.params.c) <= p2.q2);
}

TEST_CASE("phase2 approaches the least-squares optimum on frozen features") {
    // 3-mode target with mild label noise (so the optimum is not an exact
    // interpolation); frozen first layer with clean sign-paired support; the
    // unconstrained least squares solution sits inside the box.
    const EmbeddingConfig cfg{8};
    TargetSpec spec;
    spec.name = "three";
    spec.noise_sigma = 0.2;
    spec.terms = {{TrigKind::cosine, 3, 0.0, LinkKind::scale, 0.6, {}},
                  {TrigKind::cosine, 5, 0.0, LinkKind::scale, 0.8, {}},
                  {TrigKind::sine, 7, 0.0, LinkKind::scale, 0.4, {}}};
    Dataset data = make_dataset(spec, gen_grid(2.5e-3), 5);
    const EmbeddedDataset ds = embed_dataset(data, cfg, EmbeddingChoice::symmetrized);

    DiagNetParams frozen = make_diag_net(cfg, Activation::relu, 0.5, 6);
    // hand-set first layer: the support pairs carry matching signs
    for (int j : {5, 9, 14}) {
        frozen.w[static_cast<std::size_t>(j + 2 * cfg.m)] = 0.1;
        frozen.w[static_cast<std::size_t>(-j + 2 * cfg.m)] = 0.1;
    }

    Phase2Config p2;
    p2.eta_prime = 2.0;
    p2.schedule = Phase2Schedule::constant;
    p2.iters = 6000;
    p2.q2 = 30.0;
    p2.q1 = 1.0;
    p2.batch = 128;
    p2.eval_every = 0;
    const Phase2Result res = train_phase2(ds, frozen, p2, 7);
    const double sgd_loss = empirical_risk(res.params, ds);

    // Oracle: least squares on the six active features by normal equations.
    const std::vector<int> active = {-14, -9, -5, 5, 9, 14};
    const std::size_t k = active.size();
    std::vector<double> G(k * k, 0.0), b(k, 0.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double* x = ds.row(i);
        std::vector<double> f(k);
        for (std::size_t a = 0; a < k; ++a) {
            const std::size_t idx = static_cast<std::size_t>(active[a] + 2 * cfg.m);
            f[a] = act(Activation::relu, frozen.w[idx] * x[idx]);
        }
        for (std::size_t a = 0; a < k; ++a) {
            b[a] += f[a] * data.y[i];
            for (std::size_t c = 0; c < k; ++c) G[a * k + c] += f[a] * f[c];
        }
    }
    // Gaussian elimination with partial pivoting.
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (std::fabs(G[r * k + col]) > std::fabs(G[piv * k + col])) piv = r;
        }
        for (std::size_t c = 0; c < k; ++c) std::swap(G[col * k + c], G[piv * k + c]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const double fct = G[r * k + col] / G[col * k + col];
            for (std::size_t c = 0; c < k; ++c) G[r * k + c] -= fct * G[col * k + c];
            b[r] -= fct * b[col];
        }
    }
    DiagNetParams best = frozen;
    for (std::size_t a = 0; a < k; ++a) {
        const double v = b[a] / G[a * k + a];
        REQUIRE(std::fabs(v) <= p2.q2);  // interior optimum, box inactive
        best.c[static_cast<std::size_t>(active[a] + 2 * cfg.m)] = v;
    }
    const double opt_loss = empirical_risk(best, ds);
    CHECK(sgd_loss <= 1.05 * opt_loss + 1e-12);
}

TEST_CASE("joint trainer echoes the paper preset and stays deterministic") {
    Mini mini(0.2, 0.01);
    const EmbeddedDataset dbl = embed_dataset(mini.data, mini.cfg, EmbeddingChoice::doubled);
    DeepNetParams p = make_deep_net(mini.cfg, EmbeddingChoice::doubled, true, {8}, 91);
    DeepNetParams q = p;

    JointConfig jc;
    jc.alpha0 = 2e-3;
    jc.gamma = 0.95;
    jc.m0 = 5e4;
    jc.batch = 201;
    jc.iters = 60;
    jc.eval_every = 30;
    const TrainingTrace ta = train_joint(p, dbl, jc, 17);
    const TrainingTrace tb = train_joint(q, dbl, jc, 17);
    REQUIRE(ta.rows.size() == 60);
    CHECK(ta.rows[0].lr == 2e-3);
    for (std::size_t i = 0; i < ta.rows.size(); ++i) {
        REQUIRE(ta.rows[i].loss == tb.rows[i].loss);
    }
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        CHECK(p.layers[k].weight == q.layers[k].weight);
    }
}

TEST_CASE("joint trainer aborts on divergence") {
    Mini mini(0.0, 0.01);
    DiagNetParams p = make_diag_net(mini.cfg, Activation::identity, 0.5, 14);
    std::fill(p.w.begin(), p.w.end(), 5.0);
    std::fill(p.c.begin(), p.c.end(), 5.0);
    JointConfig jc;
    jc.alpha0 = 50.0;  // absurd step size
    jc.batch = 16;
    jc.iters = 400;
    jc.eval_every = 0;
    CHECK_THROWS_AS(train_joint(p, mini.ds, jc, 2), numeric_error);
}

TEST_CASE("sign pairing emerges on the support after phase 1") {
    Mini mini(0.1, 1e-3, 77);
    DiagNetParams start = make_diag_net(mini.cfg, Activation::relu, 0.5, 19);
    Phase1Config p1;
    p1.eta = 0.01;
    p1.lambda = 0.1;
    p1.q1 = 2.0;
    p1.iters = 800;
    p1.batch = 128;
    p1.eval_every = 0;
    const Phase1Result res = train_phase1(mini.ds, start, p1, 23);
    for (int j : {5, 10}) {  // cos 3 -> index 5, sin 5 -> index 10
        const double a = res.params.w[static_cast<std::size_t>(j + 2 * mini.cfg.m)];
        const double b = res.params.w[static_cast<std::size_t>(-j + 2 * mini.cfg.m)];
        REQUIRE(a * b > 0.0);
    }
}
