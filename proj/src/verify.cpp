#include "fdnet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "fdnet/analysis.hpp"
#include "fdnet/datagen.hpp"
#include "fdnet/errors.hpp"
#include "fdnet/numeric.hpp"
#include "fdnet/rng.hpp"
#include "fdnet/spectral.hpp"

namespace fdnet {

namespace {

double loss_of(double yhat, double y) {
    const double r = yhat - y;
    return 0.5 * r * r;
}

// Relative where the gradients are meaningful; tiny ones are compared on an
// absolute scale so finite-difference roundoff cannot dominate.
double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-4});
}

}  // namespace

FdReport fd_check_diag(const DiagNetParams& params, double theta, double y, double h,
                       double kink_tol) {
    FdReport rep;
    const FourierVector x = embed_sym(theta, params.cfg);
    const DiagGrad g = grad_diag_sample(params, x, y);
    DiagNetParams p = params;
    const std::size_t dim = p.w.size();
    for (std::size_t j = 0; j < dim; ++j) {
        if (params.activation == Activation::relu &&
            std::fabs(params.w[j] * x.values[j]) <= kink_tol) {
            ++rep.skipped;
            continue;
        }
        const double keep = p.w[j];
        p.w[j] = keep + h;
        const double up = loss_of(forward_diag(p, x), y);
        p.w[j] = keep - h;
        const double dn = loss_of(forward_diag(p, x), y);
        p.w[j] = keep;
        rep.max_rel_err = std::max(rep.max_rel_err, rel_err((up - dn) / (2 * h), g.w[j]));
        ++rep.checked;
    }
    for (std::size_t j = 0; j < dim; ++j) {
        const double keep = p.c[j];
        p.c[j] = keep + h;
        const double up = loss_of(forward_diag(p, x), y);
        p.c[j] = keep - h;
        const double dn = loss_of(forward_diag(p, x), y);
        p.c[j] = keep;
        rep.max_rel_err = std::max(rep.max_rel_err, rel_err((up - dn) / (2 * h), g.c[j]));
        ++rep.checked;
    }
    return rep;
}

FdReport fd_check_deep(const DeepNetParams& params, double theta, double y, double h) {
    FdReport rep;
    const std::vector<double> x = params.embedding == EmbeddingChoice::symmetrized
                                      ? embed_sym(theta, params.cfg).values
                                      : embed_doubled(theta, params.cfg);
    const DeepGrad g = grad_deep_sample(params, theta, y);
    DeepNetParams p = params;
    DeepWorkspace ws;

    auto probe = [&](double* slot, double analytic) {
        const double keep = *slot;
        *slot = keep + h;
        const std::vector<char> mask_up = deep_activity_mask(p, x.data(), ws);
        const double up = loss_of(forward_deep_raw(p, x.data(), ws), y);
        *slot = keep - h;
        const std::vector<char> mask_dn = deep_activity_mask(p, x.data(), ws);
        const double dn = loss_of(forward_deep_raw(p, x.data(), ws), y);
        *slot = keep;
        if (mask_up != mask_dn) {  // perturbation crossed a ReLU kink
            ++rep.skipped;
            return;
        }
        rep.max_rel_err = std::max(rep.max_rel_err, rel_err((up - dn) / (2 * h), analytic));
        ++rep.checked;
    };

    for (std::size_t i = 0; i < p.diagonal.size(); ++i) probe(&p.diagonal[i], g.diagonal[i]);
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        for (std::size_t i = 0; i < p.layers[k].weight.size(); ++i) {
            probe(&p.layers[k].weight[i], g.layers[k].weight[i]);
        }
        for (std::size_t i = 0; i < p.layers[k].bias.size(); ++i) {
            probe(&p.layers[k].bias[i], g.layers[k].bias[i]);
        }
    }
    return rep;
}

namespace {

SuiteResult embedding_suite() {
    SuiteResult out{"embedding", {}};
    Rng rng(20240901);

    {  // antisymmetry and constant slot, bit-exact, random (theta, m) pairs
        bool ok = true;
        for (int trial = 0; trial < 10000 && ok; ++trial) {
            const int m = 1 + static_cast<int>(rng.index(64));
            const double theta = rng.uniform(-1.0, 1.0);
            const FourierVector v = embed_sym(theta, EmbeddingConfig{m});
            if (v.at(0) != 1.0) ok = false;
            for (int j = 1; j <= 2 * m && ok; ++j) {
                if (v.at(-j) != -v.at(j)) ok = false;
            }
        }
        out.checks.push_back({"antisymmetry_bit_exact", ok, ok ? 0.0 : 1.0, 0.0,
                              "10^4 random (theta, m) pairs"});
    }

    {  // quadrature orthonormality under the mass-2 product
        const EmbeddingConfig cfg{8};
        const std::vector<double> grid = gen_grid(2e-4);
        const std::vector<double> X = embed_grid_sym(grid, cfg);
        const std::size_t dim = static_cast<std::size_t>(cfg.dim_sym());
        const double delta = 2e-4;
        double worst = 0.0;
        std::vector<double> prod(grid.size());
        for (int j = 1; j <= 2 * cfg.m; ++j) {
            for (int k = j; k <= 2 * cfg.m; ++k) {
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    const double* row = X.data() + i * dim;
                    prod[i] = row[j + 2 * cfg.m] * row[k + 2 * cfg.m];
                }
                const double v = trapezoid(prod, delta);
                const double want = j == k ? 1.0 : 0.0;
                worst = std::max(worst, std::fabs(v - want));
            }
        }
        out.checks.push_back({"mode_orthonormality", worst <= 1e-6, worst, 1e-6,
                              "trapezoid, delta=2e-4, m=8"});
    }

    {  // descriptor round trip
        bool ok = true;
        const EmbeddingConfig cfg{64};
        for (int j = -2 * cfg.m; j <= 2 * cfg.m && ok; ++j) {
            if (index_of(mode_of(j, cfg)) != j) ok = false;
        }
        out.checks.push_back({"mode_round_trip", ok, ok ? 0.0 : 1.0, 0.0, "all |j| <= 2m, m=64"});
    }
    return out;
}

SuiteResult spectral_suite() {
    SuiteResult out{"spectral", {}};
    const std::vector<double> grid = gen_grid(2e-4);
    const double delta = 2e-4;

    {  // closed-form ReLU coefficients against quadrature projections
        std::vector<double> f(grid.size());
        double worst = 0.0;
        for (int i = 0; i <= 20; ++i) {
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const double c = std::cos(kPi * grid[k]);
                f[k] = (c > 0.0 ? c : 0.0) * std::cos(kPi * i * grid[k]);
            }
            const double quad = trapezoid(f, delta);
            const double want = i == 0 ? 2.0 * relu_cheb_coeff(0) : relu_cheb_coeff(i);
            worst = std::max(worst, std::fabs(quad - want));
        }
        out.checks.push_back({"relu_cheb_quadrature", worst <= 1e-6, worst, 1e-6, "i <= 20"});
        bool zeros = true;
        for (int i = 3; i <= 41; i += 2) {
            if (relu_cheb_coeff(i) != 0.0) zeros = false;
        }
        out.checks.push_back({"relu_cheb_odd_zero", zeros, zeros ? 0.0 : 1.0, 0.0,
                              "exact zero for odd i >= 3"});
    }

    {  // linearity of the coefficient map
        TargetSpec a = builtin_target("ex1");
        TargetSpec b = builtin_target("ex3");
        const std::vector<double> fa = eval_target_grid(a, grid);
        const std::vector<double> fb = eval_target_grid(b, grid);
        std::vector<double> fc(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) fc[i] = 1.25 * fa[i] - 0.75 * fb[i];
        const SpectrumReport ra = fourier_coeffs(fa, grid, 64);
        const SpectrumReport rb = fourier_coeffs(fb, grid, 64);
        const SpectrumReport rc = fourier_coeffs(fc, grid, 64);
        double worst = 0.0;
        for (std::size_t l = 0; l < rc.alpha_tilde.size(); ++l) {
            worst = std::max(worst, std::fabs(rc.alpha_tilde[l] - (1.25 * ra.alpha_tilde[l] -
                                                                   0.75 * rb.alpha_tilde[l])));
        }
        out.checks.push_back({"fourier_coeffs_linear", worst <= 1e-10, worst, 1e-10, ""});
    }

    {  // Parseval sanity on a band-limited target
        const TargetSpec t = builtin_target("ex1");
        const std::vector<double> f = eval_target_grid(t, grid);
        const SpectrumReport rep = fourier_coeffs(f, grid, 64);
        double sum = 0.0;
        for (double a : rep.alpha_tilde) sum += a * a;
        std::vector<double> f2(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) f2[i] = f[i] * f[i];
        const double energy = trapezoid(f2, delta);
        const bool ok = sum <= energy + 1e-6;
        out.checks.push_back({"parseval", ok, sum - energy, 1e-6, ""});
    }
    return out;
}

SuiteResult gradients_suite() {
    SuiteResult out{"gradients", {}};
    Rng rng(7041961);
    double worst_diag = 0.0, worst_deep = 0.0;
    long checked = 0, skipped = 0;

    for (int trial = 0; trial < 60; ++trial) {
        const int m = 1 + static_cast<int>(rng.index(4));
        EmbeddingConfig cfg{m};
        DiagNetParams p = make_diag_net(cfg, trial % 2 == 0 ? Activation::relu
                                                            : Activation::identity,
                                        0.5, rng.next_u64());
        for (double& v : p.w) v = rng.uniform(-1.0, 1.0);
        for (double& v : p.c) v = rng.uniform(-1.0, 1.0);
        const FdReport r =
            fd_check_diag(p, rng.uniform(-1.0, 1.0), rng.uniform(-2.0, 2.0));
        worst_diag = std::max(worst_diag, r.max_rel_err);
        checked += r.checked;
        skipped += r.skipped;
    }
    for (int trial = 0; trial < 40; ++trial) {
        const int m = 1 + static_cast<int>(rng.index(3));
        EmbeddingConfig cfg{m};
        const bool diag = trial % 2 == 0;
        std::vector<int> hidden;
        if (trial % 3 != 0) hidden.push_back(3 + static_cast<int>(rng.index(4)));
        if (trial % 4 == 0) hidden.push_back(3);
        DeepNetParams p = make_deep_net(cfg, EmbeddingChoice::doubled, diag, hidden,
                                        rng.next_u64());
        const FdReport r =
            fd_check_deep(p, rng.uniform(-1.0, 1.0), rng.uniform(-2.0, 2.0));
        worst_deep = std::max(worst_deep, r.max_rel_err);
        checked += r.checked;
        skipped += r.skipped;
    }

    std::ostringstream detail;
    detail << checked << " coordinates checked, " << skipped << " kink-skipped";
    out.checks.push_back({"fd_diag", worst_diag <= 1e-5, worst_diag, 1e-5, detail.str()});
    out.checks.push_back({"fd_deep", worst_deep <= 1e-5, worst_deep, 1e-5, detail.str()});
    return out;
}

SuiteResult lemma_suite() {
    SuiteResult out{"lemma", {}};
    const int m = 64;
    const std::vector<double> grid = gen_grid(2e-4);
    const TargetSpec t = builtin_target("ex1");
    const SpectrumReport rep = fourier_coeffs(eval_target_grid(t, grid), grid, m);
    const SignedAlpha alpha = signed_alpha(rep);
    double worst = 0.0;
    for (const LemmaCheck& c : lemma_scan(alpha, grid, EmbeddingConfig{m})) {
        worst = std::max(worst, std::fabs(c.value - c.expected));
    }
    out.checks.push_back({"lemma_identity", worst <= 5e-5, worst, 5e-5,
                          "all |j| <= 2m, both signs, m=64"});
    return out;
}

// Small feature-learning run used by both the feature and hessian suites.
struct MiniRun {
    DiagNetParams trained;
    std::vector<double> c0;
    SignedAlpha alpha;
    EmbeddedDataset ds;
    Phase1Config cfg;
};

MiniRun mini_feature_run() {
    MiniRun run;
    const int m = 16;
    EmbeddingConfig cfg{m};
    TargetSpec spec;
    spec.name = "mini";
    spec.noise_sigma = 0.1;
    spec.terms = {{TrigKind::cosine, 3, 0.0, LinkKind::scale, 0.5, {}},
                  {TrigKind::cosine, 5, 0.0, LinkKind::scale, 0.8, {}},
                  {TrigKind::sine, 7, 0.0, LinkKind::scale, 0.3, {}}};
    const std::vector<double> grid = gen_grid(1e-3);
    Dataset data = make_dataset(spec, grid, 11);
    run.ds = embed_dataset(data, cfg, EmbeddingChoice::symmetrized);

    const SpectrumReport rep = fourier_coeffs(data.y_clean, grid, m);
    run.alpha = signed_alpha(rep, true);

    DiagNetParams start = make_diag_net(cfg, Activation::relu, 0.5, 101);
    run.c0 = start.c;

    run.cfg.eta = 0.01;
    run.cfg.lambda = 0.1;
    run.cfg.iters = 1200;
    run.cfg.batch = 128;
    run.cfg.eval_every = 0;
    run.cfg.q1 = 0.5 * linf_norm(run.alpha.values) / (0.1 * std::sqrt(static_cast<double>(m)));
    Phase1Result res = train_phase1(run.ds, start, run.cfg, 17);
    run.trained = std::move(res.params);
    return run;
}

SuiteResult feature_suite() {
    SuiteResult out{"feature", {}};
    MiniRun run = mini_feature_run();
    const RecoveryReport rep =
        recovery_report(run.trained.w, run.c0, run.alpha, run.cfg.eta, run.cfg.lambda,
                        run.cfg.iters, 0.0, ExpectationConvention::sampled);

    std::vector<int> found_pos;
    for (int j : rep.support_found) {
        if (j > 0) found_pos.push_back(j);
    }
    const bool support_ok = found_pos == std::vector<int>{5, 9, 14};
    out.checks.push_back({"support_exact", support_ok, static_cast<double>(found_pos.size()), 3.0,
                          "positive support {5, 9, 14}"});

    double min_supp = 0.0;
    for (int j : rep.support_true) {
        const double v = std::fabs(rep.w_star[static_cast<std::size_t>(j + 2 * run.alpha.m)]);
        min_supp = min_supp == 0.0 ? v : std::min(min_supp, v);
    }
    const double limit = 0.5 * min_supp;
    out.checks.push_back({"limit_feature_linf", rep.linf_error <= limit, rep.linf_error, limit,
                          "sampled convention"});
    out.checks.push_back({"sign_pairing", rep.sign_paired, rep.sign_paired ? 1.0 : 0.0, 1.0, ""});
    return out;
}

SuiteResult hessian_suite() {
    SuiteResult out{"hessian", {}};
    MiniRun run = mini_feature_run();
    const HessianCheck h = hessian_sup_check(run.trained, run.ds, run.cfg.q1);
    out.checks.push_back({"gram_bound", h.ok, h.lambda_max, h.bound, "5 m Q1^2"});
    return out;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
    return {"embedding", "spectral", "gradients", "lemma", "feature", "hessian"};
}

SuiteResult verify_suite(const std::string& name) {
    if (name == "embedding") return embedding_suite();
    if (name == "spectral") return spectral_suite();
    if (name == "gradients") return gradients_suite();
    if (name == "lemma") return lemma_suite();
    if (name == "feature") return feature_suite();
    if (name == "hessian") return hessian_suite();
    throw config_error("unknown verification suite '" + name + "'");
}

std::vector<SuiteResult> verify_all() {
    std::vector<SuiteResult> out;
    for (const std::string& n : verify_suite_names()) out.push_back(verify_suite(n));
    return out;
}

std::string suites_json(const std::vector<SuiteResult>& suites) {
    nlohmann::json root = nlohmann::json::array();
    for (const SuiteResult& s : suites) {
        nlohmann::json js;
        js["suite"] = s.suite;
        js["passed"] = s.passed();
        js["checks"] = nlohmann::json::array();
        for (const CheckResult& c : s.checks) {
            js["checks"].push_back({{"name", c.name},
                                    {"passed", c.passed},
                                    {"value", c.value},
                                    {"limit", c.limit},
                                    {"detail", c.detail}});
        }
        root.push_back(js);
    }
    return root.dump(2);
}

}  // namespace fdnet
