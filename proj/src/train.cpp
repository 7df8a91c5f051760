#include "fdnet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "fdnet/csv.hpp"
#include "fdnet/errors.hpp"
#include "fdnet/numeric.hpp"
#include "fdnet/rng.hpp"

namespace fdnet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rel_l2_against_clean(const std::vector<double>& pred, const std::vector<double>& truth) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        num += d * d;
        den += truth[i] * truth[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : kNaN;
}

// Contiguous disjoint blocks over the sample pool, arrival order first,
// reshuffled on every wrap.
class BatchCursor {
  public:
    BatchCursor(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
    }

    void fill(std::vector<std::size_t>& batch, std::size_t b) {
        batch.resize(b);
        for (std::size_t k = 0; k < b; ++k) {
            if (pos_ == order_.size()) {
                rng_.shuffle(order_);
                pos_ = 0;
                wrapped_ = true;
            }
            batch[k] = order_[pos_++];
        }
    }

    bool wrapped() const { return wrapped_; }

  private:
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
    Rng rng_;
    bool wrapped_ = false;
};

class Stopwatch {
  public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

  private:
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace

EmbeddedDataset embed_dataset(const Dataset& data, const EmbeddingConfig& cfg,
                              EmbeddingChoice choice) {
    cfg.validate();
    if (data.size() == 0) throw data_error("embed_dataset: empty dataset");
    EmbeddedDataset ds;
    ds.data = data;
    ds.cfg = cfg;
    ds.choice = choice;
    ds.dim = choice == EmbeddingChoice::symmetrized ? cfg.dim_sym() : cfg.dim_doubled();
    ds.X = choice == EmbeddingChoice::symmetrized ? embed_grid_sym(data.theta, cfg)
                                                  : embed_grid_doubled(data.theta, cfg);
    return ds;
}

void Phase1Config::validate() const {
    if (!(eta > 0.0)) throw config_error("phase1: eta must be positive");
    if (!(lambda > 0.0 && lambda < 1.0)) throw config_error("phase1: lambda must lie in (0,1)");
    if (!(eta * lambda < 1.0)) throw config_error("phase1: eta*lambda must be < 1");
    if (!(q1 > 0.0)) throw config_error("phase1: Q1 must be positive");
    if (iters < 1 || batch < 1) throw config_error("phase1: iters and batch must be >= 1");
}

void Phase2Config::validate() const {
    if (!(eta_prime > 0.0)) throw config_error("phase2: eta' must be positive");
    if (!(q2 > 0.0) || !(q1 > 0.0)) throw config_error("phase2: box radii must be positive");
    if (iters < 1 || batch < 1) throw config_error("phase2: iters and batch must be >= 1");
}

void JointConfig::validate() const {
    if (!(alpha0 > 0.0) || !(gamma > 0.0) || !(m0 > 0.0)) {
        throw config_error("joint: alpha0, gamma, m0 must be positive");
    }
    if (iters < 1 || batch < 1) throw config_error("joint: iters and batch must be >= 1");
}

std::vector<double> project_box(std::vector<double> v, double q) {
    if (!(q > 0.0)) throw config_error("project_box: radius must be positive");
    for (double& x : v) x = std::clamp(x, -q, q);
    return v;
}

double joint_lr(const JointConfig& cfg, long step) {
    return cfg.alpha0 / (1.0 + cfg.gamma * static_cast<double>(step) / cfg.m0);
}

double phase2_step_size(double q1, double eta_prime, long t_prime) {
    return std::min(1.0 / (10.0 * q1 * q1),
                    eta_prime / std::sqrt(static_cast<double>(t_prime)));
}

bool q1_satisfies_theory(double q1, const std::vector<double>& c0, const SignedAlpha& alpha,
                         double lambda) {
    if (c0.size() != alpha.values.size()) throw shape_error("q1 check: dimension mismatch");
    if (!(lambda > 0.0)) throw config_error("q1 check: lambda must be positive");
    double peak = 0.0;
    for (std::size_t i = 0; i < c0.size(); ++i) {
        peak = std::max(peak, std::fabs(0.5 * c0[i] * alpha.values[i]));
    }
    return q1 >= peak / lambda;
}

Phase1Result train_phase1(const EmbeddedDataset& ds, const DiagNetParams& start,
                          const Phase1Config& cfg, std::uint64_t seed) {
    cfg.validate();
    if (ds.choice != EmbeddingChoice::symmetrized) {
        throw shape_error("phase1: needs the symmetrized embedding");
    }
    const std::size_t n = ds.size();
    const std::size_t dim = static_cast<std::size_t>(ds.dim);
    if (start.w.size() != dim || start.c.size() != dim) {
        throw shape_error("phase1: parameter dimension does not match embedding");
    }
    if (n < static_cast<std::size_t>(cfg.batch)) {
        throw data_error("phase1: dataset smaller than one batch");
    }
    if (cfg.strict_fresh &&
        n < static_cast<std::size_t>(cfg.batch) * static_cast<std::size_t>(cfg.iters)) {
        throw data_error("phase1: fresh batches need at least T*B samples");
    }

    Stopwatch clock;
    Phase1Result res;
    res.params = start;
    res.params.q1 = cfg.q1;
    DiagNetParams& p = res.params;
    if (!cfg.w_init.empty()) {
        if (cfg.w_init.size() != dim) throw shape_error("phase1: w_init dimension mismatch");
        p.w = cfg.w_init;
    } else {
        std::fill(p.w.begin(), p.w.end(), 0.0);
    }

    TrainingTrace& trace = res.trace;
    trace.seed = seed;
    trace.rows.reserve(static_cast<std::size_t>(cfg.iters));

    BatchCursor cursor(n, derive_seed(seed, hash_name("phase1.batches")));
    std::vector<std::size_t> batch;
    std::vector<double> gw(dim);
    const bool relu = p.activation == Activation::relu;

    for (long t = 0; t < cfg.iters; ++t) {
        cursor.fill(batch, static_cast<std::size_t>(cfg.batch));
        std::fill(gw.begin(), gw.end(), 0.0);
        double loss = 0.0;
        for (std::size_t idx : batch) {
            const double* x = ds.row(idx);
            double yhat = 0.0;
            if (relu) {
                for (std::size_t j = 0; j < dim; ++j) {
                    const double z = p.w[j] * x[j];
                    if (z > 0.0) yhat += p.c[j] * z;
                }
            } else {
                for (std::size_t j = 0; j < dim; ++j) yhat += p.c[j] * p.w[j] * x[j];
            }
            const double r = yhat - ds.data.y[idx];
            loss += 0.5 * r * r;
            if (relu) {
                // At w_j == 0 the ReLU kink is sampled with the upper
                // subgradient; otherwise the origin is absorbing and the
                // default zero initialization could never start moving.
                for (std::size_t j = 0; j < dim; ++j) {
                    if (p.w[j] == 0.0 || p.w[j] * x[j] > 0.0) gw[j] += r * p.c[j] * x[j];
                }
            } else {
                for (std::size_t j = 0; j < dim; ++j) gw[j] += r * p.c[j] * x[j];
            }
        }
        const double inv_b = 1.0 / static_cast<double>(cfg.batch);
        loss *= inv_b;
        for (std::size_t j = 0; j < dim; ++j) {
            const double g = gw[j] * inv_b + cfg.lambda * p.w[j];
            p.w[j] = std::clamp(p.w[j] - cfg.eta * g, -cfg.q1, cfg.q1);
        }

        double rel = kNaN;
        const bool eval_now = ds.data.has_clean() &&
            ((cfg.eval_every > 0 && (t + 1) % cfg.eval_every == 0) || t + 1 == cfg.iters);
        if (eval_now) rel = rel_l2_against_clean(predict_all(p, ds), ds.data.y_clean);
        trace.rows.push_back({t + 1, loss, rel, cfg.eta});

        if ((cfg.snapshot_every > 0 && (t + 1) % cfg.snapshot_every == 0) ||
            t + 1 == cfg.iters) {
            trace.snapshots.push_back({t + 1, p.w, p.c});
        }
    }
    trace.wrapped = cursor.wrapped();
    if (trace.wrapped) trace.note = "sample pool reused: T*B exceeds dataset size";
    trace.wall_seconds = clock.seconds();
    return res;
}

Phase2Result train_phase2(const EmbeddedDataset& ds, const DiagNetParams& frozen,
                          const Phase2Config& cfg, std::uint64_t seed) {
    cfg.validate();
    if (ds.choice != EmbeddingChoice::symmetrized) {
        throw shape_error("phase2: needs the symmetrized embedding");
    }
    const std::size_t n = ds.size();
    const std::size_t dim = static_cast<std::size_t>(ds.dim);
    if (frozen.w.size() != dim) throw shape_error("phase2: parameter dimension mismatch");
    if (n < static_cast<std::size_t>(cfg.batch) && n == 0) {
        throw data_error("phase2: empty dataset");
    }

    Stopwatch clock;
    // Features are fixed once w is frozen.
    std::vector<double> F(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = ds.row(i);
        double* f = F.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) {
            f[j] = act(frozen.activation, frozen.w[j] * x[j]);
        }
    }

    Phase2Result res;
    res.params = frozen;
    res.params.q2 = cfg.q2;
    DiagNetParams& p = res.params;

    const double lr = cfg.schedule == Phase2Schedule::last_iterate_rule
                          ? phase2_step_size(cfg.q1, cfg.eta_prime, cfg.iters)
                          : cfg.eta_prime;

    TrainingTrace& trace = res.trace;
    trace.seed = seed;
    trace.rows.reserve(static_cast<std::size_t>(cfg.iters));

    BatchCursor cursor(n, derive_seed(seed, hash_name("phase2.batches")));
    std::vector<std::size_t> batch;
    std::vector<double> gc(dim);

    auto predict_row = [&](std::size_t i) {
        return dot(p.c.data(), F.data() + i * dim, dim);
    };

    for (long t = 0; t < cfg.iters; ++t) {
        cursor.fill(batch, static_cast<std::size_t>(cfg.batch));
        std::fill(gc.begin(), gc.end(), 0.0);
        double loss = 0.0;
        for (std::size_t idx : batch) {
            const double r = predict_row(idx) - ds.data.y[idx];
            loss += 0.5 * r * r;
            const double* f = F.data() + idx * dim;
            for (std::size_t j = 0; j < dim; ++j) gc[j] += r * f[j];
        }
        const double inv_b = 1.0 / static_cast<double>(cfg.batch);
        loss *= inv_b;
        for (std::size_t j = 0; j < dim; ++j) {
            p.c[j] = std::clamp(p.c[j] - lr * gc[j] * inv_b, -cfg.q2, cfg.q2);
        }

        double rel = kNaN;
        const bool eval_now = ds.data.has_clean() &&
            ((cfg.eval_every > 0 && (t + 1) % cfg.eval_every == 0) || t + 1 == cfg.iters);
        if (eval_now) {
            std::vector<double> pred(n);
            for (std::size_t i = 0; i < n; ++i) pred[i] = predict_row(i);
            rel = rel_l2_against_clean(pred, ds.data.y_clean);
        }
        trace.rows.push_back({t + 1, loss, rel, lr});

        if ((cfg.snapshot_every > 0 && (t + 1) % cfg.snapshot_every == 0) ||
            t + 1 == cfg.iters) {
            trace.snapshots.push_back({t + 1, p.w, p.c});
        }
    }
    trace.wrapped = cursor.wrapped();
    trace.wall_seconds = clock.seconds();
    return res;
}

namespace {

// Blocked batch products for the joint trainer. Row chunks keep one operand
// L1-resident so the weight matrices stream once per chunk instead of once
// per sample.
constexpr std::size_t kChunk = 16;

// C[B x O] = A[B x I] . W[O x I]^T  (+ bias broadcast when given)
void gemm_nt(const double* A, const double* W, const double* bias, double* C,
             std::size_t B, std::size_t I, std::size_t O) {
    for (std::size_t b0 = 0; b0 < B; b0 += kChunk) {
        const std::size_t b1 = std::min(B, b0 + kChunk);
        for (std::size_t o = 0; o < O; ++o) {
            const double* w = W + o * I;
            const double base = bias ? bias[o] : 0.0;
            for (std::size_t b = b0; b < b1; ++b) {
                C[b * O + o] = base + dot(A + b * I, w, I);
            }
        }
    }
}

// G[O x I] += D[B x O]^T . A[B x I]
void gemm_tn_acc(const double* D, const double* A, double* G, std::size_t B, std::size_t O,
                 std::size_t I) {
    constexpr std::size_t kRows = 8;
    for (std::size_t o0 = 0; o0 < O; o0 += kRows) {
        const std::size_t o1 = std::min(O, o0 + kRows);
        for (std::size_t b = 0; b < B; ++b) {
            const double* a = A + b * I;
            for (std::size_t o = o0; o < o1; ++o) {
                const double d = D[b * O + o];
                if (d == 0.0) continue;
                double* g = G + o * I;
                for (std::size_t i = 0; i < I; ++i) g[i] += d * a[i];
            }
        }
    }
}

// E[B x I] = D[B x O] . W[O x I]
void gemm_nn(const double* D, const double* W, double* E, std::size_t B, std::size_t O,
             std::size_t I) {
    std::fill(E, E + B * I, 0.0);
    for (std::size_t b0 = 0; b0 < B; b0 += kChunk) {
        const std::size_t b1 = std::min(B, b0 + kChunk);
        for (std::size_t o = 0; o < O; ++o) {
            const double* w = W + o * I;
            for (std::size_t b = b0; b < b1; ++b) {
                const double d = D[b * O + o];
                if (d == 0.0) continue;
                double* e = E + b * I;
                for (std::size_t i = 0; i < I; ++i) e[i] += d * w[i];
            }
        }
    }
}

// Shuffled-epoch minibatch order shared by the joint trainers.
class EpochCursor {
  public:
    EpochCursor(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        rng_.shuffle(order_);
    }

    void fill(std::vector<std::size_t>& batch, std::size_t b) {
        batch.resize(b);
        for (std::size_t k = 0; k < b; ++k) {
            if (pos_ == order_.size()) {
                rng_.shuffle(order_);
                pos_ = 0;
            }
            batch[k] = order_[pos_++];
        }
    }

  private:
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
    Rng rng_;
};

void check_divergence(double loss, double guard, long step) {
    if (!(loss <= guard)) {
        throw numeric_error("joint training diverged at iteration " + std::to_string(step) +
                            " (batch loss " + std::to_string(loss) + ")");
    }
}

}  // namespace

TrainingTrace train_joint(DiagNetParams& params, const EmbeddedDataset& ds,
                          const JointConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (ds.choice != EmbeddingChoice::symmetrized) {
        throw shape_error("joint(diag): needs the symmetrized embedding");
    }
    const std::size_t n = ds.size();
    const std::size_t dim = static_cast<std::size_t>(ds.dim);
    if (params.w.size() != dim) throw shape_error("joint(diag): dimension mismatch");

    Stopwatch clock;
    TrainingTrace trace;
    trace.seed = seed;
    EpochCursor cursor(n, derive_seed(seed, hash_name("joint.batches")));
    std::vector<std::size_t> batch;
    std::vector<double> gw(dim), gc(dim);
    const bool relu = params.activation == Activation::relu;

    for (long t = 0; t < cfg.iters; ++t) {
        const double lr = joint_lr(cfg, t);
        cursor.fill(batch, static_cast<std::size_t>(cfg.batch));
        std::fill(gw.begin(), gw.end(), 0.0);
        std::fill(gc.begin(), gc.end(), 0.0);
        double loss = 0.0;
        for (std::size_t idx : batch) {
            const double* x = ds.row(idx);
            double yhat = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                yhat += params.c[j] * act(params.activation, params.w[j] * x[j]);
            }
            const double r = yhat - ds.data.y[idx];
            loss += 0.5 * r * r;
            for (std::size_t j = 0; j < dim; ++j) {
                const double z = params.w[j] * x[j];
                if (relu) {
                    if (z > 0.0) {
                        gw[j] += r * params.c[j] * x[j];
                        gc[j] += r * z;
                    }
                } else {
                    gw[j] += r * params.c[j] * x[j];
                    gc[j] += r * z;
                }
            }
        }
        const double inv_b = 1.0 / static_cast<double>(cfg.batch);
        loss *= inv_b;
        check_divergence(loss, cfg.divergence_guard, t);
        for (std::size_t j = 0; j < dim; ++j) {
            params.w[j] -= lr * gw[j] * inv_b;
            params.c[j] -= lr * gc[j] * inv_b;
        }

        double rel = kNaN;
        const bool eval_now = ds.data.has_clean() &&
            ((cfg.eval_every > 0 && (t + 1) % cfg.eval_every == 0) || t + 1 == cfg.iters);
        if (eval_now) rel = rel_l2_against_clean(predict_all(params, ds), ds.data.y_clean);
        trace.rows.push_back({t + 1, loss, rel, lr});
        if ((cfg.snapshot_every > 0 && (t + 1) % cfg.snapshot_every == 0) ||
            t + 1 == cfg.iters) {
            trace.snapshots.push_back({t + 1, params.w, params.c});
        }
    }
    trace.wall_seconds = clock.seconds();
    return trace;
}

TrainingTrace train_joint(DeepNetParams& params, const EmbeddedDataset& ds,
                          const JointConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const std::size_t n = ds.size();
    const std::size_t dim = static_cast<std::size_t>(ds.dim);
    if (static_cast<std::size_t>(params.embedding_dim()) != dim ||
        (params.embedding == EmbeddingChoice::symmetrized) !=
            (ds.choice == EmbeddingChoice::symmetrized)) {
        throw shape_error("joint(deep): embedding mismatch");
    }

    Stopwatch clock;
    TrainingTrace trace;
    trace.seed = seed;
    EpochCursor cursor(n, derive_seed(seed, hash_name("joint.batches")));
    std::vector<std::size_t> batch;
    DeepGrad grad = make_deep_grad(params);

    const std::size_t B = static_cast<std::size_t>(cfg.batch);
    const std::size_t L = params.layers.size();
    std::vector<double> Xb(B * dim);
    std::vector<std::vector<double>> act(L), pre(L), delta(L);
    for (std::size_t k = 0; k < L; ++k) {
        act[k].assign(B * static_cast<std::size_t>(params.layers[k].in), 0.0);
        pre[k].assign(B * static_cast<std::size_t>(params.layers[k].out), 0.0);
        delta[k].assign(B * static_cast<std::size_t>(params.layers[k].out), 0.0);
    }
    std::vector<double> dgate;  // d loss / d gate output
    if (params.has_diagonal) dgate.assign(B * dim, 0.0);

    for (long t = 0; t < cfg.iters; ++t) {
        const double lr = joint_lr(cfg, t);
        cursor.fill(batch, B);
        zero_deep_grad(grad);

        for (std::size_t b = 0; b < B; ++b) {
            const double* row = ds.row(batch[b]);
            std::copy(row, row + dim, Xb.begin() + static_cast<long>(b * dim));
        }
        if (params.has_diagonal) {
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t i = 0; i < dim; ++i) {
                    const double z = params.diagonal[i] * Xb[b * dim + i];
                    act[0][b * dim + i] = z > 0.0 ? z : 0.0;
                }
            }
        } else {
            act[0] = Xb;
        }
        for (std::size_t k = 0; k < L; ++k) {
            const DenseLayer& l = params.layers[k];
            gemm_nt(act[k].data(), l.weight.data(), l.bias.data(), pre[k].data(), B,
                    static_cast<std::size_t>(l.in), static_cast<std::size_t>(l.out));
            if (k + 1 < L) {
                const std::size_t sz = B * static_cast<std::size_t>(l.out);
                for (std::size_t i = 0; i < sz; ++i) {
                    act[k + 1][i] = pre[k][i] > 0.0 ? pre[k][i] : 0.0;
                }
            }
        }

        double loss = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            const double r = pre[L - 1][b] - ds.data.y[batch[b]];
            delta[L - 1][b] = r;
            loss += 0.5 * r * r;
        }
        const double inv_b = 1.0 / static_cast<double>(cfg.batch);
        loss *= inv_b;
        check_divergence(loss, cfg.divergence_guard, t);

        for (std::size_t k = L; k-- > 0;) {
            const DenseLayer& l = params.layers[k];
            DenseLayer& gl = grad.layers[k];
            const std::size_t in = static_cast<std::size_t>(l.in);
            const std::size_t out = static_cast<std::size_t>(l.out);
            gemm_tn_acc(delta[k].data(), act[k].data(), gl.weight.data(), B, out, in);
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t o = 0; o < out; ++o) gl.bias[o] += delta[k][b * out + o];
            }
            if (k > 0) {
                gemm_nn(delta[k].data(), l.weight.data(), delta[k - 1].data(), B, out, in);
                const std::size_t sz = B * in;
                for (std::size_t i = 0; i < sz; ++i) {
                    if (pre[k - 1][i] <= 0.0) delta[k - 1][i] = 0.0;
                }
            } else if (params.has_diagonal) {
                gemm_nn(delta[0].data(), l.weight.data(), dgate.data(), B, out, in);
            }
        }
        if (params.has_diagonal) {
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t i = 0; i < dim; ++i) {
                    const double x = Xb[b * dim + i];
                    if (params.diagonal[i] * x > 0.0) grad.diagonal[i] += dgate[b * dim + i] * x;
                }
            }
        }

        const double step = lr * inv_b;
        if (params.has_diagonal) {
            for (std::size_t i = 0; i < params.diagonal.size(); ++i) {
                params.diagonal[i] -= step * grad.diagonal[i];
            }
        }
        for (std::size_t k = 0; k < params.layers.size(); ++k) {
            DenseLayer& l = params.layers[k];
            const DenseLayer& gl = grad.layers[k];
            for (std::size_t i = 0; i < l.weight.size(); ++i) l.weight[i] -= step * gl.weight[i];
            for (std::size_t i = 0; i < l.bias.size(); ++i) l.bias[i] -= step * gl.bias[i];
        }

        double rel = kNaN;
        const bool eval_now = ds.data.has_clean() &&
            ((cfg.eval_every > 0 && (t + 1) % cfg.eval_every == 0) || t + 1 == cfg.iters);
        if (eval_now) rel = rel_l2_against_clean(predict_all(params, ds), ds.data.y_clean);
        trace.rows.push_back({t + 1, loss, rel, lr});
        if ((cfg.snapshot_every > 0 && (t + 1) % cfg.snapshot_every == 0) ||
            t + 1 == cfg.iters) {
            ParamSnapshot snap;
            snap.iter = t + 1;
            snap.w = params.has_diagonal ? params.diagonal : std::vector<double>{};
            trace.snapshots.push_back(std::move(snap));
        }
    }
    trace.wall_seconds = clock.seconds();
    return trace;
}

std::vector<double> predict_all(const DiagNetParams& params, const EmbeddedDataset& ds) {
    std::vector<double> out(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) out[i] = forward_diag_raw(params, ds.row(i));
    return out;
}

std::vector<double> predict_all(const DeepNetParams& params, const EmbeddedDataset& ds) {
    std::vector<double> out(ds.size());
    DeepWorkspace ws;
    for (std::size_t i = 0; i < ds.size(); ++i) out[i] = forward_deep_raw(params, ds.row(i), ws);
    return out;
}

void write_trace_csv(std::ostream& os, const TrainingTrace& trace) {
    os << "iteration,loss,rel_l2,lr\n";
    for (const TraceRow& r : trace.rows) {
        os << r.iter << ',' << csv::fmt(r.loss) << ',' << csv::fmt(r.rel_l2) << ','
           << csv::fmt(r.lr) << '\n';
    }
}

}  // namespace fdnet
