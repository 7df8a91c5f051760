#include "fdnet/model.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "fdnet/csv.hpp"
#include "fdnet/errors.hpp"
#include "fdnet/numeric.hpp"
#include "fdnet/rng.hpp"

namespace fdnet {

std::vector<double> init_symmetric_c(const EmbeddingConfig& cfg, double r_c,
                                     std::uint64_t seed) {
    cfg.validate();
    if (!(r_c > 0.0)) throw config_error("init_symmetric_c: r_c must be positive");
    const double mag = r_c / std::sqrt(static_cast<double>(cfg.m));
    std::vector<double> c(static_cast<std::size_t>(cfg.dim_sym()), 0.0);
    const int off = 2 * cfg.m;
    Rng rng(seed);
    for (int j = 0; j <= 2 * cfg.m; ++j) {
        const double v = mag * rng.pm_one();
        c[static_cast<std::size_t>(off + j)] = v;
        if (j >= 1) c[static_cast<std::size_t>(off - j)] = -v;
    }
    return c;
}

DiagNetParams make_diag_net(const EmbeddingConfig& cfg, Activation act, double r_c,
                            std::uint64_t seed) {
    cfg.validate();
    DiagNetParams p;
    p.cfg = cfg;
    p.activation = act;
    p.r_c = r_c;
    p.w.assign(static_cast<std::size_t>(cfg.dim_sym()), 0.0);
    p.c = init_symmetric_c(cfg, r_c, seed);
    return p;
}

std::size_t DeepNetParams::parameter_count() const {
    std::size_t n = diagonal.size();
    for (const DenseLayer& l : layers) n += l.weight.size() + l.bias.size();
    return n;
}

void init_glorot(DeepNetParams& params, std::uint64_t seed) {
    Rng rng(seed);
    if (params.has_diagonal) {
        // Neutral gate: the doubled embedding already carries both signs of
        // every mode, so starting at 1 keeps both ReLU polarities reachable
        // for each frequency and leaves mode selection entirely to training.
        for (double& v : params.diagonal) v = 1.0;
    }
    for (DenseLayer& l : params.layers) {
        const double sd = std::sqrt(2.0 / static_cast<double>(l.in + l.out));
        for (double& v : l.weight) v = sd * rng.normal();
        for (double& v : l.bias) v = 0.0;
    }
}

DeepNetParams make_deep_net(const EmbeddingConfig& cfg, EmbeddingChoice embedding,
                            bool has_diagonal, const std::vector<int>& hidden_widths,
                            std::uint64_t seed) {
    cfg.validate();
    DeepNetParams p;
    p.cfg = cfg;
    p.embedding = embedding;
    p.has_diagonal = has_diagonal;
    const int dim = p.embedding_dim();
    if (has_diagonal) p.diagonal.assign(static_cast<std::size_t>(dim), 0.0);

    int prev = dim;
    for (int wdt : hidden_widths) {
        if (wdt < 1) throw config_error("make_deep_net: hidden width must be >= 1");
        DenseLayer l;
        l.in = prev;
        l.out = wdt;
        l.weight.assign(static_cast<std::size_t>(prev) * wdt, 0.0);
        l.bias.assign(static_cast<std::size_t>(wdt), 0.0);
        p.layers.push_back(std::move(l));
        prev = wdt;
    }
    DenseLayer out;
    out.in = prev;
    out.out = 1;
    out.weight.assign(static_cast<std::size_t>(prev), 0.0);
    out.bias.assign(1, 0.0);
    p.layers.push_back(std::move(out));

    init_glorot(p, seed);
    return p;
}

double forward_diag_raw(const DiagNetParams& params, const double* x) {
    const std::size_t n = params.w.size();
    double acc = 0.0;
    if (params.activation == Activation::identity) {
        for (std::size_t i = 0; i < n; ++i) acc += params.c[i] * params.w[i] * x[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double z = params.w[i] * x[i];
            if (z > 0.0) acc += params.c[i] * z;
        }
    }
    return acc;
}

double forward_diag(const DiagNetParams& params, const FourierVector& x) {
    if (static_cast<int>(params.w.size()) != x.dim() || params.w.size() != params.c.size()) {
        throw shape_error("forward_diag: parameter/input dimensions differ");
    }
    return forward_diag_raw(params, x.values.data());
}

DiagGrad grad_diag_sample(const DiagNetParams& params, const FourierVector& x, double y) {
    if (static_cast<int>(params.w.size()) != x.dim()) {
        throw shape_error("grad_diag_sample: parameter/input dimensions differ");
    }
    DiagGrad g;
    g.residual = forward_diag_raw(params, x.values.data()) - y;
    const std::size_t n = params.w.size();
    g.w.assign(n, 0.0);
    g.c.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = params.w[i] * x.values[i];
        g.w[i] = g.residual * params.c[i] * act_deriv(params.activation, z) * x.values[i];
        g.c[i] = g.residual * act(params.activation, z);
    }
    return g;
}

namespace {

void ensure_workspace(const DeepNetParams& p, DeepWorkspace& ws) {
    const std::size_t L = p.layers.size();
    if (ws.post.size() != L) {
        ws.post.assign(L, {});
        ws.pre.assign(L, {});
    }
    for (std::size_t k = 0; k < L; ++k) {
        ws.post[k].resize(static_cast<std::size_t>(p.layers[k].in));
        ws.pre[k].resize(static_cast<std::size_t>(p.layers[k].out));
    }
}

// Forward pass, filling ws.post[k] (input of layer k) and ws.pre[k]
// (preactivation of layer k). Hidden layers take a ReLU, the last is linear.
double forward_into(const DeepNetParams& p, const double* x, DeepWorkspace& ws) {
    ensure_workspace(p, ws);
    const std::size_t dim = static_cast<std::size_t>(p.embedding_dim());
    {
        std::vector<double>& h0 = ws.post[0];
        if (p.has_diagonal) {
            for (std::size_t i = 0; i < dim; ++i) {
                const double z = p.diagonal[i] * x[i];
                h0[i] = z > 0.0 ? z : 0.0;
            }
        } else {
            for (std::size_t i = 0; i < dim; ++i) h0[i] = x[i];
        }
    }
    const std::size_t L = p.layers.size();
    for (std::size_t k = 0; k < L; ++k) {
        const DenseLayer& l = p.layers[k];
        const double* in = ws.post[k].data();
        for (int r = 0; r < l.out; ++r) {
            ws.pre[k][static_cast<std::size_t>(r)] =
                l.bias[static_cast<std::size_t>(r)] +
                dot(l.weight.data() + static_cast<std::size_t>(r) * l.in, in,
                    static_cast<std::size_t>(l.in));
        }
        if (k + 1 < L) {
            std::vector<double>& nxt = ws.post[k + 1];
            for (int r = 0; r < l.out; ++r) {
                const double z = ws.pre[k][static_cast<std::size_t>(r)];
                nxt[static_cast<std::size_t>(r)] = z > 0.0 ? z : 0.0;
            }
        }
    }
    return ws.pre[L - 1][0];
}

}  // namespace

double forward_deep_raw(const DeepNetParams& params, const double* x, DeepWorkspace& ws) {
    return forward_into(params, x, ws);
}

double forward_deep(const DeepNetParams& params, double theta) {
    DeepWorkspace ws;
    const std::vector<double> x = params.embedding == EmbeddingChoice::symmetrized
                                      ? embed_sym(theta, params.cfg).values
                                      : embed_doubled(theta, params.cfg);
    return forward_into(params, x.data(), ws);
}

DeepGrad make_deep_grad(const DeepNetParams& params) {
    DeepGrad g;
    if (params.has_diagonal) g.diagonal.assign(params.diagonal.size(), 0.0);
    g.layers = params.layers;
    zero_deep_grad(g);
    return g;
}

void zero_deep_grad(DeepGrad& g) {
    std::fill(g.diagonal.begin(), g.diagonal.end(), 0.0);
    for (DenseLayer& l : g.layers) {
        std::fill(l.weight.begin(), l.weight.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    g.residual = 0.0;
}

double accumulate_grad_deep(const DeepNetParams& params, const double* x, double y,
                            DeepGrad& g, DeepWorkspace& ws) {
    const double yhat = forward_into(params, x, ws);
    const double r = yhat - y;
    const std::size_t L = params.layers.size();

    // delta holds d loss / d preactivation of the current layer.
    std::vector<double>& delta = ws.delta_a;
    std::vector<double>& lower = ws.delta_b;
    delta.assign(1, r);
    for (std::size_t k = L; k-- > 0;) {
        const DenseLayer& l = params.layers[k];
        DenseLayer& gl = g.layers[k];
        const double* in = ws.post[k].data();
        for (int rr = 0; rr < l.out; ++rr) {
            const double d = delta[static_cast<std::size_t>(rr)];
            if (d == 0.0) continue;
            gl.bias[static_cast<std::size_t>(rr)] += d;
            double* wrow = gl.weight.data() + static_cast<std::size_t>(rr) * l.in;
            for (int cc = 0; cc < l.in; ++cc) wrow[cc] += d * in[cc];
        }
        // Pull the delta through the weights and the input's ReLU.
        lower.assign(static_cast<std::size_t>(l.in), 0.0);
        for (int rr = 0; rr < l.out; ++rr) {
            const double d = delta[static_cast<std::size_t>(rr)];
            if (d == 0.0) continue;
            const double* wrow = l.weight.data() + static_cast<std::size_t>(rr) * l.in;
            for (int cc = 0; cc < l.in; ++cc) lower[static_cast<std::size_t>(cc)] += d * wrow[cc];
        }
        if (k > 0) {
            for (int cc = 0; cc < l.in; ++cc) {
                if (ws.pre[k - 1][static_cast<std::size_t>(cc)] <= 0.0) {
                    lower[static_cast<std::size_t>(cc)] = 0.0;
                }
            }
        }
        std::swap(delta, lower);
    }
    if (params.has_diagonal) {
        const std::size_t dim = params.diagonal.size();
        for (std::size_t i = 0; i < dim; ++i) {
            const double z = params.diagonal[i] * x[i];
            if (z > 0.0) g.diagonal[i] += delta[i] * x[i];
        }
    }
    return r;
}

DeepGrad grad_deep_sample(const DeepNetParams& params, double theta, double y) {
    DeepWorkspace ws;
    const std::vector<double> x = params.embedding == EmbeddingChoice::symmetrized
                                      ? embed_sym(theta, params.cfg).values
                                      : embed_doubled(theta, params.cfg);
    DeepGrad g = make_deep_grad(params);
    g.residual = accumulate_grad_deep(params, x.data(), y, g, ws);
    return g;
}

std::vector<char> deep_activity_mask(const DeepNetParams& params, const double* x,
                                     DeepWorkspace& ws) {
    forward_into(params, x, ws);
    std::vector<char> mask;
    if (params.has_diagonal) {
        for (std::size_t i = 0; i < params.diagonal.size(); ++i) {
            mask.push_back(params.diagonal[i] * x[i] > 0.0 ? 1 : 0);
        }
    }
    for (std::size_t k = 0; k + 1 < params.layers.size(); ++k) {
        for (double z : ws.pre[k]) mask.push_back(z > 0.0 ? 1 : 0);
    }
    return mask;
}

std::vector<double> population_h(const DiagNetParams& params, const std::vector<double>& grid,
                                 ExpectationConvention convention) {
    const double delta = check_uniform_closed_grid(grid);
    const std::size_t n = grid.size();
    const std::size_t dim = params.w.size();
    const std::vector<double> X = embed_grid_sym(grid, params.cfg);

    std::vector<double> h(dim, 0.0);
    std::vector<double> inner(n, 0.0);
    // inner(theta) = sum_k c_k |w_k| sigma(sign(w_k) x_k)
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = X.data() + i * dim;
        double acc = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double s = sign_of(params.w[k]);
            if (s == 0.0) continue;
            const double u = s * row[k];
            if (u > 0.0) acc += params.c[k] * std::fabs(params.w[k]) * u;
        }
        inner[i] = acc;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double wt;
        if (convention == ExpectationConvention::sampled) {
            wt = 1.0 / static_cast<double>(n);
        } else {
            wt = (i == 0 || i + 1 == n) ? 0.5 * delta : delta;
        }
        const double* row = X.data() + i * dim;
        const double v = wt * inner[i];
        for (std::size_t j = 0; j < dim; ++j) {
            const double s = sign_of(params.w[j]);
            if (s == 0.0) continue;
            const double u = s * row[j];
            if (u > 0.0) h[j] += v * u;
        }
    }
    return h;
}

std::vector<double> population_grad_w(const DiagNetParams& params, const SignedAlpha& alpha,
                                      const std::vector<double>& grid, double lambda,
                                      ExpectationConvention convention) {
    if (alpha.m != params.cfg.m) throw shape_error("population_grad_w: band mismatch");
    const double delta = check_uniform_closed_grid(grid);
    const std::size_t n = grid.size();
    const std::size_t dim = params.w.size();
    if ((grid.size() - 1) < static_cast<std::size_t>(4 * params.cfg.m)) {
        throw resolution_error("population_grad_w: grid too coarse for the band");
    }
    const std::vector<double> X = embed_grid_sym(grid, params.cfg);

    std::vector<double> g(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = X.data() + i * dim;
        // label synthesized from the positive-side coefficients
        double y = 0.0;
        for (int l = 0; l <= 2 * params.cfg.m; ++l) {
            y += alpha.at(l) * row[static_cast<std::size_t>(l + 2 * params.cfg.m)];
        }
        const double r = forward_diag_raw(params, row) - y;
        double wt;
        if (convention == ExpectationConvention::sampled) {
            wt = 1.0 / static_cast<double>(n);
        } else {
            wt = (i == 0 || i + 1 == n) ? 0.5 * delta : delta;
        }
        const double v = wt * r;
        for (std::size_t j = 0; j < dim; ++j) {
            const double z = params.w[j] * row[j];
            g[j] += v * params.c[j] * act_deriv(params.activation, z) * row[j];
        }
    }
    for (std::size_t j = 0; j < dim; ++j) g[j] += lambda * params.w[j];
    return g;
}

// --- checkpoints ----------------------------------------------------------

void save_checkpoint(std::ostream& os, const DiagNetParams& params) {
    os << "# fdnet-checkpoint v1\n";
    os << "# kind=diag\n";
    os << "# m=" << params.cfg.m << '\n';
    os << "# activation=" << (params.activation == Activation::relu ? "relu" : "identity")
       << '\n';
    os << "# r_c=" << csv::fmt(params.r_c) << " q1=" << csv::fmt(params.q1)
       << " q2=" << csv::fmt(params.q2) << '\n';
    os << "layer,row,col,value\n";
    for (std::size_t i = 0; i < params.w.size(); ++i) {
        os << "w,0," << i << ',' << csv::fmt(params.w[i]) << '\n';
    }
    for (std::size_t i = 0; i < params.c.size(); ++i) {
        os << "c,0," << i << ',' << csv::fmt(params.c[i]) << '\n';
    }
}

void save_checkpoint(std::ostream& os, const DeepNetParams& params) {
    os << "# fdnet-checkpoint v1\n";
    os << "# kind=deep\n";
    os << "# m=" << params.cfg.m << '\n';
    os << "# embedding="
       << (params.embedding == EmbeddingChoice::symmetrized ? "symmetrized" : "doubled") << '\n';
    os << "# has_diagonal=" << (params.has_diagonal ? 1 : 0) << '\n';
    os << "# widths=";
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        os << params.layers[k].out << (k + 1 < params.layers.size() ? "," : "");
    }
    os << '\n';
    os << "layer,row,col,value\n";
    for (std::size_t i = 0; i < params.diagonal.size(); ++i) {
        os << "diag,0," << i << ',' << csv::fmt(params.diagonal[i]) << '\n';
    }
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        const DenseLayer& l = params.layers[k];
        for (int r = 0; r < l.out; ++r) {
            for (int c = 0; c < l.in; ++c) {
                os << "dense" << k << ".w," << r << ',' << c << ','
                   << csv::fmt(l.weight[static_cast<std::size_t>(r) * l.in + c]) << '\n';
            }
            os << "dense" << k << ".b," << r << ",0," << csv::fmt(l.bias[static_cast<std::size_t>(r)])
               << '\n';
        }
    }
}

namespace {

std::string header_value(const std::string& line, const std::string& key) {
    const std::string tag = key + "=";
    const auto pos = line.find(tag);
    if (pos == std::string::npos) return {};
    auto end = line.find(' ', pos);
    if (end == std::string::npos) end = line.size();
    return line.substr(pos + tag.size(), end - pos - tag.size());
}

}  // namespace

Checkpoint load_checkpoint(std::istream& is) {
    Checkpoint ck;
    std::string line;
    int m = 0;
    bool diag_kind = false;
    std::string activation = "relu";
    std::string embedding = "doubled";
    bool has_diag = false;
    std::vector<int> widths;
    std::size_t line_no = 0;

    // Header block.
    while (std::getline(is, line)) {
        ++line_no;
        if (line.rfind("#", 0) != 0) break;
        if (line.find("kind=diag") != std::string::npos) diag_kind = true;
        if (auto v = header_value(line, "m"); !v.empty()) m = std::stoi(v);
        if (auto v = header_value(line, "activation"); !v.empty()) activation = v;
        if (auto v = header_value(line, "embedding"); !v.empty()) embedding = v;
        if (auto v = header_value(line, "has_diagonal"); !v.empty()) has_diag = v == "1";
        if (auto v = header_value(line, "widths"); !v.empty()) {
            std::istringstream ss(v);
            std::string tok;
            while (std::getline(ss, tok, ',')) widths.push_back(std::stoi(tok));
        }
    }
    if (m < 1) throw parse_error("checkpoint: missing band limit", line_no);
    if (line != "layer,row,col,value") throw parse_error("checkpoint: missing column header", line_no);

    EmbeddingConfig cfg{m};
    ck.is_diag = diag_kind;
    if (diag_kind) {
        ck.diag.cfg = cfg;
        ck.diag.activation = activation == "identity" ? Activation::identity : Activation::relu;
        ck.diag.w.assign(static_cast<std::size_t>(cfg.dim_sym()), 0.0);
        ck.diag.c.assign(static_cast<std::size_t>(cfg.dim_sym()), 0.0);
    } else {
        ck.deep.cfg = cfg;
        ck.deep.embedding = embedding == "symmetrized" ? EmbeddingChoice::symmetrized
                                                       : EmbeddingChoice::doubled;
        ck.deep.has_diagonal = has_diag;
        if (has_diag) ck.deep.diagonal.assign(static_cast<std::size_t>(ck.deep.embedding_dim()), 0.0);
        int prev = ck.deep.embedding_dim();
        for (int wdt : widths) {
            DenseLayer l;
            l.in = prev;
            l.out = wdt;
            l.weight.assign(static_cast<std::size_t>(prev) * wdt, 0.0);
            l.bias.assign(static_cast<std::size_t>(wdt), 0.0);
            ck.deep.layers.push_back(std::move(l));
            prev = wdt;
        }
    }

    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string layer, row_s, col_s, val_s;
        if (!std::getline(ss, layer, ',') || !std::getline(ss, row_s, ',') ||
            !std::getline(ss, col_s, ',') || !std::getline(ss, val_s, ',')) {
            throw parse_error("checkpoint: bad row", line_no);
        }
        const int row = std::stoi(row_s);
        const int col = std::stoi(col_s);
        const double val = std::stod(val_s);
        if (diag_kind) {
            if (layer == "w") ck.diag.w.at(static_cast<std::size_t>(col)) = val;
            else if (layer == "c") ck.diag.c.at(static_cast<std::size_t>(col)) = val;
            else throw parse_error("checkpoint: unknown layer '" + layer + "'", line_no);
        } else {
            if (layer == "diag") {
                ck.deep.diagonal.at(static_cast<std::size_t>(col)) = val;
            } else if (layer.rfind("dense", 0) == 0) {
                const bool is_bias = layer.size() > 2 && layer.substr(layer.size() - 2) == ".b";
                const int k = std::stoi(layer.substr(5));
                DenseLayer& l = ck.deep.layers.at(static_cast<std::size_t>(k));
                if (is_bias) l.bias.at(static_cast<std::size_t>(row)) = val;
                else l.weight.at(static_cast<std::size_t>(row) * l.in + col) = val;
            } else {
                throw parse_error("checkpoint: unknown layer '" + layer + "'", line_no);
            }
        }
    }
    return ck;
}

}  // namespace fdnet
