#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdnet/embedding.hpp"
#include "fdnet/spectral.hpp"

namespace fdnet {

enum class Activation { relu, identity };

// sigma'(0) := 0 for the ReLU.
inline double act(Activation a, double z) {
    return a == Activation::identity ? z : (z > 0.0 ? z : 0.0);
}
inline double act_deriv(Activation a, double z) {
    return a == Activation::identity ? 1.0 : (z > 0.0 ? 1.0 : 0.0);
}

// Diagonal network c' sigma(w . x) over the symmetrized embedding. w and c
// use the same offset-2m layout as FourierVector.
struct DiagNetParams {
    EmbeddingConfig cfg;
    std::vector<double> w;
    std::vector<double> c;
    Activation activation = Activation::relu;
    double r_c = 0.5;
    double q1 = 10.0;
    double q2 = 10.0;

    int dim() const { return cfg.dim_sym(); }
    double& w_at(int j) { return w[static_cast<std::size_t>(j + 2 * cfg.m)]; }
    double& c_at(int j) { return c[static_cast<std::size_t>(j + 2 * cfg.m)]; }
    double w_at(int j) const { return w[static_cast<std::size_t>(j + 2 * cfg.m)]; }
    double c_at(int j) const { return c[static_cast<std::size_t>(j + 2 * cfg.m)]; }
};

DiagNetParams make_diag_net(const EmbeddingConfig& cfg, Activation act, double r_c,
                            std::uint64_t seed);

struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> weight;  // row-major, out x in
    std::vector<double> bias;    // length out
};

enum class EmbeddingChoice { symmetrized, doubled };

// Feed-forward variants: embedding -> [optional diagonal + ReLU] -> hidden
// dense layers with ReLU -> linear output.
struct DeepNetParams {
    EmbeddingConfig cfg;
    EmbeddingChoice embedding = EmbeddingChoice::doubled;
    bool has_diagonal = false;
    std::vector<double> diagonal;   // length embedding_dim() iff has_diagonal
    std::vector<DenseLayer> layers; // hidden layers then the output layer

    int embedding_dim() const {
        return embedding == EmbeddingChoice::symmetrized ? cfg.dim_sym() : cfg.dim_doubled();
    }
    std::size_t parameter_count() const;
};

// c0[j] in {-r_c/sqrt(m), +r_c/sqrt(m)} for j >= 0, mirrored c0[-j] = -c0[j].
std::vector<double> init_symmetric_c(const EmbeddingConfig& cfg, double r_c, std::uint64_t seed);

// Weights ~ Normal(0, 2/(fan_in+fan_out)), biases zero. The diagonal, when
// present, uses fan_in = fan_out = embedding dim.
void init_glorot(DeepNetParams& params, std::uint64_t seed);

DeepNetParams make_deep_net(const EmbeddingConfig& cfg, EmbeddingChoice embedding,
                            bool has_diagonal, const std::vector<int>& hidden_widths,
                            std::uint64_t seed);

double forward_diag(const DiagNetParams& params, const FourierVector& x);
double forward_diag_raw(const DiagNetParams& params, const double* x);

struct DiagGrad {
    std::vector<double> w;
    std::vector<double> c;
    double residual = 0.0;  // prediction minus label
};

DiagGrad grad_diag_sample(const DiagNetParams& params, const FourierVector& x, double y);

struct DeepGrad {
    std::vector<double> diagonal;
    std::vector<DenseLayer> layers;  // weight/bias carry the gradients
    double residual = 0.0;
};

// Scratch space so per-sample backprop does not allocate.
struct DeepWorkspace {
    std::vector<std::vector<double>> pre;   // preactivations per dense layer
    std::vector<std::vector<double>> post;  // inputs to each dense layer
    std::vector<double> embedded;
    std::vector<double> delta_a, delta_b;
};

double forward_deep(const DeepNetParams& params, double theta);
double forward_deep_raw(const DeepNetParams& params, const double* x, DeepWorkspace& ws);

DeepGrad make_deep_grad(const DeepNetParams& params);
void zero_deep_grad(DeepGrad& g);

// Accumulates d loss / d params for one sample into `g`; returns the residual.
double accumulate_grad_deep(const DeepNetParams& params, const double* x, double y,
                            DeepGrad& g, DeepWorkspace& ws);

DeepGrad grad_deep_sample(const DeepNetParams& params, double theta, double y);

// ReLU activity pattern of a forward pass; used to detect kink crossings.
std::vector<char> deep_activity_mask(const DeepNetParams& params, const double* x,
                                     DeepWorkspace& ws);

enum class ExpectationConvention {
    sampled,  // equal-weight mean over the grid, matching empirical gradients
    mass2     // trapezoid integral over [-1, 1], matching the spectral identities
};

// Gradient of the ridge-regularized population risk in w via quadrature of the
// prediction and label expectation terms; the label is synthesized from alpha.
std::vector<double> population_grad_w(const DiagNetParams& params, const SignedAlpha& alpha,
                                      const std::vector<double>& grid, double lambda,
                                      ExpectationConvention convention);

// The h(w) vector from the population gradient expansion, same convention flag.
std::vector<double> population_h(const DiagNetParams& params, const std::vector<double>& grid,
                                 ExpectationConvention convention);

void save_checkpoint(std::ostream& os, const DiagNetParams& params);
void save_checkpoint(std::ostream& os, const DeepNetParams& params);

struct Checkpoint {
    bool is_diag = false;
    DiagNetParams diag;
    DeepNetParams deep;
};
Checkpoint load_checkpoint(std::istream& is);

}  // namespace fdnet
