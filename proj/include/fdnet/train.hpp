#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdnet/datagen.hpp"
#include "fdnet/model.hpp"

namespace fdnet {

// Dataset with its embedding matrix precomputed once; trainers and metric
// evaluations index rows instead of recomputing sinusoids.
struct EmbeddedDataset {
    Dataset data;
    EmbeddingConfig cfg;
    EmbeddingChoice choice = EmbeddingChoice::symmetrized;
    int dim = 0;
    std::vector<double> X;  // row-major size() x dim

    std::size_t size() const { return data.size(); }
    const double* row(std::size_t i) const {
        return X.data() + i * static_cast<std::size_t>(dim);
    }
};

EmbeddedDataset embed_dataset(const Dataset& data, const EmbeddingConfig& cfg,
                              EmbeddingChoice choice);

struct Phase1Config {
    double eta = 0.01;
    double lambda = 0.1;
    double q1 = 10.0;
    long iters = 1000;      // T
    long batch = 256;       // B
    bool strict_fresh = false;  // error instead of wrapping when T*B > n
    long eval_every = 10;   // relative-L2 cadence; <=0 disables between ends
    long snapshot_every = 0;  // 0: final snapshot only
    std::vector<double> w_init;  // empty: zero vector

    void validate() const;
};

enum class Phase2Schedule { constant, last_iterate_rule };

struct Phase2Config {
    double eta_prime = 1.0;
    long iters = 1000;  // T'
    double q2 = 10.0;
    Phase2Schedule schedule = Phase2Schedule::last_iterate_rule;
    double q1 = 10.0;   // enters the last-iterate step rule
    long batch = 256;
    long eval_every = 10;
    long snapshot_every = 0;

    void validate() const;
};

struct JointConfig {
    double alpha0 = 2e-3;
    double gamma = 0.95;
    double m0 = 5e4;
    long batch = 201;
    long iters = 5000;
    long eval_every = 50;
    long snapshot_every = 0;
    double divergence_guard = 1e6;

    void validate() const;
};

struct TraceRow {
    long iter = 0;
    double loss = 0.0;
    double rel_l2 = 0.0;  // NaN when not evaluated at this iteration
    double lr = 0.0;
};

struct ParamSnapshot {
    long iter = 0;
    std::vector<double> w;
    std::vector<double> c;
};

struct TrainingTrace {
    std::vector<TraceRow> rows;
    std::vector<ParamSnapshot> snapshots;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    bool wrapped = false;  // sample pool was consumed more than once
    std::string note;
};

// Elementwise clamp onto [-q, q].
std::vector<double> project_box(std::vector<double> v, double q);

// Inverse-decay learning rate alpha0 / (1 + gamma * step / m0).
double joint_lr(const JointConfig& cfg, long step);

// min{ 1/(10 q1^2), eta_prime/sqrt(t_prime) }.
double phase2_step_size(double q1, double eta_prime, long t_prime);

// Theory admissibility of the phase-1 box: Q1 >= ||c0 . alpha / 2||_inf / lambda.
bool q1_satisfies_theory(double q1, const std::vector<double>& c0, const SignedAlpha& alpha,
                         double lambda);

struct Phase1Result {
    DiagNetParams params;
    TrainingTrace trace;
};

// Projected SGD on w with ridge, c frozen at its initialization.
Phase1Result train_phase1(const EmbeddedDataset& ds, const DiagNetParams& start,
                          const Phase1Config& cfg, std::uint64_t seed);

struct Phase2Result {
    DiagNetParams params;
    TrainingTrace trace;
};

// Projected SGD on c over the features frozen at w_T.
Phase2Result train_phase2(const EmbeddedDataset& ds, const DiagNetParams& frozen,
                          const Phase2Config& cfg, std::uint64_t seed);

// Plain SGD over all parameters, minibatches by shuffled epochs.
TrainingTrace train_joint(DiagNetParams& params, const EmbeddedDataset& ds,
                          const JointConfig& cfg, std::uint64_t seed);
TrainingTrace train_joint(DeepNetParams& params, const EmbeddedDataset& ds,
                          const JointConfig& cfg, std::uint64_t seed);

// Predictions over every dataset row.
std::vector<double> predict_all(const DiagNetParams& params, const EmbeddedDataset& ds);
std::vector<double> predict_all(const DeepNetParams& params, const EmbeddedDataset& ds);

// CSV with columns iteration,loss,rel_l2,lr.
void write_trace_csv(std::ostream& os, const TrainingTrace& trace);

}  // namespace fdnet
