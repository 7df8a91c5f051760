#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fdnet/datagen.hpp"
#include "fdnet/model.hpp"
#include "fdnet/train.hpp"

namespace fdnet {

// Diagnostics of phase-1 feature recovery against the closed-form limit.
struct RecoveryReport {
    std::vector<double> w_star;  // offset-2m layout
    double linf_error = 0.0;
    std::vector<int> support_true;
    std::vector<int> support_found;
    bool sign_paired = false;
    double tau = 0.0;

    struct ModeRow {
        int index = 0;
        int frequency = 0;
        char kind = '1';
        double w_t = 0.0;
        double w_star = 0.0;
        bool in_support_true = false;
        bool in_support_found = false;
    };
    std::vector<ModeRow> table;
};

// ((1 - (1 - eta*lambda)^T)/lambda) * (c0 . alpha) * factor, where the factor
// is 1/2 under the mass-2 identities and 1/4 when gradients are averaged over
// samples drawn uniformly on [-1, 1].
std::vector<double> limit_feature(const std::vector<double>& c0, const SignedAlpha& alpha,
                                  double eta, double lambda, long iters,
                                  ExpectationConvention convention = ExpectationConvention::mass2);

// tau <= 0 picks the default threshold: half the smallest true-support
// magnitude of w_star when a support exists, else 10% of max |w_T|.
RecoveryReport recovery_report(const std::vector<double>& w_t, const std::vector<double>& c0,
                               const SignedAlpha& alpha, double eta, double lambda, long iters,
                               double tau = 0.0,
                               ExpectationConvention convention = ExpectationConvention::mass2);

struct CapacityWeights {
    std::vector<double> c_tilde;     // offset-2m layout
    std::vector<int> degenerate;     // support indices whose |w_T| fell under the floor
};

// Second-layer weights alpha_j / w_T[j] on the spectral support (zero where
// alpha vanishes). Dividing by the signed weight makes the paired ReLU units
// reconstruct alpha_j x_j whenever sign(w_T[j]) = sign(w_T[-j]).
CapacityWeights capacity_weights(const SignedAlpha& alpha, const std::vector<double>& w_t,
                                 double floor);

double empirical_risk(const DiagNetParams& params, const EmbeddedDataset& ds);
double empirical_risk(const DiagNetParams& params, const Dataset& data);
double empirical_risk_reg(const DiagNetParams& params, const EmbeddedDataset& ds, double lambda);
double empirical_risk_reg(const DiagNetParams& params, const Dataset& data, double lambda);

double relative_l2(const std::vector<double>& pred, const std::vector<double>& truth);

struct HessianCheck {
    double lambda_max = 0.0;
    double bound = 0.0;
    bool ok = false;
    long iterations = 0;
};

// Largest eigenvalue of the frozen-feature Gram (1/L) sum sigma(w.x) sigma(w.x)'
// by power iteration, compared against 5 m Q1^2.
HessianCheck hessian_sup_check(const DiagNetParams& params, const EmbeddedDataset& ds, double q1);
HessianCheck hessian_sup_check(const DiagNetParams& params, const Dataset& data, double q1);

void write_recovery_csv(std::ostream& os, const RecoveryReport& report);
std::string recovery_json(const RecoveryReport& report);

}  // namespace fdnet
