#include "fdnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "fdnet/csv.hpp"
#include "fdnet/errors.hpp"
#include "fdnet/numeric.hpp"

namespace fdnet {

namespace {

double convention_factor(ExpectationConvention conv) {
    return conv == ExpectationConvention::mass2 ? 0.5 : 0.25;
}

}  // namespace

std::vector<double> limit_feature(const std::vector<double>& c0, const SignedAlpha& alpha,
                                  double eta, double lambda, long iters,
                                  ExpectationConvention convention) {
    if (!(eta > 0.0 && lambda > 0.0 && eta * lambda < 1.0)) {
        throw config_error("limit_feature: need 0 < eta*lambda < 1");
    }
    if (iters < 1) throw config_error("limit_feature: iters must be >= 1");
    if (c0.size() != alpha.values.size()) throw shape_error("limit_feature: dimension mismatch");
    const double geo = (1.0 - std::pow(1.0 - eta * lambda, static_cast<double>(iters))) / lambda;
    const double f = convention_factor(convention);
    std::vector<double> w(c0.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = geo * c0[i] * alpha.values[i] * f;
    return w;
}

RecoveryReport recovery_report(const std::vector<double>& w_t, const std::vector<double>& c0,
                               const SignedAlpha& alpha, double eta, double lambda, long iters,
                               double tau, ExpectationConvention convention) {
    if (w_t.size() != alpha.values.size()) throw shape_error("recovery_report: dimension mismatch");
    const int m = alpha.m;
    const int off = 2 * m;

    RecoveryReport rep;
    rep.w_star = limit_feature(c0, alpha, eta, lambda, iters, convention);

    double linf = 0.0;
    for (std::size_t i = 0; i < w_t.size(); ++i) {
        linf = std::max(linf, std::fabs(w_t[i] - rep.w_star[i]));
    }
    rep.linf_error = linf;

    double alpha_peak = 0.0;
    for (double a : alpha.values) alpha_peak = std::max(alpha_peak, std::fabs(a));
    const double alpha_floor = 1e-12 * alpha_peak;
    double min_support_wstar = 0.0;
    for (int j = -2 * m; j <= 2 * m; ++j) {
        if (j == 0) continue;
        if (std::fabs(alpha.at(j)) > alpha_floor) {
            rep.support_true.push_back(j);
            const double ws = std::fabs(rep.w_star[static_cast<std::size_t>(j + off)]);
            min_support_wstar =
                min_support_wstar == 0.0 ? ws : std::min(min_support_wstar, ws);
        }
    }

    if (tau > 0.0) {
        rep.tau = tau;
    } else if (!rep.support_true.empty() && min_support_wstar > 0.0) {
        rep.tau = 0.5 * min_support_wstar;
    } else {
        rep.tau = 0.1 * linf_norm(w_t);
    }

    for (int j = -2 * m; j <= 2 * m; ++j) {
        if (j == 0) continue;
        if (std::fabs(w_t[static_cast<std::size_t>(j + off)]) > rep.tau) {
            rep.support_found.push_back(j);
        }
    }

    rep.sign_paired = true;
    for (int j : rep.support_true) {
        if (j <= 0) continue;
        const double a = w_t[static_cast<std::size_t>(j + off)];
        const double b = w_t[static_cast<std::size_t>(-j + off)];
        if (sign_of(a) == 0.0 || sign_of(a) != sign_of(b)) {
            rep.sign_paired = false;
            break;
        }
    }

    EmbeddingConfig cfg{m};
    for (int j = -2 * m; j <= 2 * m; ++j) {
        const ModeDescriptor d = mode_of(j, cfg);
        RecoveryReport::ModeRow row;
        row.index = j;
        row.frequency = d.frequency;
        row.kind = mode_kind_char(d.kind);
        row.w_t = w_t[static_cast<std::size_t>(j + off)];
        row.w_star = rep.w_star[static_cast<std::size_t>(j + off)];
        row.in_support_true =
            std::binary_search(rep.support_true.begin(), rep.support_true.end(), j);
        row.in_support_found =
            std::binary_search(rep.support_found.begin(), rep.support_found.end(), j);
        rep.table.push_back(row);
    }
    return rep;
}

CapacityWeights capacity_weights(const SignedAlpha& alpha, const std::vector<double>& w_t,
                                 double floor) {
    if (!(floor > 0.0)) throw config_error("capacity_weights: floor must be positive");
    if (w_t.size() != alpha.values.size()) {
        throw shape_error("capacity_weights: dimension mismatch");
    }
    CapacityWeights out;
    out.c_tilde.assign(w_t.size(), 0.0);
    const int m = alpha.m;
    for (int j = -2 * m; j <= 2 * m; ++j) {
        const std::size_t i = static_cast<std::size_t>(j + 2 * m);
        const double a = alpha.values[i];
        if (a == 0.0) continue;
        if (std::fabs(w_t[i]) < floor) {
            out.degenerate.push_back(j);
            continue;
        }
        out.c_tilde[i] = a / w_t[i];
    }
    return out;
}

double empirical_risk(const DiagNetParams& params, const EmbeddedDataset& ds) {
    if (ds.size() == 0) throw data_error("empirical_risk: empty dataset");
    double acc = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double r = forward_diag_raw(params, ds.row(i)) - ds.data.y[i];
        acc += 0.5 * r * r;
    }
    return acc / static_cast<double>(ds.size());
}

double empirical_risk(const DiagNetParams& params, const Dataset& data) {
    return empirical_risk(params, embed_dataset(data, params.cfg, EmbeddingChoice::symmetrized));
}

double empirical_risk_reg(const DiagNetParams& params, const EmbeddedDataset& ds, double lambda) {
    const double n = l2_norm(params.w);
    return empirical_risk(params, ds) + 0.5 * lambda * n * n;
}

double empirical_risk_reg(const DiagNetParams& params, const Dataset& data, double lambda) {
    const double n = l2_norm(params.w);
    return empirical_risk(params, data) + 0.5 * lambda * n * n;
}

double relative_l2(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw shape_error("relative_l2: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        num += d * d;
        den += truth[i] * truth[i];
    }
    if (!(den > 0.0)) throw std::domain_error("relative_l2: truth has zero norm");
    return std::sqrt(num / den);
}

HessianCheck hessian_sup_check(const DiagNetParams& params, const EmbeddedDataset& ds,
                               double q1) {
    if (ds.size() == 0) throw data_error("hessian_sup_check: empty dataset");
    const std::size_t n = ds.size();
    const std::size_t dim = params.w.size();
    std::vector<double> F(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = ds.row(i);
        for (std::size_t j = 0; j < dim; ++j) {
            F[i * dim + j] = act(params.activation, params.w[j] * x[j]);
        }
    }

    HessianCheck res;
    res.bound = 5.0 * params.cfg.m * q1 * q1;

    std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    std::vector<double> hv(dim);
    std::vector<double> fv(n);
    double lam_prev = 0.0;
    const long max_iter = 10000;
    bool converged = false;
    for (long it = 1; it <= max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) fv[i] = dot(F.data() + i * dim, v.data(), dim);
        std::fill(hv.begin(), hv.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = fv[i] / static_cast<double>(n);
            if (s == 0.0) continue;
            const double* f = F.data() + i * dim;
            for (std::size_t j = 0; j < dim; ++j) hv[j] += s * f[j];
        }
        const double norm = l2_norm(hv);
        res.iterations = it;
        if (norm == 0.0) {  // zero Gram, e.g. w = 0 under the ReLU
            res.lambda_max = 0.0;
            converged = true;
            break;
        }
        double lam = 0.0;
        for (std::size_t j = 0; j < dim; ++j) lam += v[j] * hv[j];
        for (std::size_t j = 0; j < dim; ++j) v[j] = hv[j] / norm;
        if (it > 1 && std::fabs(lam - lam_prev) <= 1e-8 * std::max(1.0, std::fabs(lam))) {
            res.lambda_max = lam;
            converged = true;
            break;
        }
        lam_prev = lam;
    }
    if (!converged) {
        throw numeric_error("hessian_sup_check: power iteration did not converge in 10^4 steps");
    }
    res.ok = res.lambda_max <= res.bound;
    return res;
}

HessianCheck hessian_sup_check(const DiagNetParams& params, const Dataset& data, double q1) {
    return hessian_sup_check(params, embed_dataset(data, params.cfg, EmbeddingChoice::symmetrized),
                             q1);
}

void write_recovery_csv(std::ostream& os, const RecoveryReport& report) {
    os << "index,frequency,kind,w_T,w_star,in_support_true,in_support_found\n";
    for (const auto& r : report.table) {
        os << r.index << ',' << r.frequency << ',' << r.kind << ',' << csv::fmt(r.w_t) << ','
           << csv::fmt(r.w_star) << ',' << (r.in_support_true ? 1 : 0) << ','
           << (r.in_support_found ? 1 : 0) << '\n';
    }
}

std::string recovery_json(const RecoveryReport& report) {
    nlohmann::json j;
    j["linf_error"] = report.linf_error;
    j["tau"] = report.tau;
    j["sign_paired"] = report.sign_paired;
    j["support_true"] = report.support_true;
    j["support_found"] = report.support_found;
    return j.dump(2);
}

}  // namespace fdnet
