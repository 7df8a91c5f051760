#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdnet/model.hpp"
#include "fdnet/train.hpp"

namespace fdnet {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;  // measured quantity, suite-specific
    double limit = 0.0;
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    std::vector<CheckResult> checks;
    bool passed() const {
        for (const auto& c : checks) {
            if (!c.passed) return false;
        }
        return true;
    }
};

// Central finite differences against the analytic gradients, kinks excluded.
struct FdReport {
    double max_rel_err = 0.0;
    long checked = 0;
    long skipped = 0;
};

FdReport fd_check_diag(const DiagNetParams& params, double theta, double y,
                       double h = 1e-5, double kink_tol = 1e-4);
FdReport fd_check_deep(const DeepNetParams& params, double theta, double y, double h = 1e-5);

// Named suites: embedding, spectral, gradients, lemma, feature, hessian.
SuiteResult verify_suite(const std::string& name);
std::vector<SuiteResult> verify_all();
std::vector<std::string> verify_suite_names();

std::string suites_json(const std::vector<SuiteResult>& suites);

}  // namespace fdnet
