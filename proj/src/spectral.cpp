#include "fdnet/spectral.hpp"

#include <cmath>
#include <cstdlib>
#include <ostream>
#include <string>

#include "fdnet/csv.hpp"
#include "fdnet/errors.hpp"
#include "fdnet/numeric.hpp"

namespace fdnet {

double relu_cheb_coeff(int i) {
    if (i < 0) throw std::domain_error("relu_cheb_coeff: order must be nonnegative");
    if (i == 0) return 1.0 / kPi;
    if (i == 1) return 0.5;
    if (i % 2 == 1) return 0.0;  // odd harmonics vanish from i = 3 on
    const double sgn = (i % 4 == 0) ? 1.0 : -1.0;  // cos(i pi / 2) for even i
    return (2.0 / kPi) * sgn / (1.0 - static_cast<double>(i) * static_cast<double>(i));
}

double chebyshev_T(int n, double w) {
    if (n < 0) throw std::domain_error("chebyshev_T: order must be nonnegative");
    if (!(w >= -1.0 && w <= 1.0)) {
        throw std::domain_error("chebyshev_T: argument must lie in [-1, 1], got " +
                                std::to_string(w));
    }
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = w;
    for (int k = 2; k <= n; ++k) {
        const double next = 2.0 * w * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double trapezoid(const std::vector<double>& f, double delta) {
    if (f.size() < 2) throw shape_error("trapezoid: need at least two samples");
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * delta;
}

double check_uniform_closed_grid(const std::vector<double>& grid) {
    if (grid.size() < 2) throw shape_error("grid: need at least two points");
    if (std::fabs(grid.front() + 1.0) > 1e-12 || std::fabs(grid.back() - 1.0) > 1e-12) {
        throw config_error("grid: endpoints must be -1 and 1");
    }
    const double delta = 2.0 / static_cast<double>(grid.size() - 1);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (std::fabs(grid[i] - grid[i - 1] - delta) > 1e-9) {
            throw config_error("grid: spacing is not uniform");
        }
    }
    return delta;
}

SpectrumReport fourier_coeffs(const std::vector<double>& f_on_grid,
                              const std::vector<double>& grid, int m,
                              double support_rel_threshold) {
    if (m < 1) throw config_error("fourier_coeffs: m must be >= 1");
    if (f_on_grid.size() != grid.size()) {
        throw shape_error("fourier_coeffs: sample and grid lengths differ");
    }
    const double delta = check_uniform_closed_grid(grid);
    const std::size_t n = grid.size();
    if (n < static_cast<std::size_t>(4 * m + 2)) {
        throw resolution_error("fourier_coeffs: grid too coarse for band m=" + std::to_string(m) +
                               " (need at least " + std::to_string(4 * m + 2) + " samples)");
    }

    // Trapezoid weights: delta everywhere, halved at the two endpoints.
    auto weight = [&](std::size_t i) {
        return (i == 0 || i + 1 == n) ? 0.5 * delta : delta;
    };

    SpectrumReport rep;
    rep.m = m;
    rep.alpha_tilde.assign(static_cast<std::size_t>(2 * m + 1), 0.0);

    double mass = 0.0;
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wt = weight(i);
        mass += wt * f_on_grid[i];
        energy += wt * f_on_grid[i] * f_on_grid[i];
    }
    rep.alpha_tilde[0] = 0.5 * mass;

    for (int k = 1; k <= m; ++k) {
        double ac = 0.0;
        double as = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double wt = weight(i) * f_on_grid[i];
            ac += wt * std::cos(kPi * k * grid[i]);
            as += wt * std::sin(kPi * k * grid[i]);
        }
        rep.alpha_tilde[static_cast<std::size_t>(2 * k - 1)] = ac;
        rep.alpha_tilde[static_cast<std::size_t>(2 * k)] = as;
    }

    double peak = 0.0;
    for (double a : rep.alpha_tilde) peak = std::max(peak, std::fabs(a));
    rep.threshold = support_rel_threshold * peak;
    for (int l = 1; l <= 2 * m; ++l) {
        if (std::fabs(rep.alpha_tilde[static_cast<std::size_t>(l)]) > rep.threshold) {
            rep.support.push_back(l);
        }
    }

    // In-band energy: the constant mode has squared norm 2, the rest 1.
    double band = 2.0 * rep.alpha_tilde[0] * rep.alpha_tilde[0];
    for (int l = 1; l <= 2 * m; ++l) {
        const double a = rep.alpha_tilde[static_cast<std::size_t>(l)];
        band += a * a;
    }
    rep.residual_l2 = std::sqrt(std::max(0.0, energy - band));
    return rep;
}

SignedAlpha signed_alpha(const SpectrumReport& report, bool restrict_to_support) {
    SignedAlpha out;
    out.m = report.m;
    out.values.assign(static_cast<std::size_t>(4 * report.m + 1), 0.0);
    std::vector<char> keep(report.alpha_tilde.size(), restrict_to_support ? 0 : 1);
    if (restrict_to_support) {
        keep[0] = std::fabs(report.alpha_tilde[0]) > report.threshold ? 1 : 0;
        for (int l : report.support) keep[static_cast<std::size_t>(l)] = 1;
    }
    for (int l = 0; l <= 2 * report.m; ++l) {
        if (!keep[static_cast<std::size_t>(l)]) continue;
        const double a = report.alpha_tilde[static_cast<std::size_t>(l)];
        out.at(l) = a;
        if (l >= 1) out.at(-l) = -a;
    }
    return out;
}

namespace {

// x_j(theta) for j != 0 straight from the index convention.
double mode_value(int j, double theta) {
    const int a = std::abs(j);
    const int freq = (a + 1) / 2;
    const double v = (a % 2 == 1) ? std::cos(kPi * freq * theta) : std::sin(kPi * freq * theta);
    return j > 0 ? v : -v;
}

void check_lemma_args(const SignedAlpha& alpha, int j, int s, const EmbeddingConfig& cfg) {
    cfg.validate();
    if (j == 0) throw std::invalid_argument("lemma_expectation: index 0 is not a valid mode");
    if (std::abs(j) > 2 * cfg.m) {
        throw std::out_of_range("lemma_expectation: |j| exceeds 2m");
    }
    if (s != 1 && s != -1) throw std::invalid_argument("lemma_expectation: sign must be +-1");
    if (alpha.m != cfg.m) throw shape_error("lemma_expectation: alpha band does not match cfg");
}

// Band-limited synthesis sum_{l=0}^{2m} alpha_tilde[l] x_l(theta) on the grid.
std::vector<double> synth_from_alpha(const SignedAlpha& alpha, const std::vector<double>& grid) {
    std::vector<double> y(grid.size(), alpha.at(0));
    for (int k = 1; k <= alpha.m; ++k) {
        const double ac = alpha.at(2 * k - 1);
        const double as = alpha.at(2 * k);
        if (ac == 0.0 && as == 0.0) continue;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            y[i] += ac * std::cos(kPi * k * grid[i]) + as * std::sin(kPi * k * grid[i]);
        }
    }
    return y;
}

}  // namespace

double lemma_expectation(const SignedAlpha& alpha, int j, int s,
                         const std::vector<double>& grid, const EmbeddingConfig& cfg) {
    check_lemma_args(alpha, j, s, cfg);
    const double delta = check_uniform_closed_grid(grid);
    const std::vector<double> y = synth_from_alpha(alpha, grid);
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = s * mode_value(j, grid[i]);
        f[i] = y[i] * (u > 0.0 ? u : 0.0);
    }
    return trapezoid(f, delta);
}

std::vector<LemmaCheck> lemma_scan(const SignedAlpha& alpha, const std::vector<double>& grid,
                                   const EmbeddingConfig& cfg) {
    cfg.validate();
    if (alpha.m != cfg.m) throw shape_error("lemma_scan: alpha band does not match cfg");
    const double delta = check_uniform_closed_grid(grid);
    const std::size_t n = grid.size();
    const std::vector<double> y = synth_from_alpha(alpha, grid);

    std::vector<LemmaCheck> out;
    out.reserve(static_cast<std::size_t>(4 * 2 * cfg.m));
    std::vector<double> xj(n);
    for (int j = -2 * cfg.m; j <= 2 * cfg.m; ++j) {
        if (j == 0) continue;
        for (std::size_t i = 0; i < n; ++i) xj[i] = mode_value(j, grid[i]);
        for (int s : {1, -1}) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double u = s * xj[i];
                if (u > 0.0) {
                    const double wt = (i == 0 || i + 1 == n) ? 0.5 * delta : delta;
                    acc += wt * y[i] * u;
                }
            }
            out.push_back({j, s, acc, 0.5 * s * alpha.at(j)});
        }
    }
    return out;
}

void write_spectrum_csv(std::ostream& os, const SpectrumReport& report) {
    EmbeddingConfig cfg{report.m};
    os << "index,frequency,kind,coefficient\n";
    for (int l = 0; l <= 2 * report.m; ++l) {
        const ModeDescriptor d = mode_of(l, cfg);
        os << l << ',' << d.frequency << ',' << mode_kind_char(d.kind) << ','
           << csv::fmt(report.alpha_tilde[static_cast<std::size_t>(l)]) << '\n';
    }
}

}  // namespace fdnet
