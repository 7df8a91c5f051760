#pragma once

#include <iosfwd>
#include <vector>

#include "fdnet/embedding.hpp"

namespace fdnet {

// Sine-cosine series coefficients of a sampled function, mass-2 inner
// product: alpha_tilde[2k-1] = int_{-1}^{1} f cos(pi k theta) dtheta and
// alpha_tilde[2k] the sine analogue, so a pure amplitude-A mode reports A.
// alpha_tilde[0] = (1/2) int f.
struct SpectrumReport {
    int m = 0;
    std::vector<double> alpha_tilde;  // length 2m+1, index l in [0, 2m]
    std::vector<int> support;         // indices in [1, 2m] with |alpha| above threshold
    double residual_l2 = 0.0;         // energy outside the band, sqrt scale
    double threshold = 0.0;
};

// Coefficients mirrored to negative indices: values[j] = alpha_tilde[j] for
// j >= 0 and values[j] = -alpha_tilde[-j] for j < 0. Offset storage as in
// FourierVector.
struct SignedAlpha {
    int m = 0;
    std::vector<double> values;  // length 4m+1

    double at(int j) const { return values[static_cast<std::size_t>(j + 2 * m)]; }
    double& at(int j) { return values[static_cast<std::size_t>(j + 2 * m)]; }
};

// Chebyshev coefficients of the ReLU composed with a unit cosine:
// relu(cos t) = sum_i p_i cos(i t). Closed form; exact zero for odd i >= 3.
double relu_cheb_coeff(int i);

// First-kind Chebyshev polynomial by the three-term recurrence; |w| <= 1.
double chebyshev_T(int n, double w);

// Composite trapezoid rule over an evenly spaced closed grid.
double trapezoid(const std::vector<double>& f, double delta);

// Validates an evenly spaced closed grid on [-1, 1] and returns its spacing.
double check_uniform_closed_grid(const std::vector<double>& grid);

SpectrumReport fourier_coeffs(const std::vector<double>& f_on_grid,
                              const std::vector<double>& grid, int m,
                              double support_rel_threshold = 1e-3);

// restrict_to_support zeroes every coefficient with index >= 1 that did not
// clear the report threshold (index 0 is kept as estimated).
SignedAlpha signed_alpha(const SpectrumReport& report, bool restrict_to_support = false);

// Quadrature of sum_l alpha_tilde[l] * int x_l(theta) relu(s x_j(theta)) dtheta
// (mass-2). Under the 4k+1 / 4k+2 support condition this equals
// s * values[j] / 2 with the SignedAlpha convention for negative j.
double lemma_expectation(const SignedAlpha& alpha, int j, int s,
                         const std::vector<double>& grid, const EmbeddingConfig& cfg);

struct LemmaCheck {
    int j = 0;
    int s = 1;
    double value = 0.0;
    double expected = 0.0;  // s * values[j] / 2
};

// Every |j| <= 2m, both signs, sharing one pass over the grid.
std::vector<LemmaCheck> lemma_scan(const SignedAlpha& alpha, const std::vector<double>& grid,
                                   const EmbeddingConfig& cfg);

// CSV with columns index,frequency,kind,coefficient.
void write_spectrum_csv(std::ostream& os, const SpectrumReport& report);

}  // namespace fdnet
