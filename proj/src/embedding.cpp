#include "fdnet/embedding.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "fdnet/errors.hpp"
#include "fdnet/numeric.hpp"

namespace fdnet {

void EmbeddingConfig::validate() const {
    if (m < 1) {
        throw config_error("embedding: band limit m must be >= 1, got " + std::to_string(m));
    }
}

namespace {

void check_theta(double theta) {
    if (!(theta >= -1.0 && theta <= 1.0)) {
        throw std::domain_error("embedding: theta must lie in [-1, 1], got " +
                                std::to_string(theta));
    }
}

}  // namespace

FourierVector embed_sym(double theta, const EmbeddingConfig& cfg) {
    cfg.validate();
    check_theta(theta);
    FourierVector out;
    out.m = cfg.m;
    out.values.assign(static_cast<std::size_t>(cfg.dim_sym()), 0.0);
    const int off = 2 * cfg.m;
    out.values[static_cast<std::size_t>(off)] = 1.0;
    for (int i = 1; i <= cfg.m; ++i) {
        const double c = std::cos(kPi * i * theta);
        const double s = std::sin(kPi * i * theta);
        out.values[static_cast<std::size_t>(off + 2 * i - 1)] = c;
        out.values[static_cast<std::size_t>(off + 2 * i)] = s;
        // Negated copies; exact so the antisymmetry holds bit for bit.
        out.values[static_cast<std::size_t>(off - (2 * i - 1))] = -c;
        out.values[static_cast<std::size_t>(off - 2 * i)] = -s;
    }
    return out;
}

std::vector<double> embed_doubled(double theta, const EmbeddingConfig& cfg) {
    cfg.validate();
    check_theta(theta);
    const int half = 2 * cfg.m + 1;
    std::vector<double> out(static_cast<std::size_t>(2 * half), 0.0);
    out[0] = 1.0;
    for (int i = 1; i <= cfg.m; ++i) {
        out[static_cast<std::size_t>(2 * i - 1)] = std::sin(kPi * i * theta);
        out[static_cast<std::size_t>(2 * i)] = std::cos(kPi * i * theta);
    }
    for (int i = 0; i < half; ++i) {
        out[static_cast<std::size_t>(half + i)] = -out[static_cast<std::size_t>(i)];
    }
    return out;
}

ModeDescriptor mode_of(int index, const EmbeddingConfig& cfg) {
    cfg.validate();
    if (std::abs(index) > 2 * cfg.m) {
        throw std::out_of_range("mode_of: |index| exceeds 2m, index=" + std::to_string(index) +
                                " m=" + std::to_string(cfg.m));
    }
    ModeDescriptor d;
    d.index = index;
    if (index == 0) return d;
    const int a = std::abs(index);
    d.frequency = (a + 1) / 2;
    d.kind = (a % 2 == 1) ? ModeKind::cosine : ModeKind::sine;
    d.sign = index > 0 ? 1 : -1;
    return d;
}

int index_of(const ModeDescriptor& mode) {
    if (mode.kind == ModeKind::constant) return 0;
    const int a = mode.kind == ModeKind::cosine ? 2 * mode.frequency - 1 : 2 * mode.frequency;
    return mode.sign >= 0 ? a : -a;
}

ModeDescriptor doubled_mode_of(int slot, const EmbeddingConfig& cfg) {
    cfg.validate();
    const int half = 2 * cfg.m + 1;
    if (slot < 0 || slot >= 2 * half) {
        throw std::out_of_range("doubled_mode_of: slot out of range");
    }
    ModeDescriptor d;
    d.index = slot;
    d.sign = slot < half ? 1 : -1;
    const int i = slot % half;
    if (i == 0) return d;
    d.frequency = (i + 1) / 2;
    d.kind = (i % 2 == 1) ? ModeKind::sine : ModeKind::cosine;
    return d;
}

char mode_kind_char(ModeKind k) {
    switch (k) {
        case ModeKind::constant: return '1';
        case ModeKind::cosine: return 'c';
        case ModeKind::sine: return 's';
    }
    return '?';
}

std::vector<double> embed_grid_sym(const std::vector<double>& grid, const EmbeddingConfig& cfg) {
    cfg.validate();
    const std::size_t dim = static_cast<std::size_t>(cfg.dim_sym());
    std::vector<double> out(grid.size() * dim);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const FourierVector v = embed_sym(grid[i], cfg);
        std::copy(v.values.begin(), v.values.end(), out.begin() + static_cast<long>(i * dim));
    }
    return out;
}

std::vector<double> embed_grid_doubled(const std::vector<double>& grid,
                                       const EmbeddingConfig& cfg) {
    cfg.validate();
    const std::size_t dim = static_cast<std::size_t>(cfg.dim_doubled());
    std::vector<double> out(grid.size() * dim);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::vector<double> v = embed_doubled(grid[i], cfg);
        std::copy(v.begin(), v.end(), out.begin() + static_cast<long>(i * dim));
    }
    return out;
}

}  // namespace fdnet
