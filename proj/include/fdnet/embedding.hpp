#pragma once

#include <vector>

namespace fdnet {

// Band limit of the sinusoidal input features. Frequencies run 1..m in units
// of pi radians per unit theta.
struct EmbeddingConfig {
    int m = 1;

    int dim_sym() const { return 4 * m + 1; }
    int dim_doubled() const { return 2 * (2 * m + 1); }

    void validate() const;  // throws config_error when m < 1
};

// One symmetrized embedding sample, indexed j in {-2m..2m}:
//   at(0) == 1,  at(2i-1) == cos(pi i theta),  at(2i) == sin(pi i theta),
//   at(-j) == -at(j).
// Stored flat with offset 2m so index -2m lands in slot 0.
struct FourierVector {
    int m = 0;
    std::vector<double> values;

    double at(int j) const { return values[static_cast<std::size_t>(j + 2 * m)]; }
    int max_index() const { return 2 * m; }
    int dim() const { return static_cast<int>(values.size()); }
};

enum class ModeKind { constant, cosine, sine };

struct ModeDescriptor {
    int index = 0;
    int frequency = 0;
    ModeKind kind = ModeKind::constant;
    int sign = 1;
};

FourierVector embed_sym(double theta, const EmbeddingConfig& cfg);

// Stacked embedding [half; -half] with
//   half = [1, sin(pi theta), cos(pi theta), ..., sin(m pi theta), cos(m pi theta)],
// length 2(2m+1). Gives every mode both signs under a ReLU.
std::vector<double> embed_doubled(double theta, const EmbeddingConfig& cfg);

ModeDescriptor mode_of(int index, const EmbeddingConfig& cfg);
int index_of(const ModeDescriptor& mode);

// Mode labels for the doubled layout, slot i in [0, 2(2m+1)).
ModeDescriptor doubled_mode_of(int slot, const EmbeddingConfig& cfg);

char mode_kind_char(ModeKind k);  // '1', 'c' or 's'

// Row-major [grid.size() x dim] matrices of the embeddings over a grid.
std::vector<double> embed_grid_sym(const std::vector<double>& grid, const EmbeddingConfig& cfg);
std::vector<double> embed_grid_doubled(const std::vector<double>& grid, const EmbeddingConfig& cfg);

}  // namespace fdnet
