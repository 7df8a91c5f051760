#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fdnet {

enum class TrigKind { cosine, sine };

// Scalar link applied pointwise to one sinusoid value in [-1, 1].
enum class LinkKind { scale, cube_of_scaled, tanh_of_scaled, relu, polynomial };

struct LinkTerm {
    TrigKind trig = TrigKind::cosine;
    int frequency = 1;      // units of pi per unit theta
    double phase = 0.0;     // units of theta
    LinkKind link = LinkKind::scale;
    double param = 1.0;     // scale s or sharpness beta, by link kind
    std::vector<double> poly;  // coefficients, constant term first

    double eval(double theta) const;
};

struct TargetSpec {
    std::string name;
    std::vector<LinkTerm> terms;
    double noise_sigma = 0.0;
};

// Affine maps used on CSV ingestion, kept for the inverse transform.
struct RescaleRecord {
    double t_lo = 0.0, t_hi = 0.0;
    double y_lo = 0.0, y_hi = 0.0;
    bool y_scaled = false;
};

struct DatasetMeta {
    std::uint64_t seed = 0;
    double sigma = 0.0;
    std::string source;
    std::optional<RescaleRecord> rescale;
};

struct Dataset {
    std::vector<double> theta;
    std::vector<double> y;
    std::vector<double> y_clean;  // empty when no clean reference exists
    DatasetMeta meta;

    std::size_t size() const { return theta.size(); }
    bool has_clean() const { return !y_clean.empty(); }
};

// Evenly spaced closed grid theta_i = -1 + i * delta; 2/delta must be integral.
std::vector<double> gen_grid(double delta);

double eval_target(const TargetSpec& spec, double theta);
std::vector<double> eval_target_grid(const TargetSpec& spec, const std::vector<double>& grid);

// Clean evaluation plus iid Gaussian noise of spec.noise_sigma, seeded.
Dataset make_dataset(const TargetSpec& spec, const std::vector<double>& grid,
                     std::uint64_t seed);

// CSV with header `t,y`; t is mapped affinely onto [-1, 1], y likewise when
// normalize_values is set. Rows are sorted by t.
Dataset load_series_csv(const std::string& path, bool normalize_values);

// Gaussian corruption of an existing series; the input y becomes y_clean.
Dataset add_noise(const Dataset& base, double sigma, std::uint64_t seed);

// Optional bounded-noise variant: clips the drawn noise at +-4 sigma.
Dataset make_dataset_bounded(const TargetSpec& spec, const std::vector<double>& grid,
                             std::uint64_t seed);

// Var(clean) / sigma^2 on the sample grid.
double dataset_snr(const Dataset& data);

// Built-in regression targets "ex1", "ex2", "ex3".
TargetSpec builtin_target(const std::string& name);

struct Assumption2Report {
    bool index_form_ok = true;   // support indices all of the form 4k+1 / 4k+2
    bool aligned = true;         // no frequency split across its cos and sin slots
    std::vector<int> support;
    std::vector<int> offending_indices;
    std::vector<int> split_frequencies;
    bool ok() const { return index_form_ok && aligned; }
};

// Checks the clean target's quadrature support against the recovery condition.
Assumption2Report check_assumption2(const TargetSpec& spec, int m, double delta = 2e-4);

void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);

}  // namespace fdnet
