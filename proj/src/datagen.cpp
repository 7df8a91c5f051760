#include "fdnet/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fdnet/csv.hpp"
#include "fdnet/errors.hpp"
#include "fdnet/numeric.hpp"
#include "fdnet/rng.hpp"
#include "fdnet/spectral.hpp"

namespace fdnet {

double LinkTerm::eval(double theta) const {
    const double arg = kPi * frequency * (theta - phase);
    const double v = trig == TrigKind::cosine ? std::cos(arg) : std::sin(arg);
    switch (link) {
        case LinkKind::scale:
            return param * v;
        case LinkKind::cube_of_scaled: {
            const double u = param * v;
            return u * u * u;
        }
        case LinkKind::tanh_of_scaled:
            return std::tanh(param * v);
        case LinkKind::relu:
            return v > 0.0 ? v : 0.0;
        case LinkKind::polynomial: {
            double acc = 0.0;
            for (std::size_t k = poly.size(); k > 0; --k) acc = acc * v + poly[k - 1];
            return acc;
        }
    }
    return 0.0;
}

std::vector<double> gen_grid(double delta) {
    if (!(delta > 0.0)) throw config_error("grid: delta must be positive");
    const double steps = 2.0 / delta;
    const long n = std::lround(steps);
    if (n < 1 || std::fabs(steps - static_cast<double>(n)) > 1e-9 * std::max(1.0, steps)) {
        throw config_error("grid: 2/delta must be an integer, got delta=" + std::to_string(delta));
    }
    std::vector<double> grid(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i <= n; ++i) grid[static_cast<std::size_t>(i)] = -1.0 + delta * i;
    grid.back() = 1.0;
    return grid;
}

double eval_target(const TargetSpec& spec, double theta) {
    double acc = 0.0;
    for (const LinkTerm& t : spec.terms) acc += t.eval(theta);
    return acc;
}

std::vector<double> eval_target_grid(const TargetSpec& spec, const std::vector<double>& grid) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = eval_target(spec, grid[i]);
    return out;
}

namespace {

Dataset corrupt(std::vector<double> theta, std::vector<double> clean, double sigma,
                std::uint64_t seed, const std::string& source, bool clip4) {
    Dataset d;
    d.theta = std::move(theta);
    d.y_clean = std::move(clean);
    d.y = d.y_clean;
    Rng rng(seed);
    if (sigma > 0.0) {
        for (double& v : d.y) {
            double z = sigma * rng.normal();
            if (clip4) z = std::clamp(z, -4.0 * sigma, 4.0 * sigma);
            v += z;
        }
    }
    d.meta.seed = seed;
    d.meta.sigma = sigma;
    d.meta.source = source;
    return d;
}

}  // namespace

Dataset make_dataset(const TargetSpec& spec, const std::vector<double>& grid,
                     std::uint64_t seed) {
    return corrupt(grid, eval_target_grid(spec, grid), spec.noise_sigma, seed,
                   "synthetic:" + (spec.name.empty() ? std::string("target") : spec.name),
                   false);
}

Dataset make_dataset_bounded(const TargetSpec& spec, const std::vector<double>& grid,
                             std::uint64_t seed) {
    return corrupt(grid, eval_target_grid(spec, grid), spec.noise_sigma, seed,
                   "synthetic-bounded:" + spec.name, true);
}

Dataset add_noise(const Dataset& base, double sigma, std::uint64_t seed) {
    Dataset d = corrupt(base.theta, base.y, sigma, seed, base.meta.source + "+noise", false);
    d.meta.rescale = base.meta.rescale;
    return d;
}

double dataset_snr(const Dataset& data) {
    if (!data.has_clean()) throw data_error("snr: dataset has no clean reference");
    if (data.meta.sigma <= 0.0) throw data_error("snr: dataset is noiseless");
    return variance(data.y_clean) / (data.meta.sigma * data.meta.sigma);
}

Dataset load_series_csv(const std::string& path, bool normalize_values) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        // Trim trailing CR from DOS files.
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            std::string h = line;
            h.erase(std::remove_if(h.begin(), h.end(), [](char c) { return c == ' '; }), h.end());
            if (h != "t,y") throw parse_error("expected header 't,y', got '" + line + "'", line_no);
            continue;
        }
        std::istringstream ss(line);
        std::string ta, ya, extra;
        if (!std::getline(ss, ta, ',') || !std::getline(ss, ya, ',')) {
            throw parse_error("expected two comma-separated values", line_no);
        }
        if (std::getline(ss, extra, ',') && !extra.empty()) {
            throw parse_error("unexpected extra column", line_no);
        }
        try {
            std::size_t pos = 0;
            const double t = std::stod(ta, &pos);
            if (pos != ta.size()) throw std::invalid_argument(ta);
            const double y = std::stod(ya, &pos);
            if (pos != ya.size()) throw std::invalid_argument(ya);
            rows.emplace_back(t, y);
        } catch (const std::logic_error&) {
            throw parse_error("non-numeric value in '" + line + "'", line_no);
        }
    }
    if (rows.size() < 2) throw std::domain_error("series: need at least two data points");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    RescaleRecord rec;
    rec.t_lo = rows.front().first;
    rec.t_hi = rows.back().first;
    if (!(rec.t_hi > rec.t_lo)) throw std::domain_error("series: time span is degenerate");

    Dataset d;
    d.theta.reserve(rows.size());
    d.y.reserve(rows.size());
    for (const auto& [t, y] : rows) {
        d.theta.push_back(-1.0 + 2.0 * (t - rec.t_lo) / (rec.t_hi - rec.t_lo));
        d.y.push_back(y);
    }
    if (normalize_values) {
        const auto [lo, hi] = std::minmax_element(d.y.begin(), d.y.end());
        rec.y_lo = *lo;
        rec.y_hi = *hi;
        if (!(rec.y_hi > rec.y_lo)) throw std::domain_error("series: constant values cannot be normalized");
        rec.y_scaled = true;
        for (double& v : d.y) v = -1.0 + 2.0 * (v - rec.y_lo) / (rec.y_hi - rec.y_lo);
    }
    d.meta.source = "csv:" + path;
    d.meta.rescale = rec;
    return d;
}

TargetSpec builtin_target(const std::string& name) {
    TargetSpec s;
    s.name = name;
    s.noise_sigma = 0.4;
    if (name == "ex1") {
        s.terms = {{TrigKind::cosine, 5, 0.0, LinkKind::scale, 0.5, {}},
                   {TrigKind::cosine, 29, 0.0, LinkKind::scale, 0.8, {}},
                   {TrigKind::sine, 61, 0.0, LinkKind::scale, 0.3, {}}};
    } else if (name == "ex2") {
        s.terms = {{TrigKind::cosine, 5, 0.2, LinkKind::scale, 0.5, {}},
                   {TrigKind::cosine, 29, -0.1, LinkKind::scale, 0.8, {}},
                   {TrigKind::sine, 61, 0.3, LinkKind::scale, 0.3, {}}};
    } else if (name == "ex3") {
        s.terms = {{TrigKind::cosine, 5, 0.0, LinkKind::cube_of_scaled, 0.5, {}},
                   {TrigKind::cosine, 29, 0.0, LinkKind::tanh_of_scaled, 10.0, {}},
                   {TrigKind::sine, 61, 0.0, LinkKind::relu, 1.0, {}}};
    } else {
        throw config_error("unknown built-in target '" + name + "'");
    }
    return s;
}

Assumption2Report check_assumption2(const TargetSpec& spec, int m, double delta) {
    const std::vector<double> grid = gen_grid(delta);
    const std::vector<double> clean = eval_target_grid(spec, grid);
    const SpectrumReport rep = fourier_coeffs(clean, grid, m);

    Assumption2Report out;
    out.support = rep.support;
    std::vector<char> has_cos(static_cast<std::size_t>(m) + 1, 0);
    std::vector<char> has_sin(static_cast<std::size_t>(m) + 1, 0);
    for (int l : rep.support) {
        const int r = l % 4;
        if (r != 1 && r != 2) {
            out.index_form_ok = false;
            out.offending_indices.push_back(l);
        }
        const int freq = (l + 1) / 2;
        if (l % 2 == 1) has_cos[static_cast<std::size_t>(freq)] = 1;
        else has_sin[static_cast<std::size_t>(freq)] = 1;
    }
    for (int k = 1; k <= m; ++k) {
        if (has_cos[static_cast<std::size_t>(k)] && has_sin[static_cast<std::size_t>(k)]) {
            out.aligned = false;
            out.split_frequencies.push_back(k);
        }
    }
    return out;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    const bool clean = data.has_clean();
    os << (clean ? "theta,y,y_clean\n" : "theta,y\n");
    for (std::size_t i = 0; i < data.size(); ++i) {
        os << csv::fmt(data.theta[i]) << ',' << csv::fmt(data.y[i]);
        if (clean) os << ',' << csv::fmt(data.y_clean[i]);
        os << '\n';
    }
}

Dataset read_dataset_csv(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    Dataset d;
    bool has_clean = false;
    while (std::getline(is, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line == "theta,y,y_clean") has_clean = true;
            else if (line != "theta,y") throw parse_error("bad dataset header '" + line + "'", line_no);
            continue;
        }
        std::istringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) {
            throw parse_error("expected at least two columns", line_no);
        }
        try {
            d.theta.push_back(std::stod(a));
            d.y.push_back(std::stod(b));
            if (has_clean) {
                if (!std::getline(ss, c, ',')) throw parse_error("missing y_clean column", line_no);
                d.y_clean.push_back(std::stod(c));
            }
        } catch (const std::logic_error&) {
            throw parse_error("non-numeric value in '" + line + "'", line_no);
        }
    }
    if (d.size() == 0) throw data_error("dataset csv: no rows");
    d.meta.source = "csv-stream";
    return d;
}

}  // namespace fdnet
