#include "fdnet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fdnet/csv.hpp"
#include "fdnet/errors.hpp"
#include "fdnet/numeric.hpp"
#include "fdnet/rng.hpp"
#include "fdnet/spectral.hpp"

namespace fs = std::filesystem;

namespace fdnet {

std::vector<std::string> preset_names() { return {"ex1", "ex2", "ex3", "ex4"}; }

PresetConfig preset_config(const std::string& name, const std::string& data_dir) {
    PresetConfig c;
    c.name = name;
    if (name == "ex1" || name == "ex2") {
        c.models = {"star_diag0", "diag0", "diag1", "standard1"};
    } else if (name == "ex3") {
        // The nonlinear links put harmonics beyond the fundamental band, so
        // this study uses the wider embedding.
        c.m = 128;
        c.models = {"star_diag0", "diag0", "diag1", "diag2",
                    "standard1", "standard2", "standard3"};
    } else if (name == "ex4") {
        c.models = {"star_diag0", "diag0", "diag1", "diag2",
                    "standard1", "standard2", "standard3"};
        c.csv_path = data_dir + "/sp500_trends_16d.csv";
        c.csv_noise = 0.4;
        c.phase2_rule = false;
        c.phase2_eta_prime = 0.05;
    } else {
        throw config_error("unknown preset '" + name + "'");
    }
    return c;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Dataset build_dataset(const PresetConfig& c, std::uint64_t seed) {
    if (!c.csv_path.empty()) {
        Dataset base = load_series_csv(c.csv_path, true);
        return add_noise(base, c.csv_noise, derive_seed(seed, hash_name("dataset")));
    }
    const TargetSpec spec = builtin_target(c.name);
    return make_dataset(spec, gen_grid(c.delta), derive_seed(seed, hash_name("dataset")));
}

long scaled(long iters, double scale) {
    return std::max(1L, static_cast<long>(std::llround(static_cast<double>(iters) / scale)));
}

// Hidden widths per model token; "diagN"/"standardN" with the default width.
std::vector<int> hidden_widths_of(const std::string& model, int n) {
    (void)model;
    return std::vector<int>(static_cast<std::size_t>(n), 64);
}

ModelRunResult run_layerwise(const PresetConfig& c, const EmbeddedDataset& sym,
                             std::uint64_t seed, double scale) {
    ModelRunResult out;
    out.model = "star_diag0";
    out.seed = seed;
    const EmbeddingConfig cfg = sym.cfg;
    const double sqrt_m = std::sqrt(static_cast<double>(cfg.m));

    // Box radii from the clean spectrum oracle when the grid resolves the
    // band, otherwise the plain fallback.
    double q1 = 10.0, q2 = 10.0;
    if (sym.data.has_clean() &&
        sym.size() >= static_cast<std::size_t>(4 * cfg.m + 2)) {
        const SpectrumReport rep = fourier_coeffs(sym.data.y_clean, sym.data.theta, cfg.m);
        double peak = 0.0;
        for (double a : rep.alpha_tilde) peak = std::max(peak, std::fabs(a));
        q1 = c.r_c * peak / (c.lambda * sqrt_m);
        q2 = 8.0 * c.lambda * sqrt_m / (c.r_c * c.r_c);
    }

    DiagNetParams start =
        make_diag_net(cfg, Activation::relu, c.r_c, derive_seed(seed, hash_name("c0")));

    Phase1Config p1;
    p1.eta = c.eta;
    p1.lambda = c.lambda;
    p1.q1 = q1;
    p1.iters = scaled(c.t1, scale);
    p1.batch = std::min<long>(c.lw_batch, static_cast<long>(sym.size()));
    p1.eval_every = 50;
    Phase1Result r1 = train_phase1(sym, start, p1, derive_seed(seed, hash_name("phase1")));

    Phase2Config p2;
    p2.eta_prime = c.phase2_eta_prime;
    p2.iters = scaled(c.t2, scale);
    p2.q2 = q2;
    p2.q1 = q1;
    p2.schedule = c.phase2_rule ? Phase2Schedule::last_iterate_rule : Phase2Schedule::constant;
    p2.batch = p1.batch;
    p2.eval_every = 50;
    Phase2Result r2 = train_phase2(sym, r1.params, p2, derive_seed(seed, hash_name("phase2")));

    // One trace: phase-1 rows then phase-2 rows, iteration numbering continued.
    out.trace = std::move(r1.trace);
    const long t1_len = p1.iters;
    for (TraceRow row : r2.trace.rows) {
        row.iter += t1_len;
        out.trace.rows.push_back(row);
    }
    for (ParamSnapshot snap : r2.trace.snapshots) {
        snap.iter += t1_len;
        out.trace.snapshots.push_back(std::move(snap));
    }
    out.trace.wall_seconds += r2.trace.wall_seconds;

    out.predictions = predict_all(r2.params, sym);
    out.final_loss = empirical_risk(r2.params, sym);
    out.final_rel_l2 = sym.data.has_clean()
                           ? relative_l2(out.predictions, sym.data.y_clean)
                           : kNaN;
    for (int j = -2 * cfg.m; j <= 2 * cfg.m; ++j) {
        out.mode_index.push_back(j);
        out.mode_weight.push_back(std::fabs(r2.params.w_at(j)));
    }
    out.diag_params = std::move(r2.params);
    return out;
}

ModelRunResult run_joint(const PresetConfig& c, const EmbeddedDataset& dbl,
                         const std::string& model, std::uint64_t seed, double scale) {
    ModelRunResult out;
    out.model = model;
    out.seed = seed;
    const bool diag = model.rfind("diag", 0) == 0;
    const int n_dense = model.back() - '0';

    DeepNetParams p = make_deep_net(dbl.cfg, EmbeddingChoice::doubled, diag,
                                    hidden_widths_of(model, n_dense),
                                    derive_seed(seed, hash_name("glorot")));

    JointConfig jc;
    jc.alpha0 = c.alpha0;
    jc.gamma = c.gamma;
    jc.m0 = c.m0;
    jc.batch = std::min<long>(c.batch, static_cast<long>(dbl.size()));
    jc.iters = scaled(c.joint_iters, scale);
    jc.eval_every = 500;
    out.trace = train_joint(p, dbl, jc, derive_seed(seed, hash_name("joint")));

    out.predictions = predict_all(p, dbl);
    double loss = 0.0;
    for (std::size_t i = 0; i < dbl.size(); ++i) {
        const double r = out.predictions[i] - dbl.data.y[i];
        loss += 0.5 * r * r;
    }
    out.final_loss = loss / static_cast<double>(dbl.size());
    out.final_rel_l2 = dbl.data.has_clean()
                           ? relative_l2(out.predictions, dbl.data.y_clean)
                           : kNaN;

    // Mode activation: |diagonal| per slot, or incoming column norms of the
    // first dense layer for the standard nets.
    const int dim = p.embedding_dim();
    for (int i = 0; i < dim; ++i) {
        out.mode_index.push_back(i);
        if (diag) {
            out.mode_weight.push_back(std::fabs(p.diagonal[static_cast<std::size_t>(i)]));
        } else {
            const DenseLayer& l = p.layers.front();
            double s = 0.0;
            for (int r = 0; r < l.out; ++r) {
                const double v = l.weight[static_cast<std::size_t>(r) * l.in + i];
                s += v * v;
            }
            out.mode_weight.push_back(std::sqrt(s));
        }
    }
    return out;
}

void write_model_files(const fs::path& dir, const EmbeddedDataset& ds,
                       const ModelRunResult& r, const EmbeddingConfig& cfg,
                       std::vector<std::string>& files) {
    {
        std::ofstream f(dir / ("trace_" + r.model + ".csv"));
        write_trace_csv(f, r.trace);
        files.push_back("trace_" + r.model + ".csv");
    }
    {
        std::ofstream f(dir / ("pred_" + r.model + ".csv"));
        f << (ds.data.has_clean() ? "theta,y,y_clean,pred\n" : "theta,y,pred\n");
        for (std::size_t i = 0; i < ds.size(); ++i) {
            f << csv::fmt(ds.data.theta[i]) << ',' << csv::fmt(ds.data.y[i]);
            if (ds.data.has_clean()) f << ',' << csv::fmt(ds.data.y_clean[i]);
            f << ',' << csv::fmt(r.predictions[i]) << '\n';
        }
        files.push_back("pred_" + r.model + ".csv");
    }
    {
        std::ofstream f(dir / ("weights_" + r.model + ".csv"));
        f << "index,frequency,kind,value\n";
        const bool sym = r.model == "star_diag0";
        for (std::size_t k = 0; k < r.mode_index.size(); ++k) {
            const int idx = r.mode_index[k];
            const ModeDescriptor d = sym ? mode_of(idx, cfg) : doubled_mode_of(idx, cfg);
            f << idx << ',' << d.frequency << ',' << mode_kind_char(d.kind) << ','
              << csv::fmt(r.mode_weight[k]) << '\n';
        }
        files.push_back("weights_" + r.model + ".csv");
    }
    if (!r.trace.snapshots.empty() && r.model.find("diag") != std::string::npos) {
        std::ofstream f(dir / ("snapshots_" + r.model + ".csv"));
        f << "iteration,slot,value\n";
        for (const ParamSnapshot& s : r.trace.snapshots) {
            for (std::size_t i = 0; i < s.w.size(); ++i) {
                f << s.iter << ',' << i << ',' << csv::fmt(s.w[i]) << '\n';
            }
        }
        files.push_back("snapshots_" + r.model + ".csv");
    }
}

}  // namespace

PresetOutcome run_preset(const PresetOptions& opt) {
    PresetOutcome out;
    out.config = preset_config(opt.preset, opt.data_dir);
    if (opt.m_override > 0) out.config.m = opt.m_override;
    if (!opt.models_override.empty()) out.config.models = opt.models_override;
    if (!(opt.scale > 0.0)) throw config_error("run_preset: scale must be positive");

    const PresetConfig& c = out.config;
    out.dataset = build_dataset(c, opt.seed);
    out.snr = (out.dataset.has_clean() && out.dataset.meta.sigma > 0.0)
                  ? dataset_snr(out.dataset)
                  : kNaN;

    const EmbeddingConfig cfg{c.m};
    bool need_sym = false, need_dbl = false;
    for (const std::string& mname : c.models) {
        (mname == "star_diag0" ? need_sym : need_dbl) = true;
    }
    EmbeddedDataset sym, dbl;
    if (need_sym) sym = embed_dataset(out.dataset, cfg, EmbeddingChoice::symmetrized);
    if (need_dbl) dbl = embed_dataset(out.dataset, cfg, EmbeddingChoice::doubled);

    out.models.resize(c.models.size());
    // Hand the expensive models out first so the worker pool packs well.
    std::vector<std::size_t> queue(c.models.size());
    std::iota(queue.begin(), queue.end(), std::size_t{0});
    auto cost = [&](std::size_t k) {
        const std::string& s = c.models[k];
        if (s == "star_diag0") return 1;
        if (s == "diag0") return 2;
        return 10 + (s.back() - '0');
    };
    std::stable_sort(queue.begin(), queue.end(),
                     [&](std::size_t a, std::size_t b) { return cost(a) > cost(b); });

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t q = next.fetch_add(1);
            if (q >= queue.size()) break;
            const std::size_t k = queue[q];
            const std::string& mname = c.models[k];
            const std::uint64_t run_seed = derive_seed(opt.seed, hash_name(mname.c_str()));
            out.models[k] = mname == "star_diag0"
                                ? run_layerwise(c, sym, run_seed, opt.scale)
                                : run_joint(c, dbl, mname, run_seed, opt.scale);
        }
    };
    const int nw = std::max(1, std::min<int>(opt.workers, static_cast<int>(c.models.size())));
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    if (!opt.out_dir.empty()) {
        const fs::path dir(opt.out_dir);
        fs::create_directories(dir);
        {
            std::ofstream f(dir / "dataset.csv");
            write_dataset_csv(f, out.dataset);
            out.files.push_back("dataset.csv");
        }
        const EmbeddedDataset& ref = need_dbl ? dbl : sym;
        for (const ModelRunResult& r : out.models) {
            write_model_files(dir, ref, r, cfg, out.files);
        }
        std::sort(out.files.begin(), out.files.end());
        write_manifest(opt.out_dir, manifest_json(opt, out));
        out.files.push_back("manifest.json");
    }
    return out;
}

std::map<std::string, std::string> read_kv_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
        std::size_t start = line.find_first_not_of(' ');
        if (start == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw parse_error("expected key=value", line_no);
        std::string key = line.substr(start, eq - start);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        std::string val = line.substr(eq + 1);
        const auto vs = val.find_first_not_of(' ');
        val = vs == std::string::npos ? "" : val.substr(vs);
        kv[key] = val;
    }
    return kv;
}

void write_manifest(const std::string& dir, const std::string& json_text) {
    const fs::path tmp = fs::path(dir) / "manifest.json.tmp";
    const fs::path dst = fs::path(dir) / "manifest.json";
    {
        std::ofstream f(tmp);
        if (!f) throw data_error("cannot write " + tmp.string());
        f << json_text << '\n';
    }
    fs::rename(tmp, dst);
}

std::string manifest_json(const PresetOptions& opt, const PresetOutcome& out) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["command"] = "reproduce";
    j["config"] = {{"preset", opt.preset},
                   {"m", out.config.m},
                   {"seed", opt.seed},
                   {"scale", opt.scale},
                   {"workers", opt.workers},
                   {"alpha0", out.config.alpha0},
                   {"gamma", out.config.gamma},
                   {"m0", out.config.m0},
                   {"batch", out.config.batch},
                   {"joint_iters_paper", out.config.joint_iters},
                   {"eta", out.config.eta},
                   {"lambda", out.config.lambda},
                   {"t1_paper", out.config.t1},
                   {"t2_paper", out.config.t2},
                   {"r_c", out.config.r_c}};
    j["dataset"] = {{"source", out.dataset.meta.source},
                    {"sigma", out.dataset.meta.sigma},
                    {"seed", out.dataset.meta.seed},
                    {"points", out.dataset.size()}};
    if (std::isfinite(out.snr)) j["dataset"]["snr"] = out.snr;
    j["models"] = nlohmann::json::array();
    for (const ModelRunResult& r : out.models) {
        nlohmann::json m;
        m["name"] = r.model;
        m["seed"] = r.seed;
        m["final_loss"] = r.final_loss;
        if (std::isfinite(r.final_rel_l2)) m["final_rel_l2"] = r.final_rel_l2;
        m["iterations"] = r.trace.rows.empty() ? 0 : r.trace.rows.back().iter;
        m["wall_seconds"] = r.trace.wall_seconds;
        j["models"].push_back(m);
    }
    j["files"] = out.files;
    return j.dump(2);
}

}  // namespace fdnet
