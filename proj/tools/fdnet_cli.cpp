// Command-line front end: dataset generation, layer-wise and joint training,
// spectrum reports, verification suites and the preset experiment runner.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdnet/analysis.hpp"
#include "fdnet/csv.hpp"
#include "fdnet/datagen.hpp"
#include "fdnet/errors.hpp"
#include "fdnet/experiment.hpp"
#include "fdnet/model.hpp"
#include "fdnet/numeric.hpp"
#include "fdnet/rng.hpp"
#include "fdnet/spectral.hpp"
#include "fdnet/train.hpp"
#include "fdnet/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOptions {
    std::string mode;
    std::string target = "ex1";     // built-in name or CSV path
    std::string preset = "ex1";
    std::string model = "diag0";
    std::string suite = "all";
    std::string out = "out";
    std::string data_dir = "data";
    std::string checkpoint;
    int m = 64;
    std::uint64_t seed = 1;
    double scale = 10.0;
    double delta = 2e-4;
    double sigma = -1.0;            // <0: target default
    bool normalize = true;          // rescale CSV values onto [-1, 1]
    int workers = 2;
    // layer-wise knobs
    double eta = 0.01, lambda = 0.1;
    long t1 = 2000, t2 = 4000, batch = 256;
    // joint knobs
    double alpha0 = 2e-3, gamma = 0.95, m0 = 5e4;
    long joint_iters = 5000, joint_batch = 201;
};

bool is_builtin(const std::string& name) {
    return name == "ex1" || name == "ex2" || name == "ex3";
}

fdnet::Dataset load_input(const CliOptions& opt) {
    if (is_builtin(opt.target)) {
        fdnet::TargetSpec spec = fdnet::builtin_target(opt.target);
        if (opt.sigma >= 0.0) spec.noise_sigma = opt.sigma;
        return fdnet::make_dataset(spec, fdnet::gen_grid(opt.delta),
                                   fdnet::derive_seed(opt.seed, fdnet::hash_name("dataset")));
    }
    fdnet::Dataset base = fdnet::load_series_csv(opt.target, opt.normalize);
    if (opt.sigma > 0.0) {
        base = fdnet::add_noise(base, opt.sigma,
                                fdnet::derive_seed(opt.seed, fdnet::hash_name("dataset")));
    }
    return base;
}

json config_echo(const CliOptions& opt) {
    return json{{"mode", opt.mode},       {"target", opt.target},   {"preset", opt.preset},
                {"model", opt.model},     {"suite", opt.suite},     {"m", opt.m},
                {"seed", opt.seed},       {"scale", opt.scale},     {"delta", opt.delta},
                {"sigma", opt.sigma},     {"eta", opt.eta},         {"lambda", opt.lambda},
                {"t1", opt.t1},           {"t2", opt.t2},           {"batch", opt.batch},
                {"alpha0", opt.alpha0},   {"gamma", opt.gamma},     {"m0", opt.m0},
                {"joint_iters", opt.joint_iters},                   {"workers", opt.workers},
                {"joint_batch", opt.joint_batch}};
}

void finish_manifest(const CliOptions& opt, json manifest, std::vector<std::string> files) {
    std::sort(files.begin(), files.end());
    manifest["version"] = fdnet::kVersion;
    manifest["config"] = config_echo(opt);
    manifest["files"] = files;
    fdnet::write_manifest(opt.out, manifest.dump(2));
}

int cmd_generate(const CliOptions& opt) {
    fdnet::Dataset data = load_input(opt);
    fs::create_directories(opt.out);
    {
        std::ofstream f(fs::path(opt.out) / "dataset.csv");
        fdnet::write_dataset_csv(f, data);
    }
    json manifest;
    manifest["command"] = "generate";
    manifest["dataset"] = {{"points", data.size()},
                           {"sigma", data.meta.sigma},
                           {"source", data.meta.source}};
    if (data.has_clean() && data.meta.sigma > 0.0) {
        manifest["dataset"]["snr"] = fdnet::dataset_snr(data);
    }
    finish_manifest(opt, manifest, {"dataset.csv"});
    std::cout << "wrote " << (fs::path(opt.out) / "dataset.csv").string() << " ("
              << data.size() << " points)\n";
    return 0;
}

int cmd_spectrum(const CliOptions& opt) {
    fdnet::Dataset data = load_input(opt);
    const std::vector<double>& f = data.has_clean() ? data.y_clean : data.y;
    const fdnet::SpectrumReport rep = fdnet::fourier_coeffs(f, data.theta, opt.m);
    fs::create_directories(opt.out);
    {
        std::ofstream os(fs::path(opt.out) / "spectrum.csv");
        fdnet::write_spectrum_csv(os, rep);
    }
    {
        std::ofstream os(fs::path(opt.out) / "support.csv");
        os << "index,frequency,kind,coefficient\n";
        fdnet::EmbeddingConfig cfg{opt.m};
        for (int l : rep.support) {
            const fdnet::ModeDescriptor d = fdnet::mode_of(l, cfg);
            os << l << ',' << d.frequency << ',' << fdnet::mode_kind_char(d.kind) << ','
               << fdnet::csv::fmt(rep.alpha_tilde[static_cast<std::size_t>(l)]) << '\n';
        }
    }
    json manifest;
    manifest["command"] = "spectrum";
    manifest["support"] = rep.support;
    manifest["residual_l2"] = rep.residual_l2;
    manifest["threshold"] = rep.threshold;
    finish_manifest(opt, manifest, {"spectrum.csv", "support.csv"});
    std::cout << "support indices:";
    for (int l : rep.support) std::cout << ' ' << l;
    std::cout << '\n';
    return 0;
}

int cmd_train_layerwise(const CliOptions& opt) {
    fdnet::Dataset data = load_input(opt);
    const fdnet::EmbeddingConfig cfg{opt.m};
    const fdnet::EmbeddedDataset ds =
        fdnet::embed_dataset(data, cfg, fdnet::EmbeddingChoice::symmetrized);

    const double sqrt_m = std::sqrt(static_cast<double>(opt.m));
    double q1 = 10.0, q2 = 10.0;
    std::optional<fdnet::SignedAlpha> alpha;
    if (data.has_clean() && data.size() >= static_cast<std::size_t>(4 * opt.m + 2)) {
        const fdnet::SpectrumReport rep = fdnet::fourier_coeffs(data.y_clean, data.theta, opt.m);
        alpha = fdnet::signed_alpha(rep, true);
        q1 = 0.5 * fdnet::linf_norm(alpha->values) / (opt.lambda * sqrt_m);
        q2 = 8.0 * opt.lambda * sqrt_m / (0.5 * 0.5);
    }

    fdnet::DiagNetParams start = fdnet::make_diag_net(
        cfg, fdnet::Activation::relu, 0.5, fdnet::derive_seed(opt.seed, fdnet::hash_name("c0")));
    const std::vector<double> c0 = start.c;

    fdnet::Phase1Config p1;
    p1.eta = opt.eta;
    p1.lambda = opt.lambda;
    p1.q1 = q1;
    p1.iters = opt.t1;
    p1.batch = std::min<long>(opt.batch, static_cast<long>(data.size()));
    p1.eval_every = 50;
    fdnet::Phase1Result r1 =
        fdnet::train_phase1(ds, start, p1, fdnet::derive_seed(opt.seed, fdnet::hash_name("phase1")));

    fdnet::Phase2Config p2;
    p2.eta_prime = 20.0;
    p2.iters = opt.t2;
    p2.q2 = q2;
    p2.q1 = q1;
    p2.batch = p1.batch;
    p2.eval_every = 50;
    fdnet::Phase2Result r2 = fdnet::train_phase2(ds, r1.params, p2,
                                                 fdnet::derive_seed(opt.seed, fdnet::hash_name("phase2")));

    fs::create_directories(opt.out);
    std::vector<std::string> files;
    {
        std::ofstream f(fs::path(opt.out) / "trace_phase1.csv");
        fdnet::write_trace_csv(f, r1.trace);
        files.push_back("trace_phase1.csv");
    }
    {
        std::ofstream f(fs::path(opt.out) / "trace_phase2.csv");
        fdnet::write_trace_csv(f, r2.trace);
        files.push_back("trace_phase2.csv");
    }
    {
        std::ofstream f(fs::path(opt.out) / "checkpoint.csv");
        fdnet::save_checkpoint(f, r2.params);
        files.push_back("checkpoint.csv");
    }

    json manifest;
    manifest["command"] = "train-layerwise";
    manifest["q1"] = q1;
    manifest["q2"] = q2;
    manifest["final_loss"] = fdnet::empirical_risk(r2.params, ds);
    if (data.has_clean()) {
        manifest["final_rel_l2"] =
            fdnet::relative_l2(fdnet::predict_all(r2.params, ds), data.y_clean);
    }
    if (alpha) {
        const fdnet::RecoveryReport rep =
            fdnet::recovery_report(r1.params.w, c0, *alpha, opt.eta, opt.lambda, opt.t1, 0.0,
                                   fdnet::ExpectationConvention::sampled);
        std::ofstream f(fs::path(opt.out) / "recovery.csv");
        fdnet::write_recovery_csv(f, rep);
        files.push_back("recovery.csv");
        manifest["recovery"] = json::parse(fdnet::recovery_json(rep));
    }
    finish_manifest(opt, manifest, files);
    std::cout << "final loss " << manifest["final_loss"] << '\n';
    return 0;
}

int cmd_train_joint(const CliOptions& opt) {
    fdnet::Dataset data = load_input(opt);
    const fdnet::EmbeddingConfig cfg{opt.m};
    const fdnet::EmbeddedDataset ds =
        fdnet::embed_dataset(data, cfg, fdnet::EmbeddingChoice::doubled);

    const bool diag = opt.model.rfind("diag", 0) == 0;
    if (!diag && opt.model.rfind("standard", 0) != 0) {
        throw fdnet::config_error("train-joint: model must be diagN or standardN");
    }
    const int n_dense = opt.model.back() - '0';
    if (n_dense < 0 || n_dense > 8) throw fdnet::config_error("train-joint: bad layer count");
    fdnet::DeepNetParams p = fdnet::make_deep_net(
        cfg, fdnet::EmbeddingChoice::doubled, diag,
        std::vector<int>(static_cast<std::size_t>(n_dense), 64),
        fdnet::derive_seed(opt.seed, fdnet::hash_name("glorot")));

    fdnet::JointConfig jc;
    jc.alpha0 = opt.alpha0;
    jc.gamma = opt.gamma;
    jc.m0 = opt.m0;
    jc.batch = std::min<long>(opt.joint_batch, static_cast<long>(data.size()));
    jc.iters = opt.joint_iters;
    jc.eval_every = 100;
    const fdnet::TrainingTrace trace =
        fdnet::train_joint(p, ds, jc, fdnet::derive_seed(opt.seed, fdnet::hash_name("joint")));

    fs::create_directories(opt.out);
    std::vector<std::string> files;
    {
        std::ofstream f(fs::path(opt.out) / ("trace_" + opt.model + ".csv"));
        fdnet::write_trace_csv(f, trace);
        files.push_back("trace_" + opt.model + ".csv");
    }
    {
        std::ofstream f(fs::path(opt.out) / "checkpoint.csv");
        fdnet::save_checkpoint(f, p);
        files.push_back("checkpoint.csv");
    }
    json manifest;
    manifest["command"] = "train-joint";
    manifest["model"] = opt.model;
    if (!trace.rows.empty()) {
        manifest["final_loss"] = trace.rows.back().loss;
        if (std::isfinite(trace.rows.back().rel_l2)) {
            manifest["final_rel_l2"] = trace.rows.back().rel_l2;
        }
    }
    finish_manifest(opt, manifest, files);
    std::cout << "trained " << opt.model << " for " << jc.iters << " iterations\n";
    return 0;
}

int cmd_evaluate(const CliOptions& opt) {
    if (opt.checkpoint.empty()) throw fdnet::config_error("evaluate: --checkpoint required");
    std::ifstream in(opt.checkpoint);
    if (!in) throw fdnet::data_error("cannot open " + opt.checkpoint);
    const fdnet::Checkpoint ck = fdnet::load_checkpoint(in);
    fdnet::Dataset data = load_input(opt);

    std::vector<double> pred;
    if (ck.is_diag) {
        const fdnet::EmbeddedDataset ds =
            fdnet::embed_dataset(data, ck.diag.cfg, fdnet::EmbeddingChoice::symmetrized);
        pred = fdnet::predict_all(ck.diag, ds);
    } else {
        const fdnet::EmbeddedDataset ds = fdnet::embed_dataset(data, ck.deep.cfg, ck.deep.embedding);
        pred = fdnet::predict_all(ck.deep, ds);
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = pred[i] - data.y[i];
        loss += 0.5 * r * r;
    }
    loss /= static_cast<double>(data.size());

    fs::create_directories(opt.out);
    {
        std::ofstream f(fs::path(opt.out) / "pred.csv");
        f << (data.has_clean() ? "theta,y,y_clean,pred\n" : "theta,y,pred\n");
        for (std::size_t i = 0; i < data.size(); ++i) {
            f << fdnet::csv::fmt(data.theta[i]) << ',' << fdnet::csv::fmt(data.y[i]);
            if (data.has_clean()) f << ',' << fdnet::csv::fmt(data.y_clean[i]);
            f << ',' << fdnet::csv::fmt(pred[i]) << '\n';
        }
    }
    json manifest;
    manifest["command"] = "evaluate";
    manifest["loss"] = loss;
    if (data.has_clean()) manifest["rel_l2"] = fdnet::relative_l2(pred, data.y_clean);
    finish_manifest(opt, manifest, {"pred.csv"});
    std::cout << "loss " << loss << '\n';
    return 0;
}

int cmd_verify(const CliOptions& opt) {
    std::vector<fdnet::SuiteResult> results;
    if (opt.suite == "all") {
        results = fdnet::verify_all();
    } else {
        results.push_back(fdnet::verify_suite(opt.suite));
    }
    bool ok = true;
    for (const fdnet::SuiteResult& s : results) {
        for (const fdnet::CheckResult& c : s.checks) {
            std::cout << (c.passed ? "[pass] " : "[FAIL] ") << s.suite << '/' << c.name
                      << "  value=" << c.value << " limit=" << c.limit;
            if (!c.detail.empty()) std::cout << "  (" << c.detail << ')';
            std::cout << '\n';
            ok = ok && c.passed;
        }
    }
    if (!opt.out.empty()) {
        fs::create_directories(opt.out);
        std::ofstream f(fs::path(opt.out) / "verify_report.json");
        f << fdnet::suites_json(results) << '\n';
        json manifest;
        manifest["command"] = "verify";
        manifest["passed"] = ok;
        finish_manifest(opt, manifest, {"verify_report.json"});
    }
    std::cout << (ok ? "verification passed\n" : "verification FAILED\n");
    return ok ? 0 : 1;
}

int cmd_reproduce(const CliOptions& opt) {
    fdnet::PresetOptions po;
    po.preset = opt.preset;
    po.seed = opt.seed;
    po.scale = opt.scale;
    po.workers = opt.workers;
    po.out_dir = (fs::path(opt.out) / opt.preset).string();
    po.data_dir = opt.data_dir;
    const fdnet::PresetOutcome outcome = fdnet::run_preset(po);
    std::cout << "preset " << opt.preset << " (scale " << opt.scale << ")\n";
    for (const fdnet::ModelRunResult& r : outcome.models) {
        std::cout << "  " << r.model << ": final rel_l2 ";
        if (std::isfinite(r.final_rel_l2)) std::cout << r.final_rel_l2;
        else std::cout << "n/a";
        std::cout << ", loss " << r.final_loss << '\n';
    }
    std::cout << "outputs in " << po.out_dir << '\n';
    return 0;
}

void apply_config_file(CliOptions& opt, const std::string& path) {
    const auto kv = fdnet::read_kv_config(path);
    auto get = [&](const char* key, auto& slot) {
        const auto it = kv.find(key);
        if (it == kv.end()) return;
        std::istringstream ss(it->second);
        ss >> slot;
    };
    auto get_s = [&](const char* key, std::string& slot) {
        const auto it = kv.find(key);
        if (it != kv.end()) slot = it->second;
    };
    get_s("mode", opt.mode);
    get_s("target", opt.target);
    get_s("preset", opt.preset);
    get_s("model", opt.model);
    get_s("suite", opt.suite);
    get_s("out", opt.out);
    get_s("data_dir", opt.data_dir);
    get_s("checkpoint", opt.checkpoint);
    get("m", opt.m);
    get("seed", opt.seed);
    get("scale", opt.scale);
    get("delta", opt.delta);
    get("sigma", opt.sigma);
    get("workers", opt.workers);
    get("eta", opt.eta);
    get("lambda", opt.lambda);
    get("t1", opt.t1);
    get("t2", opt.t2);
    get("batch", opt.batch);
    get("alpha0", opt.alpha0);
    get("gamma", opt.gamma);
    get("m0", opt.m0);
    get("joint_iters", opt.joint_iters);
    get("joint_batch", opt.joint_batch);
}

}  // namespace

int main(int argc, char** argv) {
    CliOptions opt;
    std::string config_path;

    CLI::App app{"Sparse Fourier feature learning with diagonal networks"};
    app.add_option("--mode", opt.mode,
                   "generate | train-layerwise | train-joint | evaluate | spectrum | verify | reproduce")
        ->required(false);
    app.add_option("--config", config_path, "flat key=value config file");
    app.add_option("--target", opt.target, "built-in target (ex1|ex2|ex3) or CSV path");
    app.add_option("--preset", opt.preset, "experiment preset (ex1..ex4)");
    app.add_option("--model", opt.model, "joint model: diagN or standardN");
    app.add_option("--suite", opt.suite,
                   "verify suite: embedding|spectral|gradients|lemma|feature|hessian|all");
    app.add_option("--m", opt.m, "embedding band limit");
    app.add_option("--seed", opt.seed, "run seed");
    app.add_option("--out", opt.out, "output directory");
    app.add_option("--data-dir", opt.data_dir, "bundled data directory");
    app.add_option("--checkpoint", opt.checkpoint, "checkpoint CSV for evaluate");
    app.add_option("--scale", opt.scale, "desk-scale divisor for paper iteration counts");
    app.add_option("--delta", opt.delta, "grid spacing");
    app.add_option("--sigma", opt.sigma, "noise level override");
    app.add_flag("!--no-normalize", opt.normalize, "keep CSV values unscaled");
    app.add_option("--workers", opt.workers, "parallel runs inside reproduce");
    app.add_option("--eta", opt.eta, "phase-1 step size");
    app.add_option("--lambda", opt.lambda, "phase-1 ridge");
    app.add_option("--t1", opt.t1, "phase-1 iterations");
    app.add_option("--t2", opt.t2, "phase-2 iterations");
    app.add_option("--batch", opt.batch, "layer-wise batch size");
    app.add_option("--alpha0", opt.alpha0, "joint initial learning rate");
    app.add_option("--gamma", opt.gamma, "joint decay rate");
    app.add_option("--m0", opt.m0, "joint decay steps");
    app.add_option("--joint-iters", opt.joint_iters, "joint iterations");
    app.add_option("--joint-batch", opt.joint_batch, "joint batch size");

    try {
        app.parse(argc, argv);
        if (!config_path.empty()) apply_config_file(opt, config_path);
        if (opt.mode.empty()) {
            std::cerr << app.help() << '\n';
            return 2;
        }
        if (opt.mode == "generate") return cmd_generate(opt);
        if (opt.mode == "spectrum") return cmd_spectrum(opt);
        if (opt.mode == "train-layerwise") return cmd_train_layerwise(opt);
        if (opt.mode == "train-joint") return cmd_train_joint(opt);
        if (opt.mode == "evaluate") return cmd_evaluate(opt);
        if (opt.mode == "verify") return cmd_verify(opt);
        if (opt.mode == "reproduce") return cmd_reproduce(opt);
        std::cerr << "unknown mode '" << opt.mode << "'\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
            return app.exit(e);
        }
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const fdnet::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const fdnet::parse_error& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 3;
    } catch (const fdnet::data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const fdnet::resolution_error& e) {
        std::cerr << "resolution error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
