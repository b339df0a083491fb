// Command-line front end: dataset generation, exact solving, policy training,
// evaluation, and the benchmark sweeps. Every command resolves its config and
// seed explicitly, writes deterministic numeric outputs, and drops a manifest
// next to them.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pinch/baselines.hpp"
#include "pinch/channel.hpp"
#include "pinch/config.hpp"
#include "pinch/dataset.hpp"
#include "pinch/manifest.hpp"
#include "pinch/metrics.hpp"
#include "pinch/models.hpp"
#include "pinch/robustness.hpp"
#include "pinch/solver.hpp"
#include "pinch/train.hpp"

namespace fs = std::filesystem;
using namespace pinch;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool out_required = true) {
    cmd->add_option("--config", opts.config_path, "system config file (flat key-value)");
    cmd->add_option("--seed", opts.seed, "seed override (default: rng_seed from config)");
    auto* out = cmd->add_option("--out", opts.out, "output path");
    if (out_required) out->required();
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
}

SystemConfig resolve_config(const CommonOpts& opts) {
    SystemConfig cfg = opts.config_path.empty() ? SystemConfig{} : load_config_file(opts.config_path);
    if (opts.seed) cfg.rng_seed = *opts.seed;
    cfg.validate();
    return cfg;
}

RunManifest start_manifest(const std::string& command, const CommonOpts& opts,
                           const SystemConfig& cfg, const std::vector<std::string>& argv) {
    RunManifest m;
    m.command = command;
    m.argv = argv;
    m.config_text = serialize_config(cfg);
    m.seed = cfg.rng_seed;
    if (!opts.config_path.empty()) m.add_input(opts.config_path);
    return m;
}

SolveMethod method_from_string(const std::string& s) {
    if (s == "brute") return SolveMethod::BruteForce;
    if (s == "dinkelbach") return SolveMethod::Dinkelbach;
    if (s == "sweep") return SolveMethod::AngleSweep;
    throw std::invalid_argument("unknown method: " + s);
}

QfSolution solve_with(SolveMethod method, const ChannelVector& ch, double rho) {
    switch (method) {
        case SolveMethod::BruteForce: return brute_force(ch, rho);
        case SolveMethod::Dinkelbach: return dinkelbach(ch, {}, subproblem_exact, rho);
        case SolveMethod::AngleSweep: return angle_sweep_max_ratio(ch, rho);
    }
    throw std::logic_error("unreachable");
}

fs::path ensure_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::pair<double, double>> curve_rows(const std::vector<double>& xs,
                                                  const std::vector<double>& ys) {
    std::vector<std::pair<double, double>> rows;
    for (std::size_t i = 0; i < xs.size(); ++i) rows.emplace_back(xs[i], ys[i]);
    return rows;
}

ProbabilityPolicy policy_adapter(const Policy& policy) {
    return [&policy](const InstanceRecord& rec) { return policy.probabilities(rec.channel()); };
}

nlohmann::json metrics_json(const Metrics& m) {
    return {{"snr_accuracy", m.snr_accuracy},
            {"rate_accuracy", m.rate_accuracy},
            {"bitwise_accuracy", m.bitwise_accuracy},
            {"activation_ratio_model", m.activation_ratio_model},
            {"activation_ratio_optimal", m.activation_ratio_optimal},
            {"n_instances", m.n_instances},
            {"fallback_count", m.fallback_count}};
}

void parse_hyper_file(const std::string& path, TrainConfig& tc, PolicySpec& spec) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open hyperparameter file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::istringstream ls(line);
        std::string key, value;
        if (!(ls >> key)) continue;
        if (!(ls >> value)) throw std::runtime_error("hyper line " + std::to_string(lineno) + ": missing value");
        if (value == "=" && !(ls >> value))
            throw std::runtime_error("hyper line " + std::to_string(lineno) + ": missing value");

        if (key == "iterations") tc.iterations = std::stoi(value);
        else if (key == "batch_size") tc.batch_size = std::stoi(value);
        else if (key == "lr_start") tc.lr_start = std::stod(value);
        else if (key == "lr_end") tc.lr_end = std::stod(value);
        else if (key == "eval_interval") tc.eval_interval = std::stoi(value);
        else if (key == "eval_train_subset") tc.eval_train_subset = std::stoi(value);
        else if (key == "shard_size") tc.shard_size = std::stoi(value);
        else if (key == "alpha") tc.loss.alpha = std::stod(value);
        else if (key == "lambda_wbce_start") tc.loss.lambda_wbce.start = std::stod(value);
        else if (key == "lambda_wbce_end") tc.loss.lambda_wbce.end = std::stod(value);
        else if (key == "lambda_snr_start") tc.loss.lambda_snr.start = std::stod(value);
        else if (key == "lambda_snr_end") tc.loss.lambda_snr.end = std::stod(value);
        else if (key == "lambda_collapse_start") tc.loss.lambda_collapse.start = std::stod(value);
        else if (key == "lambda_collapse_end") tc.loss.lambda_collapse.end = std::stod(value);
        else if (key == "embed_dim") spec.embed_dim = std::stoi(value);
        else if (key == "edge_hidden") spec.edge_hidden = std::stoi(value);
        else if (key == "gnn_layers") spec.gnn_layers = std::stoi(value);
        else if (key == "key_dim") spec.key_dim = std::stoi(value);
        else if (key == "sharpening") spec.sharpening = std::stod(value);
        else if (key == "fusion_hidden") {
            spec.fusion_hidden.clear();
            std::istringstream vs(value);
            std::string tok;
            while (std::getline(vs, tok, ',')) spec.fusion_hidden.push_back(std::stoi(tok));
        } else {
            throw std::runtime_error("hyper line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
}

// --------------------------------------------------------------------------
// Subcommand bodies
// --------------------------------------------------------------------------

int cmd_gen_data(const CommonOpts& opts, int count, const std::string& method,
                 const std::vector<std::string>& argv) {
    StopWatch watch;
    const auto cfg = resolve_config(opts);
    auto manifest = start_manifest("gen-data", opts, cfg, argv);

    auto ds = generate_dataset(cfg, count, cfg.rng_seed, method_from_string(method), opts.threads);
    save_dataset(ds, opts.out);
    manifest.add_output(opts.out);
    manifest.duration_ms = watch.elapsed_ms();
    manifest.write(opts.out + ".manifest.json");

    std::cout << "wrote " << ds.size() << " instances to " << opts.out << " (solver "
              << ds.solver << ", N=" << cfg.n_antennas << ")\n";
    return 0;
}

int cmd_solve(const CommonOpts& opts, const std::vector<double>& user_xyz,
              const std::string& method, const std::vector<std::string>& argv) {
    StopWatch watch;
    const auto cfg = resolve_config(opts);
    const UserPosition user{user_xyz[0], user_xyz[1], user_xyz[2]};
    const auto ch = compute_channel(cfg, user);
    const auto sol = solve_with(method_from_string(method), ch, cfg.transmit_snr_linear());

    std::ostringstream report;
    report << "method " << to_string(sol.method) << "\n";
    report << "activation " << sol.activation.bitstring() << "\n";
    report << "n_active " << sol.activation.n_active() << "\n";
    report << "objective " << fmt17(sol.objective) << "\n";
    report << "snr_linear " << fmt17(sol.snr) << "\n";
    report << "snr_db " << fmt17(db_from_linear(sol.snr)) << "\n";
    report << "rate_bps_hz " << fmt17(sol.rate) << "\n";
    if (sol.method == SolveMethod::Dinkelbach) {
        report << "iterations " << sol.iterations << "\n";
        report << "lambda_trace";
        for (double l : sol.lambda_trace) report << " " << fmt17(l);
        report << "\n";
    }
    std::cout << report.str();

    if (!opts.out.empty()) {
        std::ofstream os(opts.out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + opts.out);
        os << report.str();
        auto manifest = start_manifest("solve", opts, cfg, argv);
        manifest.add_output(opts.out);
        manifest.duration_ms = watch.elapsed_ms();
        manifest.write(opts.out + ".manifest.json");
    }
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& model, const std::string& train_path,
              const std::string& val_path, const std::string& loss_mode,
              const std::string& hyper_path, std::optional<int> iterations,
              std::optional<int> batch_size, const std::vector<std::string>& argv) {
    StopWatch watch;
    auto train_set = load_dataset(train_path);
    auto val_set = load_dataset(val_path);
    SystemConfig cfg = train_set.config;
    if (opts.seed) cfg.rng_seed = *opts.seed;

    PolicySpec spec;
    spec.kind = policy_kind_from_string(model);
    TrainConfig tc;
    tc.loss_mode = loss_mode_from_string(loss_mode);
    if (!hyper_path.empty()) parse_hyper_file(hyper_path, tc, spec);
    if (iterations) tc.iterations = *iterations;
    if (batch_size) tc.batch_size = *batch_size;
    tc.seed = cfg.rng_seed;
    tc.threads = opts.threads;

    Policy policy(spec);
    policy.init_weights(tc.seed);
    std::cout << "training " << to_string(spec.kind) << " (" << policy.param_count()
              << " parameters) with " << to_string(tc.loss_mode) << " loss, "
              << tc.iterations << " iterations, batch " << tc.batch_size << "\n";

    auto result = train(policy, train_set, val_set, tc);

    const auto dir = ensure_dir(opts.out);
    auto manifest = start_manifest("train", opts, cfg, argv);
    manifest.add_input(train_path);
    manifest.add_input(val_path);
    if (!hyper_path.empty()) manifest.add_input(hyper_path);

    const auto ckpt = (dir / "checkpoint.bin").string();
    policy.save(ckpt);
    manifest.add_output(ckpt);

    std::vector<double> iters, train_acc, val_acc, losses;
    for (const auto& pt : result.curve) {
        iters.push_back(pt.iteration);
        train_acc.push_back(pt.train_acc);
        val_acc.push_back(pt.val_acc);
        losses.push_back(pt.loss);
    }
    const std::string digest = manifest.digest();
    for (auto [name, ys] : {std::pair{"curve_train_acc.dat", &train_acc},
                            std::pair{"curve_val_acc.dat", &val_acc},
                            std::pair{"curve_loss.dat", &losses}}) {
        const auto path = (dir / name).string();
        write_plot_file(path, std::string("train ") + to_string(spec.kind), digest, "iteration",
                        name, curve_rows(iters, *ys));
        manifest.add_output(path);
    }

    nlohmann::json summary = {{"model", to_string(spec.kind)},
                              {"loss", to_string(tc.loss_mode)},
                              {"iterations", result.iterations_run},
                              {"parameters", policy.param_count()},
                              {"final_train_acc", result.final_train_acc},
                              {"final_val_acc", result.final_val_acc},
                              {"seed", tc.seed}};
    const auto summary_path = (dir / "summary.json").string();
    {
        std::ofstream os(summary_path, std::ios::binary);
        os << summary.dump(2) << "\n";
    }
    manifest.add_output(summary_path);
    manifest.duration_ms = watch.elapsed_ms();
    manifest.write((dir / "manifest.json").string());

    std::cout << "final train acc " << result.final_train_acc << ", val acc "
              << result.final_val_acc << "\n";
    return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& checkpoint, const std::string& baseline,
             const std::string& data_path, const std::vector<std::string>& argv) {
    StopWatch watch;
    auto ds = load_dataset(data_path);

    ProbabilityPolicy prob_policy;
    Policy policy;
    std::string policy_name;
    if (!checkpoint.empty()) {
        policy = Policy::load(checkpoint);
        prob_policy = policy_adapter(policy);
        policy_name = to_string(policy.spec().kind);
    } else if (baseline == "nearest") {
        prob_policy = nearest_policy(ds.config);
        policy_name = "nearest";
    } else if (baseline == "labels") {
        prob_policy = label_policy();
        policy_name = "labels";
    } else {
        throw std::invalid_argument("eval: pass --checkpoint or --baseline {nearest, labels}");
    }

    std::vector<PerInstanceEval> per_instance;
    const auto metrics = evaluate(prob_policy, ds, 0.5, opts.threads, &per_instance);

    const auto dir = ensure_dir(opts.out);
    auto manifest = start_manifest("eval", opts, ds.config, argv);
    manifest.add_input(data_path);
    if (!checkpoint.empty()) manifest.add_input(checkpoint);

    auto j = metrics_json(metrics);
    j["policy"] = policy_name;
    const auto metrics_path = (dir / "metrics.json").string();
    {
        std::ofstream os(metrics_path, std::ios::binary);
        os << j.dump(2) << "\n";
    }
    manifest.add_output(metrics_path);

    const auto log_path = (dir / "per_instance.dat").string();
    {
        std::ofstream os(log_path, std::ios::binary);
        os << "# eval " << policy_name << "\n";
        os << "# columns: index snr_ratio rate_ratio bitwise n_active_model n_active_optimal fallback\n";
        for (std::size_t i = 0; i < per_instance.size(); ++i) {
            const auto& ev = per_instance[i];
            os << i << " " << fmt17(ev.snr_ratio) << " " << fmt17(ev.rate_ratio) << " "
               << fmt17(ev.bitwise) << " " << ev.n_active_model << " " << ev.n_active_optimal
               << " " << (ev.used_fallback ? 1 : 0) << "\n";
        }
    }
    manifest.add_output(log_path);
    manifest.duration_ms = watch.elapsed_ms();
    manifest.write((dir / "manifest.json").string());

    std::cout << "policy " << policy_name << ": snr_acc " << metrics.snr_accuracy << ", rate_acc "
              << metrics.rate_accuracy << ", bitwise " << metrics.bitwise_accuracy
              << ", activation " << metrics.activation_ratio_model << " (optimal "
              << metrics.activation_ratio_optimal << ")\n";
    return 0;
}

// Ranks antennas by their projection onto the optimal coherent direction;
// prefixes of that ranking give the exact solver's top-K curve.
std::vector<double> exact_ranking_scores(const InstanceRecord& rec) {
    const auto ch = rec.channel();
    const auto z = active_sum(ch, rec.optimal_activation);
    const double phi = std::atan2(z.imag(), z.real());
    std::vector<double> scores(static_cast<std::size_t>(ch.size()));
    for (int i = 0; i < ch.size(); ++i)
        scores[static_cast<std::size_t>(i)] =
            ch[i].real() * std::cos(phi) + ch[i].imag() * std::sin(phi);
    return scores;
}

int cmd_bench_topk(const CommonOpts& opts, const std::vector<std::string>& checkpoints,
                   const std::string& data_path, std::vector<double> fractions, int limit,
                   const std::vector<std::string>& argv) {
    StopWatch watch;
    auto ds = load_dataset(data_path);
    if (fractions.empty())
        for (int i = 1; i <= 20; ++i) fractions.push_back(0.1 * i);
    const int n_inst = limit > 0 ? std::min(limit, ds.size()) : ds.size();
    const int n_ant = ds.config.n_antennas;

    const auto dir = ensure_dir(opts.out);
    auto manifest = start_manifest("bench-topk", opts, ds.config, argv);
    manifest.add_input(data_path);
    for (const auto& c : checkpoints) manifest.add_input(c);

    struct CurveSource {
        std::string tag;
        std::function<std::pair<std::vector<double>, int>(const InstanceRecord&)> rank;
    };
    std::vector<CurveSource> sources;
    std::vector<Policy> policies;
    policies.reserve(checkpoints.size());
    for (const auto& c : checkpoints) {
        policies.push_back(Policy::load(c));
    }
    for (const auto& p : policies) {
        sources.push_back({to_string(p.spec().kind), [&p](const InstanceRecord& rec) {
                               const auto scores = p.importance(rec.channel());
                               std::vector<double> probs(scores.size());
                               for (std::size_t i = 0; i < scores.size(); ++i)
                                   probs[i] = 1.0 / (1.0 + std::exp(-scores[i]));
                               const auto a = threshold_activation(probs, 0.5);
                               return std::make_pair(scores, a.n_active());
                           }});
    }
    sources.push_back({"exact", [](const InstanceRecord& rec) {
                           return std::make_pair(exact_ranking_scores(rec),
                                                 rec.optimal_activation.n_active());
                       }});

    const std::string digest = manifest.digest();
    for (const auto& src : sources) {
        std::vector<std::vector<double>> ratios(
            fractions.size(), std::vector<double>(static_cast<std::size_t>(n_inst)));
        parallel_for(n_inst, opts.threads, [&](int i) {
            const auto& rec = ds.records[static_cast<std::size_t>(i)];
            const auto [scores, base_k] = src.rank(rec);
            const auto ch = rec.channel();
            for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
                const int k =
                    std::clamp(static_cast<int>(std::lround(fractions[fi] * base_k)), 1, n_ant);
                const auto act = top_k_refine(ImportanceScores{scores}, k);
                ratios[fi][static_cast<std::size_t>(i)] =
                    evaluate_snr(ds.config, ch, act) / rec.optimal_snr;
            }
        });
        std::vector<double> means;
        for (const auto& row : ratios) {
            double s = 0;
            for (double v : row) s += v;
            means.push_back(s / n_inst);
        }
        const auto path = (dir / ("topk_" + src.tag + ".dat")).string();
        write_plot_file(path, "top-k selection (" + src.tag + ")", digest, "fraction",
                        "snr_accuracy", curve_rows(fractions, means));
        manifest.add_output(path);
        std::cout << "topk " << src.tag << " written (" << means.size() << " points)\n";
    }

    manifest.duration_ms = watch.elapsed_ms();
    manifest.write((dir / "manifest.json").string());
    return 0;
}

int cmd_bench_activation_ratio(const CommonOpts& opts, const std::string& checkpoint,
                               std::vector<int> n_grid, int count,
                               const std::vector<std::string>& argv) {
    StopWatch watch;
    const auto base_cfg = resolve_config(opts);
    if (n_grid.empty()) n_grid = {50, 100, 200, 500};

    std::optional<Policy> policy;
    if (!checkpoint.empty()) policy = Policy::load(checkpoint);

    const auto dir = ensure_dir(opts.out);
    auto manifest = start_manifest("bench-activation-ratio", opts, base_cfg, argv);
    if (!checkpoint.empty()) manifest.add_input(checkpoint);

    std::vector<double> xs, exact_ratio, model_ratio;
    for (int n : n_grid) {
        SystemConfig cfg = base_cfg;
        cfg.n_antennas = n;
        const auto layout = antenna_positions(cfg);
        const auto user_rng = CounterRng(cfg.rng_seed)
                                  .derive(rng_stream::kBenchUsers)
                                  .derive(static_cast<std::uint64_t>(n));

        std::vector<double> ex(static_cast<std::size_t>(count)), mo(static_cast<std::size_t>(count));
        parallel_for(count, opts.threads, [&](int i) {
            const auto stream = user_rng.derive(static_cast<std::uint64_t>(i));
            const UserPosition user{
                stream.uniform(0, -cfg.region_half_side_m, cfg.region_half_side_m),
                stream.uniform(1, -cfg.region_half_side_m, cfg.region_half_side_m),
                stream.uniform(2, 0.0, 1.0)};
            const auto ch = compute_channel(cfg, layout, user);
            const auto sol = angle_sweep_max_ratio(ch, cfg.transmit_snr_linear());
            ex[static_cast<std::size_t>(i)] = static_cast<double>(sol.activation.n_active()) / n;
            if (policy) {
                const auto probs = policy->probabilities(ch);
                mo[static_cast<std::size_t>(i)] =
                    static_cast<double>(threshold_activation(probs, 0.5).n_active()) / n;
            }
        });
        double exm = 0, mom = 0;
        for (int i = 0; i < count; ++i) {
            exm += ex[static_cast<std::size_t>(i)];
            mom += mo[static_cast<std::size_t>(i)];
        }
        xs.push_back(n);
        exact_ratio.push_back(exm / count);
        model_ratio.push_back(mom / count);
        std::cout << "N=" << n << " exact ratio " << exm / count;
        if (policy) std::cout << ", model ratio " << mom / count;
        std::cout << "\n";
    }

    const std::string digest = manifest.digest();
    const auto exact_path = (dir / "activation_ratio_exact.dat").string();
    write_plot_file(exact_path, "activation ratio (exact)", digest, "n_antennas", "ratio",
                    curve_rows(xs, exact_ratio));
    manifest.add_output(exact_path);
    if (policy) {
        const auto model_path = (dir / "activation_ratio_model.dat").string();
        write_plot_file(model_path, "activation ratio (model)", digest, "n_antennas", "ratio",
                        curve_rows(xs, model_ratio));
        manifest.add_output(model_path);
    }
    manifest.duration_ms = watch.elapsed_ms();
    manifest.write((dir / "manifest.json").string());
    return 0;
}

int cmd_bench_snr_vs_n(const CommonOpts& opts, const std::string& checkpoint,
                       std::vector<int> n_grid, int count, const std::vector<std::string>& argv) {
    StopWatch watch;
    const auto base_cfg = resolve_config(opts);
    if (n_grid.empty()) n_grid = {50, 100, 200, 500, 1000};

    std::optional<Policy> policy;
    if (!checkpoint.empty()) policy = Policy::load(checkpoint);

    const auto dir = ensure_dir(opts.out);
    auto manifest = start_manifest("bench-snr-vs-n", opts, base_cfg, argv);
    if (!checkpoint.empty()) manifest.add_input(checkpoint);

    std::vector<double> xs, exact_db, model_db, conv_db;
    for (int n : n_grid) {
        SystemConfig cfg = base_cfg;
        cfg.n_antennas = n;
        const auto layout = antenna_positions(cfg);
        const auto user_rng = CounterRng(cfg.rng_seed)
                                  .derive(rng_stream::kBenchUsers)
                                  .derive(static_cast<std::uint64_t>(n));

        std::vector<double> ex(static_cast<std::size_t>(count)), mo(static_cast<std::size_t>(count)),
            co(static_cast<std::size_t>(count));
        parallel_for(count, opts.threads, [&](int i) {
            const auto stream = user_rng.derive(static_cast<std::uint64_t>(i));
            const UserPosition user{
                stream.uniform(0, -cfg.region_half_side_m, cfg.region_half_side_m),
                stream.uniform(1, -cfg.region_half_side_m, cfg.region_half_side_m),
                stream.uniform(2, 0.0, 1.0)};
            const auto ch = compute_channel(cfg, layout, user);
            const auto sol = angle_sweep_max_ratio(ch, cfg.transmit_snr_linear());
            ex[static_cast<std::size_t>(i)] = db_from_linear(sol.snr);
            co[static_cast<std::size_t>(i)] = db_from_linear(conventional_baseline_snr(cfg, user));
            if (policy) {
                const auto probs = policy->probabilities(ch);
                const auto act = threshold_activation(probs, 0.5);
                mo[static_cast<std::size_t>(i)] = db_from_linear(evaluate_snr(cfg, ch, act));
            }
        });
        double exm = 0, mom = 0, com = 0;
        for (int i = 0; i < count; ++i) {
            exm += ex[static_cast<std::size_t>(i)];
            mom += mo[static_cast<std::size_t>(i)];
            com += co[static_cast<std::size_t>(i)];
        }
        xs.push_back(n);
        exact_db.push_back(exm / count);
        model_db.push_back(mom / count);
        conv_db.push_back(com / count);
        std::cout << "N=" << n << " exact " << exm / count << " dB, conventional " << com / count
                  << " dB";
        if (policy) std::cout << ", model " << mom / count << " dB";
        std::cout << "\n";
    }

    const std::string digest = manifest.digest();
    {
        const auto path = (dir / "snr_vs_n_exact.dat").string();
        write_plot_file(path, "achievable snr vs N (exact)", digest, "n_antennas", "snr_db",
                        curve_rows(xs, exact_db));
        manifest.add_output(path);
    }
    {
        const auto path = (dir / "snr_vs_n_conventional.dat").string();
        write_plot_file(path, "achievable snr vs N (conventional)", digest, "n_antennas", "snr_db",
                        curve_rows(xs, conv_db));
        manifest.add_output(path);
    }
    if (policy) {
        const auto path = (dir / "snr_vs_n_model.dat").string();
        write_plot_file(path, "achievable snr vs N (model)", digest, "n_antennas", "snr_db",
                        curve_rows(xs, model_db));
        manifest.add_output(path);
    }
    manifest.duration_ms = watch.elapsed_ms();
    manifest.write((dir / "manifest.json").string());
    return 0;
}

int cmd_bench_noise(const CommonOpts& opts, const std::string& checkpoint,
                    const std::string& data_path, std::vector<double> sigma_grid, int mc_samples,
                    int limit, const std::vector<std::string>& argv) {
    StopWatch watch;
    auto ds = load_dataset(data_path);
    auto policy = Policy::load(checkpoint);
    if (sigma_grid.empty()) sigma_grid = {0.0, 0.05, 0.1, 0.2, 0.3, 0.4};

    UncertaintyConfig ucfg;
    ucfg.n_samples = mc_samples;
    ucfg.seed = opts.seed.value_or(ds.config.rng_seed);

    const auto points = robust_eval(policy, ds, sigma_grid, ucfg, limit > 0 ? limit : -1,
                                    opts.threads);

    const auto dir = ensure_dir(opts.out);
    auto manifest = start_manifest("bench-noise", opts, ds.config, argv);
    manifest.add_input(data_path);
    manifest.add_input(checkpoint);

    std::vector<double> xs, model_acc, base_acc, act_ratio;
    for (const auto& pt : points) {
        xs.push_back(pt.sigma_p);
        model_acc.push_back(pt.model_snr_accuracy);
        base_acc.push_back(pt.baseline_snr_accuracy);
        act_ratio.push_back(pt.model_activation_ratio);
        std::cout << "sigma " << pt.sigma_p << ": model acc " << pt.model_snr_accuracy
                  << ", single-draw exact " << pt.baseline_snr_accuracy << ", activation "
                  << pt.model_activation_ratio << "\n";
    }
    const std::string digest = manifest.digest();
    for (auto [name, ys] : {std::pair{"noise_model_acc.dat", &model_acc},
                            std::pair{"noise_baseline_acc.dat", &base_acc},
                            std::pair{"noise_model_activation.dat", &act_ratio}}) {
        const auto path = (dir / name).string();
        write_plot_file(path, "robustness vs position noise", digest, "sigma_p", name,
                        curve_rows(xs, *ys));
        manifest.add_output(path);
    }
    manifest.duration_ms = watch.elapsed_ms();
    manifest.write((dir / "manifest.json").string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pinch: single-waveguide pinching-antenna activation toolkit"};
    app.require_subcommand(1);
    std::vector<std::string> full_argv(argv, argv + argc);

    CommonOpts gen_opts;
    int gen_count = 1000;
    std::string gen_method = "sweep";
    auto* gen = app.add_subcommand("gen-data", "generate a solver-labeled dataset");
    add_common(gen, gen_opts);
    gen->add_option("--count", gen_count, "number of instances");
    gen->add_option("--method", gen_method, "solver: brute | dinkelbach | sweep");

    CommonOpts solve_opts;
    std::vector<double> user_xyz;
    std::string solve_method = "sweep";
    auto* solve = app.add_subcommand("solve", "solve one instance for a given user position");
    add_common(solve, solve_opts, /*out_required=*/false);
    solve->add_option("--user", user_xyz, "user position x y z")->expected(3)->required();
    solve->add_option("--method", solve_method, "solver: brute | dinkelbach | sweep");

    CommonOpts train_opts;
    std::string train_model = "dispn", train_data, val_data, train_loss = "bce", hyper_file;
    std::optional<int> train_iters, train_batch;
    auto* tr = app.add_subcommand("train", "train an activation policy on labeled data");
    add_common(tr, train_opts);
    tr->add_option("--model", train_model, "mlp | gnnmlp | dispn");
    tr->add_option("--train", train_data, "training dataset")->required();
    tr->add_option("--val", val_data, "validation dataset")->required();
    tr->add_option("--loss", train_loss, "bce | augmented");
    tr->add_option("--hyper", hyper_file, "hyperparameter file (flat key-value)");
    tr->add_option("--iterations", train_iters, "override iteration count");
    tr->add_option("--batch-size", train_batch, "override batch size");

    CommonOpts eval_opts;
    std::string eval_ckpt, eval_baseline, eval_data;
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint or baseline on a dataset");
    add_common(ev, eval_opts);
    ev->add_option("--checkpoint", eval_ckpt, "trained policy checkpoint");
    ev->add_option("--baseline", eval_baseline, "nearest | labels");
    ev->add_option("--data", eval_data, "dataset file")->required();

    CommonOpts topk_opts;
    std::vector<std::string> topk_ckpts;
    std::string topk_data;
    std::vector<double> topk_fractions;
    int topk_limit = 0;
    auto* tk = app.add_subcommand("bench-topk", "top-K refinement curves");
    add_common(tk, topk_opts);
    tk->add_option("--checkpoint", topk_ckpts, "checkpoint(s), repeatable");
    tk->add_option("--data", topk_data, "dataset file")->required();
    tk->add_option("--fraction-grid", topk_fractions, "fractions of the base selection");
    tk->add_option("--limit", topk_limit, "cap instance count (0 = all)");

    CommonOpts ar_opts;
    std::string ar_ckpt;
    std::vector<int> ar_grid;
    int ar_count = 200;
    auto* ar = app.add_subcommand("bench-activation-ratio", "activation ratio vs N");
    add_common(ar, ar_opts);
    ar->add_option("--checkpoint", ar_ckpt, "optional checkpoint for the model curve");
    ar->add_option("--n-grid", ar_grid, "antenna counts");
    ar->add_option("--count", ar_count, "users per grid point");

    CommonOpts sv_opts;
    std::string sv_ckpt;
    std::vector<int> sv_grid;
    int sv_count = 200;
    auto* sv = app.add_subcommand("bench-snr-vs-n", "achievable SNR vs N with baselines");
    add_common(sv, sv_opts);
    sv->add_option("--checkpoint", sv_ckpt, "optional checkpoint for the model curve");
    sv->add_option("--n-grid", sv_grid, "antenna counts");
    sv->add_option("--count", sv_count, "users per grid point");

    CommonOpts noise_opts;
    std::string noise_ckpt, noise_data;
    std::vector<double> noise_grid;
    int noise_samples = 32, noise_limit = 0;
    auto* nz = app.add_subcommand("bench-noise", "robustness under position uncertainty");
    add_common(nz, noise_opts);
    nz->add_option("--checkpoint", noise_ckpt, "trained policy checkpoint")->required();
    nz->add_option("--data", noise_data, "dataset of true positions")->required();
    nz->add_option("--sigma-grid", noise_grid, "position error std grid");
    nz->add_option("--mc-samples", noise_samples, "Monte Carlo samples M");
    nz->add_option("--limit", noise_limit, "cap instance count (0 = all)");

    CLI11_PARSE(app, argc, argv);

    std::string stage = "?";
    try {
        if (gen->parsed()) {
            stage = "gen-data";
            return cmd_gen_data(gen_opts, gen_count, gen_method, full_argv);
        }
        if (solve->parsed()) {
            stage = "solve";
            return cmd_solve(solve_opts, user_xyz, solve_method, full_argv);
        }
        if (tr->parsed()) {
            stage = "train";
            return cmd_train(train_opts, train_model, train_data, val_data, train_loss, hyper_file,
                             train_iters, train_batch, full_argv);
        }
        if (ev->parsed()) {
            stage = "eval";
            return cmd_eval(eval_opts, eval_ckpt, eval_baseline, eval_data, full_argv);
        }
        if (tk->parsed()) {
            stage = "bench-topk";
            return cmd_bench_topk(topk_opts, topk_ckpts, topk_data, topk_fractions, topk_limit,
                                  full_argv);
        }
        if (ar->parsed()) {
            stage = "bench-activation-ratio";
            return cmd_bench_activation_ratio(ar_opts, ar_ckpt, ar_grid, ar_count, full_argv);
        }
        if (sv->parsed()) {
            stage = "bench-snr-vs-n";
            return cmd_bench_snr_vs_n(sv_opts, sv_ckpt, sv_grid, sv_count, full_argv);
        }
        if (nz->parsed()) {
            stage = "bench-noise";
            return cmd_bench_noise(noise_opts, noise_ckpt, noise_data, noise_grid, noise_samples,
                                   noise_limit, full_argv);
        }
    } catch (const std::exception& e) {
        std::cerr << "pinch " << stage << ": error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
