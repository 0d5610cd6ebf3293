#include "CLI11.hpp"

#include "akgc/anchors.hpp"
#include "akgc/checkpoint.hpp"
#include "akgc/config.hpp"
#include "akgc/dataset.hpp"
#include "akgc/evaluate.hpp"
#include "akgc/model.hpp"
#include "akgc/parallel.hpp"
#include "akgc/rng.hpp"
#include "akgc/trainer.hpp"
#include "akgc/version.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace akgc;

namespace {

constexpr const char* kConfigKeys[] = {
    "n_anchors",      "d_structure",       "d_unified",  "max_len",
    "hash_vocab",     "kge",               "tie_anchors", "anchor_init",
    "kmeans_iters",   "ridge",             "batch_size", "epochs",
    "lr",             "lr_min",            "weight_decay", "adam_beta1",
    "adam_beta2",     "adam_eps",          "grad_clip",  "seed",
    "threads",        "gamma_c",           "gamma_k",    "gamma_m",
    "tau_init",       "use_structure_loss", "use_alignment_loss",
    "use_printed_margin", "negatives",     "mask_false_negatives",
    "lambda",         "alpha",             "beta",       "khop",
    "eval_every",     "eval_split",        "target_mrr",
};

std::string dashed(std::string key) {
    for (char& c : key) {
        if (c == '_') c = '-';
    }
    return key;
}

// Every config key is reachable as a --flag; overrides apply after the file.
void add_config_overrides(CLI::App* cmd,
                          std::vector<std::pair<std::string, std::string>>& overrides) {
    for (const char* key : kConfigKeys) {
        cmd->add_option_function<std::string>(
               "--" + dashed(key),
               [key, &overrides](const std::string& value) { overrides.emplace_back(key, value); },
               std::string("override config key ") + key)
            ->take_last();
    }
    cmd->add_flag_callback(
        "--no-structure-loss",
        [&overrides] { overrides.emplace_back("use_structure_loss", "false"); },
        "disable the structure-scoring loss term");
    cmd->add_flag_callback(
        "--no-alignment-loss",
        [&overrides] { overrides.emplace_back("use_alignment_loss", "false"); },
        "disable the alignment loss term");
}

TrainConfig resolve_config(const std::string& config_path,
                           const std::vector<std::pair<std::string, std::string>>& overrides,
                           AblateSpec* ablate = nullptr) {
    ConfigFile file;
    if (!config_path.empty()) file = load_config_file(config_path);
    for (const auto& [key, value] : overrides) set_config_key(file, key, value);
    if (ablate != nullptr) *ablate = file.ablate;
    return file.train;
}

// --data accepts the archive itself or the directory prepare wrote it into.
fs::path resolve_prepared(const fs::path& data) {
    if (fs::is_directory(data)) return data / "prepared.akgd";
    return data;
}

GraphMode parse_mode(const std::string& name) {
    if (name == "transductive") return GraphMode::Transductive;
    if (name == "inductive") return GraphMode::Inductive;
    throw std::invalid_argument("unknown mode '" + name + "' (expected transductive|inductive)");
}

Split parse_split(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "valid") return Split::Valid;
    if (name == "test") return Split::Test;
    throw std::invalid_argument("unknown split '" + name + "' (expected train|valid|test)");
}

void print_graph_stats(const KnowledgeGraph& graph, std::ostream& out) {
    const std::int32_t raw = graph.raw_relation_count;
    out << graph.num_entities() << " entities, " << raw << " relations ("
        << graph.num_relations() << " augmented)\n";
    out << "train " << graph.train.size() << "  valid " << graph.valid.size() << "  test "
        << graph.test.size();
    if (graph.mode == GraphMode::Inductive) {
        out << "  inductive entities " << graph.num_inductive_entities();
    }
    out << '\n';
}

int run_prepare(const std::string& data_dir, const std::string& mode_name,
                const std::string& out_dir, int khop) {
    KnowledgeGraph graph = load_dataset(data_dir, parse_mode(mode_name));
    for (const std::string& w : graph.load_warnings) std::cerr << "warning: " << w << '\n';
    add_inverse_relations(graph);
    PreparedData data = prepare_dataset(std::move(graph), khop);
    fs::create_directories(out_dir);
    const fs::path out = fs::path(out_dir) / "prepared.akgd";
    save_prepared(data, out);
    print_graph_stats(data.graph, std::cout);
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

int run_init_anchors(const std::string& graph_dir, const std::string& method, std::int32_t n,
                     std::int32_t dim, const std::string& features_file, const std::string& out,
                     std::uint64_t seed, std::int32_t kmeans_iters, double ridge,
                     std::int32_t hash_vocab) {
    KnowledgeGraph graph = load_dataset(graph_dir, GraphMode::Transductive);
    for (const std::string& w : graph.load_warnings) std::cerr << "warning: " << w << '\n';
    const std::int32_t V = graph.num_entities();
    AnchorDecomposition anchors;
    if (method == "random") {
        anchors = init_random(V, n, dim, graph.num_relations(), derive_seed(seed, "anchors"));
    } else if (method == "kmeans") {
        if (V < n) {
            throw std::runtime_error("kmeans needs at least as many entities as anchors (" +
                                     std::to_string(V) + " < " + std::to_string(n) + ")");
        }
        Mat features;
        if (!features_file.empty()) {
            features = read_feature_matrix(features_file);
            if (features.rows() != V) {
                throw std::runtime_error("feature matrix has " + std::to_string(features.rows()) +
                                         " rows for " + std::to_string(V) + " entities");
            }
        } else {
            features = text_feature_matrix(graph, dim, hash_vocab).rows;
        }
        const KMeansResult km = init_kmeans(features, n, kmeans_iters, derive_seed(seed, "kmeans"));
        anchors.A = km.centroids;
        anchors.T = fit_transform(features, anchors.A, ridge);
        const double b = 6.0 / std::sqrt(static_cast<double>(features.cols()));
        Rng rng(derive_seed(seed, "relations"));
        anchors.R.resize(graph.num_relations(), features.cols());
        for (Eigen::Index i = 0; i < anchors.R.rows(); ++i) {
            for (Eigen::Index j = 0; j < anchors.R.cols(); ++j) {
                anchors.R(i, j) = rng.uniform(-b, b);
            }
        }
        std::cout << "kmeans objective: " << (km.objective.empty() ? 0.0 : km.objective.back())
                  << " after " << km.iterations << " iterations\n";
    } else {
        throw std::invalid_argument("unknown method '" + method + "' (expected random|kmeans)");
    }

    Checkpoint ckpt;
    const auto push = [&ckpt](const char* name, const Mat& m) {
        NamedTensor t;
        t.name = name;
        t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
        t.values.assign(m.data(), m.data() + m.size());
        ckpt.tensors.push_back(std::move(t));
    };
    push("anchors.A", anchors.A);
    push("anchors.T", anchors.T);
    push("anchors.R", anchors.R);
    save_checkpoint(ckpt, out);
    std::cout << "wrote " << out << " (A " << anchors.A.rows() << "x" << anchors.A.cols()
              << ", T " << anchors.T.rows() << "x" << anchors.T.cols() << ", R "
              << anchors.R.rows() << "x" << anchors.R.cols() << ")\n";
    return 0;
}

int run_train(const std::string& data_path, const std::string& config_path,
              const std::vector<std::pair<std::string, std::string>>& overrides,
              const std::string& out_dir, const std::string& resume) {
    const TrainConfig config = resolve_config(config_path, overrides);
    validate(config);
    const PreparedData data = load_prepared(resolve_prepared(data_path));

    Model model;
    if (resume.empty()) {
        model = build_model(config, data.graph);
    } else {
        model.enc.tie_anchors = config.tie_anchors; // shapes come from the checkpoint
    }

    TrainOptions options;
    options.out_dir = out_dir;
    options.resume_from = resume;
    options.log = &std::cerr;
    const TrainResult result = train(data, model, config, options);

    std::cout << "steps = " << result.steps << '\n';
    if (!result.epochs.empty()) {
        const EpochLog& last = result.epochs.back();
        char buf[128];
        std::snprintf(buf, sizeof(buf), "final loss = %.17g\n", last.loss_total);
        std::cout << buf;
        if (last.eval_mrr.has_value()) {
            std::snprintf(buf, sizeof(buf), "final mrr = %.17g\n", *last.eval_mrr);
            std::cout << buf;
        }
    }
    if (result.best_mrr.has_value()) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "best mrr = %.17g (epoch %d)\n", *result.best_mrr,
                      result.best_epoch);
        std::cout << buf;
    }
    if (result.reached_target) std::cout << "stopped early at target mrr\n";
    return 0;
}

// Rebuilds a model purely from a checkpoint (no anchor re-initialization);
// entity weights are dropped for inductive data, so serving can never read them.
Model model_from_checkpoint(const Checkpoint& ckpt, const TrainConfig& config, bool inductive) {
    Model model;
    model.enc.tie_anchors = config.tie_anchors;
    restore_model(ckpt, model, /*require_all=*/true, /*drop_entity_weights=*/inductive);
    return model;
}

int run_eval(const std::string& data_path, const std::string& checkpoint_path,
             const std::string& split_name, const std::string& out_dir, int threads,
             double lambda_override, double alpha_override, double beta_override) {
    const PreparedData data = load_prepared(resolve_prepared(data_path));
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    if (ckpt.config_text.empty()) {
        throw std::runtime_error("checkpoint carries no config snapshot: " + checkpoint_path);
    }
    TrainConfig config = parse_config_text(ckpt.config_text).train;
    if (threads >= 0) config.threads = threads;
    if (lambda_override >= 0) config.lambda = lambda_override;
    if (alpha_override >= 0) config.alpha = alpha_override;
    if (beta_override >= 0) config.beta = beta_override;

    const bool inductive = data.graph.mode == GraphMode::Inductive;
    const Model model = model_from_checkpoint(ckpt, config, inductive);
    const Evaluator evaluator(data, model, config, config.threads);
    const Split split = parse_split(split_name);
    const RankingReport report = evaluator.evaluate(split);

    std::cout << report_table(report);
    if (out_dir.empty()) {
        std::cout << report_metrics_text(report);
    } else {
        fs::create_directories(out_dir);
        std::ofstream metrics(fs::path(out_dir) / "metrics.txt");
        metrics << report_metrics_text(report);
        std::ofstream csv(fs::path(out_dir) / "relation_errors.csv");
        csv << report_relation_csv(report);
        std::cout << "wrote " << (fs::path(out_dir) / "metrics.txt").string() << ", "
                  << (fs::path(out_dir) / "relation_errors.csv").string() << '\n';
    }
    return 0;
}

std::int32_t resolve_entity(const KnowledgeGraph& graph, const std::string& token,
                            bool inductive) {
    const auto& pool = inductive ? graph.inductive_entities : graph.entities;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].ext_id == token) return static_cast<std::int32_t>(i);
    }
    try {
        const int idx = std::stoi(token);
        if (idx >= 0 && static_cast<std::size_t>(idx) < pool.size()) return idx;
    } catch (const std::exception&) {
    }
    throw std::runtime_error("unknown entity '" + token + "'");
}

std::int32_t resolve_relation(const KnowledgeGraph& graph, const std::string& token) {
    for (std::size_t i = 0; i < graph.relations.size(); ++i) {
        if (graph.relations[i].ext_id == token) return static_cast<std::int32_t>(i);
    }
    try {
        const int idx = std::stoi(token);
        if (idx >= 0 && idx < graph.num_relations()) return idx;
    } catch (const std::exception&) {
    }
    throw std::runtime_error("unknown relation '" + token + "'");
}

int run_predict(const std::string& data_path, const std::string& checkpoint_path,
                const std::string& head_token, const std::string& relation_token, int topk,
                int threads) {
    const PreparedData data = load_prepared(resolve_prepared(data_path));
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    if (ckpt.config_text.empty()) {
        throw std::runtime_error("checkpoint carries no config snapshot: " + checkpoint_path);
    }
    TrainConfig config = parse_config_text(ckpt.config_text).train;
    if (threads >= 0) config.threads = threads;

    const bool inductive = data.graph.mode == GraphMode::Inductive;
    const std::int32_t head = resolve_entity(data.graph, head_token, inductive);
    const std::int32_t relation = resolve_relation(data.graph, relation_token);
    const Model model = model_from_checkpoint(ckpt, config, inductive);
    const Evaluator evaluator(data, model, config, config.threads);
    const auto ranked = evaluator.rank_candidates(head, relation);

    const int k = std::min<int>(topk, static_cast<int>(ranked.size()));
    for (int i = 0; i < k; ++i) {
        const auto& [score, entity] = ranked[static_cast<std::size_t>(i)];
        const EntityRecord& rec = data.graph.entity_record(entity, inductive);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6f", score);
        std::cout << (i + 1) << '\t' << rec.ext_id << '\t' << rec.name << '\t' << buf << '\n';
    }
    return 0;
}

struct AblateCell {
    TrainConfig config;
    std::string label;
    std::string losses_name = "full";
};

void apply_losses(TrainConfig& config, const std::string& value) {
    if (value == "full") {
        config.use_structure_loss = true;
        config.use_alignment_loss = true;
    } else if (value == "no_structure") {
        config.use_structure_loss = false;
        config.use_alignment_loss = true;
    } else if (value == "no_alignment") {
        config.use_structure_loss = true;
        config.use_alignment_loss = false;
    } else if (value == "none") {
        config.use_structure_loss = false;
        config.use_alignment_loss = false;
    } else {
        throw std::invalid_argument("unknown losses value '" + value +
                                    "' (expected full|no_structure|no_alignment|none)");
    }
}

std::string losses_name(const TrainConfig& config) {
    if (config.use_structure_loss && config.use_alignment_loss) return "full";
    if (!config.use_structure_loss && config.use_alignment_loss) return "no_structure";
    if (config.use_structure_loss && !config.use_alignment_loss) return "no_alignment";
    return "none";
}

std::vector<AblateCell> ablate_grid(const TrainConfig& base, const AblateSpec& spec) {
    // odometer over the declared axes; empty axes contribute the base value
    std::vector<AblateCell> cells;
    const auto kges = spec.kge.empty() ? std::vector<std::string>{""} : spec.kge;
    const auto inits = spec.anchor_init.empty() ? std::vector<std::string>{""} : spec.anchor_init;
    const auto anchors = spec.n_anchors.empty() ? std::vector<std::int32_t>{-1} : spec.n_anchors;
    const auto negs = spec.negatives.empty() ? std::vector<std::string>{""} : spec.negatives;
    const auto losses = spec.losses.empty() ? std::vector<std::string>{""} : spec.losses;
    const auto seeds = spec.seeds.empty() ? std::vector<std::uint64_t>{} : spec.seeds;
    const auto seed_axis = seeds.empty() ? std::vector<std::uint64_t>{base.seed} : seeds;

    for (const auto& kge : kges) {
        for (const auto& init : inits) {
            for (const auto n : anchors) {
                for (const auto& neg : negs) {
                    for (const auto& loss : losses) {
                        for (const auto seed : seed_axis) {
                            AblateCell cell;
                            cell.config = base;
                            std::ostringstream label;
                            const auto add = [&label](const std::string& part) {
                                if (label.tellp() > 0) label << ',';
                                label << part;
                            };
                            if (!kge.empty()) {
                                cell.config.kge = parse_kge_model(kge);
                                add("kge=" + kge);
                            }
                            if (!init.empty()) {
                                cell.config.anchor_init = parse_anchor_init(init);
                                add("anchor_init=" + init);
                            }
                            if (n >= 0) {
                                cell.config.n_anchors = n;
                                add("n_anchors=" + std::to_string(n));
                            }
                            if (!neg.empty()) {
                                cell.config.negatives = parse_negative_mode(neg);
                                add("negatives=" + neg);
                            }
                            if (!loss.empty()) {
                                apply_losses(cell.config, loss);
                                add("losses=" + loss);
                            }
                            if (!spec.seeds.empty()) {
                                cell.config.seed = seed;
                                add("seed=" + std::to_string(seed));
                            }
                            cell.losses_name = losses_name(cell.config);
                            cell.label = label.str().empty() ? "base" : label.str();
                            cells.push_back(std::move(cell));
                        }
                    }
                }
            }
        }
    }
    return cells;
}

int run_ablate(const std::string& data_path, const std::string& config_path,
               const std::vector<std::pair<std::string, std::string>>& overrides,
               const std::string& out_dir) {
    AblateSpec spec;
    const TrainConfig base = resolve_config(config_path, overrides, &spec);
    validate(base);
    const PreparedData data = load_prepared(resolve_prepared(data_path));
    const std::vector<AblateCell> cells = ablate_grid(base, spec);

    const bool writing = !out_dir.empty();
    if (writing) fs::create_directories(out_dir);
    std::ostringstream summary;
    summary << "cell,kge,anchor_init,n_anchors,negatives,losses,seed,mrr,hits1,hits3,hits10\n";

    for (std::size_t i = 0; i < cells.size(); ++i) {
        const AblateCell& cell = cells[i];
        std::cerr << "[" << (i + 1) << "/" << cells.size() << "] " << cell.label << '\n';
        Model model = build_model(cell.config, data.graph);
        TrainOptions options;
        options.log = &std::cerr;
        train(data, model, cell.config, options);

        const Evaluator evaluator(data, model, cell.config, cell.config.threads);
        Split split = Split::Valid;
        switch (cell.config.eval_split) {
            case EvalSplit::Train: split = Split::Train; break;
            case EvalSplit::Valid: split = Split::Valid; break;
            case EvalSplit::Test: split = Split::Test; break;
        }
        const RankingReport report = evaluator.evaluate(split);

        char row[256];
        std::snprintf(row, sizeof(row), "%s,%s,%s,%d,%s,%s,%llu,%.6f,%.6f,%.6f,%.6f\n",
                      cell.label.c_str(), kge_model_name(cell.config.kge),
                      anchor_init_name(cell.config.anchor_init), cell.config.n_anchors,
                      negative_mode_name(cell.config.negatives), cell.losses_name.c_str(),
                      static_cast<unsigned long long>(cell.config.seed), report.all.mrr,
                      report.all.hits1, report.all.hits3, report.all.hits10);
        summary << row;

        if (writing) {
            std::string slug = cell.label;
            for (char& c : slug) {
                if (c == ',' || c == '=' || c == '/') c = '_';
            }
            char prefix[32];
            std::snprintf(prefix, sizeof(prefix), "cell_%03zu_", i);
            const fs::path cell_dir = fs::path(out_dir) / (prefix + slug);
            fs::create_directories(cell_dir);
            std::ofstream metrics(cell_dir / "metrics.txt");
            metrics << report_metrics_text(report);
            std::ofstream csv(cell_dir / "relation_errors.csv");
            csv << report_relation_csv(report);
        } else {
            std::cout << "# " << cell.label << '\n' << report_metrics_text(report);
        }
    }

    if (writing) {
        std::ofstream out(fs::path(out_dir) / "summary.csv");
        out << summary.str();
    }
    std::cout << summary.str();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"anchor-based knowledge graph completion toolkit"};
    app.set_version_flag("--version", std::string("akgc ") + kToolkitVersion +
                                          " (checkpoint format " +
                                          std::to_string(kCheckpointFormatVersion) + ")");
    app.require_subcommand(1);

    // prepare
    auto* prepare = app.add_subcommand("prepare", "index a raw dataset directory");
    std::string prep_data, prep_mode = "transductive", prep_out;
    int prep_khop = 2;
    prepare->add_option("--data", prep_data, "dataset directory")->required();
    prepare->add_option("--mode", prep_mode, "transductive|inductive");
    prepare->add_option("--out", prep_out, "output directory")->required();
    prepare->add_option("--khop", prep_khop, "neighborhood radius for re-ranking");

    // init-anchors
    auto* init_cmd = app.add_subcommand("init-anchors", "write an anchor decomposition");
    std::string ia_graph, ia_method = "kmeans", ia_features, ia_out;
    std::int32_t ia_n = 10, ia_dim = 128, ia_iters = 50, ia_hash = 32768;
    std::uint64_t ia_seed = 42;
    double ia_ridge = 1e-6;
    init_cmd->add_option("--graph", ia_graph, "raw dataset directory")->required();
    init_cmd->add_option("--method", ia_method, "random|kmeans");
    init_cmd->add_option("--n", ia_n, "number of anchors");
    init_cmd->add_option("--dim", ia_dim, "structure dimension");
    init_cmd->add_option("--features", ia_features, "external feature matrix (header: V D)");
    init_cmd->add_option("--out", ia_out, "output checkpoint file")->required();
    init_cmd->add_option("--seed", ia_seed, "random seed");
    init_cmd->add_option("--iters", ia_iters, "k-means iteration cap");
    init_cmd->add_option("--ridge", ia_ridge, "ridge for the transformation solve");
    init_cmd->add_option("--hash-vocab", ia_hash, "hashed token vocabulary size");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a model on a prepared dataset");
    std::string tr_data, tr_config, tr_out, tr_resume;
    std::vector<std::pair<std::string, std::string>> tr_overrides;
    train_cmd->add_option("--data", tr_data, "prepared dataset (file or directory)")->required();
    train_cmd->add_option("--config", tr_config, "config file (key = value lines)");
    train_cmd->add_option("--out", tr_out, "checkpoint directory (best.akgc / last.akgc)");
    train_cmd->add_option("--resume", tr_resume, "checkpoint to resume from");
    add_config_overrides(train_cmd, tr_overrides);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "rank a split and report metrics");
    std::string ev_data, ev_ckpt, ev_split = "test", ev_out;
    int ev_threads = -1;
    double ev_lambda = -1, ev_alpha = -1, ev_beta = -1;
    eval_cmd->add_option("--data", ev_data, "prepared dataset (file or directory)")->required();
    eval_cmd->add_option("--checkpoint", ev_ckpt, "trained checkpoint")->required();
    eval_cmd->add_option("--split", ev_split, "train|valid|test");
    eval_cmd->add_option("--out", ev_out, "directory for metrics.txt / relation_errors.csv");
    eval_cmd->add_option("--threads", ev_threads, "worker threads (0 = all cores)");
    eval_cmd->add_option("--lambda", ev_lambda, "alignment-distance weight override");
    eval_cmd->add_option("--alpha", ev_alpha, "k-hop re-ranking bonus override");
    eval_cmd->add_option("--beta", ev_beta, "self-candidate penalty override");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "top-k tails for one (head, relation)");
    std::string pr_data, pr_ckpt, pr_head, pr_rel;
    int pr_topk = 10, pr_threads = -1;
    predict_cmd->add_option("--data", pr_data, "prepared dataset (file or directory)")->required();
    predict_cmd->add_option("--checkpoint", pr_ckpt, "trained checkpoint")->required();
    predict_cmd->add_option("--head", pr_head, "head entity (external id or index)")->required();
    predict_cmd->add_option("--relation", pr_rel, "relation (external id or index)")->required();
    predict_cmd->add_option("--topk", pr_topk, "number of candidates to print");
    predict_cmd->add_option("--threads", pr_threads, "worker threads (0 = all cores)");

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "run the configured ablation grid");
    std::string ab_data, ab_config, ab_out;
    std::vector<std::pair<std::string, std::string>> ab_overrides;
    ablate_cmd->add_option("--data", ab_data, "prepared dataset (file or directory)")->required();
    ablate_cmd->add_option("--config", ab_config, "config file with ablate.* axes");
    ablate_cmd->add_option("--out", ab_out, "directory for per-cell reports + summary.csv");
    add_config_overrides(ablate_cmd, ab_overrides);

    try {
        app.parse(argc, argv);
        if (prepare->parsed()) return run_prepare(prep_data, prep_mode, prep_out, prep_khop);
        if (init_cmd->parsed()) {
            return run_init_anchors(ia_graph, ia_method, ia_n, ia_dim, ia_features, ia_out,
                                    ia_seed, ia_iters, ia_ridge, ia_hash);
        }
        if (train_cmd->parsed()) {
            return run_train(tr_data, tr_config, tr_overrides, tr_out, tr_resume);
        }
        if (eval_cmd->parsed()) {
            return run_eval(ev_data, ev_ckpt, ev_split, ev_out, ev_threads, ev_lambda, ev_alpha,
                            ev_beta);
        }
        if (predict_cmd->parsed()) {
            return run_predict(pr_data, pr_ckpt, pr_head, pr_rel, pr_topk, pr_threads);
        }
        if (ablate_cmd->parsed()) return run_ablate(ab_data, ab_config, ab_overrides, ab_out);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
