#pragma once

#include "akgc/kge.hpp"
#include "akgc/sampling.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace akgc {

enum class AnchorInit { Random, KMeans };

const char* anchor_init_name(AnchorInit m);
AnchorInit parse_anchor_init(std::string_view name);

enum class EvalSplit { Train, Valid, Test };

const char* eval_split_name(EvalSplit s);
EvalSplit parse_eval_split(std::string_view name);

// Every training/inference hyperparameter, addressable by the same key in the
// config file, on the command line, and in the checkpoint snapshot.
struct TrainConfig {
    // model
    std::int32_t n_anchors = 10;
    std::int32_t d_structure = 128;
    std::int32_t d_unified = 128;
    std::int32_t max_len = 60;
    std::int32_t hash_vocab = 32768;
    KgeModel kge = KgeModel::TransE;
    bool tie_anchors = true;
    AnchorInit anchor_init = AnchorInit::KMeans;
    std::int32_t kmeans_iters = 50;
    double ridge = 1e-6;
    // optimization
    std::int32_t batch_size = 32;
    std::int32_t epochs = 50;
    double lr = 1e-3;
    double lr_min = 0.0;
    double weight_decay = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip = 0.0; // 0 = off
    std::uint64_t seed = 42;
    std::int32_t threads = 0; // 0 = all cores; 1 = bit-reproducible
    // losses
    double gamma_c = 0.02;
    double gamma_k = 9.0;
    double gamma_m = 1.0;
    double tau_init = 0.05;
    bool use_structure_loss = true;
    bool use_alignment_loss = true;
    bool use_printed_margin = false;
    // negatives
    NegativeMode negatives = NegativeMode::InBatchPlusUniform;
    bool mask_false_negatives = true;
    // inference
    double lambda = 0.01;
    double alpha = 0.05;
    double beta = 0.1;
    std::int32_t khop = 2;
    // evaluation control
    std::int32_t eval_every = 1;   // epochs between validation passes
    EvalSplit eval_split = EvalSplit::Valid;
    double target_mrr = 0.0;       // > 0: stop once the eval split reaches it
};

// Ablation grid, declared with `ablate.`-prefixed keys (comma-separated
// values). Empty axes fall back to the base config's single value.
struct AblateSpec {
    std::vector<std::string> kge;
    std::vector<std::string> anchor_init;
    std::vector<std::int32_t> n_anchors;
    std::vector<std::string> negatives;
    std::vector<std::string> losses; // full | no_structure | no_alignment | none
    std::vector<std::uint64_t> seeds;
};

struct ConfigFile {
    TrainConfig train;
    AblateSpec ablate;
};

// Sets one `key = value` pair; throws on unknown keys or unparseable values.
void set_config_key(ConfigFile& config, const std::string& key, const std::string& value);

// Flat text: one `key = value` per line, `#` comments, blank lines ignored.
ConfigFile parse_config_text(const std::string& text);
ConfigFile load_config_file(const std::filesystem::path& file);

// Canonical serialization: every key, fixed order, doubles at full precision.
// Parsing the output reproduces the config exactly.
std::string to_config_text(const TrainConfig& config);

// Cross-field checks (positive dims, even structure dimension for the complex
// scorers, margins in range). Throws with the offending key named.
void validate(const TrainConfig& config);

} // namespace akgc
