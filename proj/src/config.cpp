#include "akgc/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace akgc {

const char* anchor_init_name(AnchorInit m) {
    return m == AnchorInit::Random ? "random" : "kmeans";
}

AnchorInit parse_anchor_init(std::string_view name) {
    if (name == "random") return AnchorInit::Random;
    if (name == "kmeans") return AnchorInit::KMeans;
    throw std::invalid_argument("unknown anchor init '" + std::string(name) +
                                "' (expected random|kmeans)");
}

const char* eval_split_name(EvalSplit s) {
    switch (s) {
        case EvalSplit::Train: return "train";
        case EvalSplit::Valid: return "valid";
        case EvalSplit::Test: return "test";
    }
    return "?";
}

EvalSplit parse_eval_split(std::string_view name) {
    if (name == "train") return EvalSplit::Train;
    if (name == "valid") return EvalSplit::Valid;
    if (name == "test") return EvalSplit::Test;
    throw std::invalid_argument("unknown split '" + std::string(name) +
                                "' (expected train|valid|test)");
}

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + value + "' as " +
                                want);
}

std::int32_t parse_i32(const std::string& key, const std::string& value) {
    std::int32_t out = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size()) bad_value(key, value, "an integer");
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size()) {
        bad_value(key, value, "an unsigned integer");
    }
    return out;
}

double parse_f64(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double out = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || value.empty()) bad_value(key, value, "a number");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "a boolean (true|false|1|0)");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const std::size_t comma = value.find(',', start);
        const std::string item =
            trim(value.substr(start, comma == std::string::npos ? comma : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void set_config_key(ConfigFile& config, const std::string& key, const std::string& value) {
    TrainConfig& c = config.train;
    AblateSpec& a = config.ablate;
    if (key == "n_anchors") c.n_anchors = parse_i32(key, value);
    else if (key == "d_structure") c.d_structure = parse_i32(key, value);
    else if (key == "d_unified") c.d_unified = parse_i32(key, value);
    else if (key == "max_len") c.max_len = parse_i32(key, value);
    else if (key == "hash_vocab") c.hash_vocab = parse_i32(key, value);
    else if (key == "kge") c.kge = parse_kge_model(value);
    else if (key == "tie_anchors") c.tie_anchors = parse_bool(key, value);
    else if (key == "anchor_init") c.anchor_init = parse_anchor_init(value);
    else if (key == "kmeans_iters") c.kmeans_iters = parse_i32(key, value);
    else if (key == "ridge") c.ridge = parse_f64(key, value);
    else if (key == "batch_size") c.batch_size = parse_i32(key, value);
    else if (key == "epochs") c.epochs = parse_i32(key, value);
    else if (key == "lr") c.lr = parse_f64(key, value);
    else if (key == "lr_min") c.lr_min = parse_f64(key, value);
    else if (key == "weight_decay") c.weight_decay = parse_f64(key, value);
    else if (key == "adam_beta1") c.adam_beta1 = parse_f64(key, value);
    else if (key == "adam_beta2") c.adam_beta2 = parse_f64(key, value);
    else if (key == "adam_eps") c.adam_eps = parse_f64(key, value);
    else if (key == "grad_clip") c.grad_clip = parse_f64(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "threads") c.threads = parse_i32(key, value);
    else if (key == "gamma_c") c.gamma_c = parse_f64(key, value);
    else if (key == "gamma_k") c.gamma_k = parse_f64(key, value);
    else if (key == "gamma_m") c.gamma_m = parse_f64(key, value);
    else if (key == "tau_init") c.tau_init = parse_f64(key, value);
    else if (key == "use_structure_loss") c.use_structure_loss = parse_bool(key, value);
    else if (key == "use_alignment_loss") c.use_alignment_loss = parse_bool(key, value);
    else if (key == "use_printed_margin") c.use_printed_margin = parse_bool(key, value);
    else if (key == "negatives") c.negatives = parse_negative_mode(value);
    else if (key == "mask_false_negatives") c.mask_false_negatives = parse_bool(key, value);
    else if (key == "lambda") c.lambda = parse_f64(key, value);
    else if (key == "alpha") c.alpha = parse_f64(key, value);
    else if (key == "beta") c.beta = parse_f64(key, value);
    else if (key == "khop") c.khop = parse_i32(key, value);
    else if (key == "eval_every") c.eval_every = parse_i32(key, value);
    else if (key == "eval_split") c.eval_split = parse_eval_split(value);
    else if (key == "target_mrr") c.target_mrr = parse_f64(key, value);
    else if (key == "ablate.kge") a.kge = split_list(value);
    else if (key == "ablate.anchor_init") a.anchor_init = split_list(value);
    else if (key == "ablate.negatives") a.negatives = split_list(value);
    else if (key == "ablate.losses") a.losses = split_list(value);
    else if (key == "ablate.n_anchors") {
        a.n_anchors.clear();
        for (const auto& item : split_list(value)) a.n_anchors.push_back(parse_i32(key, item));
    } else if (key == "ablate.seeds") {
        a.seeds.clear();
        for (const auto& item : split_list(value)) a.seeds.push_back(parse_u64(key, item));
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

ConfigFile parse_config_text(const std::string& text) {
    ConfigFile config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_number) +
                                        ": expected 'key = value', got '" + stripped + "'");
        }
        try {
            set_config_key(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(line_number) + ": " +
                                        e.what());
        }
    }
    return config;
}

ConfigFile load_config_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open config file " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

std::string to_config_text(const TrainConfig& c) {
    std::ostringstream out;
    out << "n_anchors = " << c.n_anchors << '\n'
        << "d_structure = " << c.d_structure << '\n'
        << "d_unified = " << c.d_unified << '\n'
        << "max_len = " << c.max_len << '\n'
        << "hash_vocab = " << c.hash_vocab << '\n'
        << "kge = " << kge_model_name(c.kge) << '\n'
        << "tie_anchors = " << (c.tie_anchors ? "true" : "false") << '\n'
        << "anchor_init = " << anchor_init_name(c.anchor_init) << '\n'
        << "kmeans_iters = " << c.kmeans_iters << '\n'
        << "ridge = " << fmt(c.ridge) << '\n'
        << "batch_size = " << c.batch_size << '\n'
        << "epochs = " << c.epochs << '\n'
        << "lr = " << fmt(c.lr) << '\n'
        << "lr_min = " << fmt(c.lr_min) << '\n'
        << "weight_decay = " << fmt(c.weight_decay) << '\n'
        << "adam_beta1 = " << fmt(c.adam_beta1) << '\n'
        << "adam_beta2 = " << fmt(c.adam_beta2) << '\n'
        << "adam_eps = " << fmt(c.adam_eps) << '\n'
        << "grad_clip = " << fmt(c.grad_clip) << '\n'
        << "seed = " << c.seed << '\n'
        << "threads = " << c.threads << '\n'
        << "gamma_c = " << fmt(c.gamma_c) << '\n'
        << "gamma_k = " << fmt(c.gamma_k) << '\n'
        << "gamma_m = " << fmt(c.gamma_m) << '\n'
        << "tau_init = " << fmt(c.tau_init) << '\n'
        << "use_structure_loss = " << (c.use_structure_loss ? "true" : "false") << '\n'
        << "use_alignment_loss = " << (c.use_alignment_loss ? "true" : "false") << '\n'
        << "use_printed_margin = " << (c.use_printed_margin ? "true" : "false") << '\n'
        << "negatives = " << negative_mode_name(c.negatives) << '\n'
        << "mask_false_negatives = " << (c.mask_false_negatives ? "true" : "false") << '\n'
        << "lambda = " << fmt(c.lambda) << '\n'
        << "alpha = " << fmt(c.alpha) << '\n'
        << "beta = " << fmt(c.beta) << '\n'
        << "khop = " << c.khop << '\n'
        << "eval_every = " << c.eval_every << '\n'
        << "eval_split = " << eval_split_name(c.eval_split) << '\n'
        << "target_mrr = " << fmt(c.target_mrr) << '\n';
    return out.str();
}

void validate(const TrainConfig& c) {
    const auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("config: ") + what);
    };
    require(c.n_anchors >= 1, "n_anchors must be >= 1");
    require(c.d_structure >= 1, "d_structure must be >= 1");
    require(c.d_unified >= 1, "d_unified must be >= 1");
    require(c.max_len > c.n_anchors + 2, "max_len must exceed n_anchors + 2");
    require(c.hash_vocab >= 2, "hash_vocab must be >= 2");
    if (c.kge == KgeModel::ComplEx || c.kge == KgeModel::RotatE) {
        require(c.d_structure % 2 == 0, "d_structure must be even for complex/rotate");
    }
    require(c.kmeans_iters >= 1, "kmeans_iters must be >= 1");
    require(c.ridge >= 0.0, "ridge must be >= 0");
    require(c.batch_size >= 2, "batch_size must be >= 2 (in-batch negatives)");
    require(c.epochs >= 1, "epochs must be >= 1");
    require(c.lr > 0.0, "lr must be > 0");
    require(c.lr_min >= 0.0 && c.lr_min <= c.lr, "lr_min must lie in [0, lr]");
    require(c.weight_decay >= 0.0, "weight_decay must be >= 0");
    require(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0, "adam_beta1 must lie in [0, 1)");
    require(c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0, "adam_beta2 must lie in [0, 1)");
    require(c.adam_eps > 0.0, "adam_eps must be > 0");
    require(c.grad_clip >= 0.0, "grad_clip must be >= 0");
    require(c.threads >= 0, "threads must be >= 0");
    require(std::isfinite(c.gamma_c), "gamma_c must be finite");
    require(c.gamma_k >= 0.0, "gamma_k must be >= 0");
    require(c.gamma_m >= 0.0, "gamma_m must be >= 0");
    require(c.tau_init > 0.0, "tau_init must be > 0");
    require(c.lambda >= 0.0, "lambda must be >= 0");
    require(c.alpha >= 0.0, "alpha must be >= 0");
    require(c.beta >= 0.0, "beta must be >= 0");
    require(c.khop >= 0, "khop must be >= 0");
    require(c.eval_every >= 1, "eval_every must be >= 1");
    require(c.target_mrr >= 0.0 && c.target_mrr <= 1.0, "target_mrr must lie in [0, 1]");
}

} // namespace akgc
