#include "doctest.h"

#include "akgc/config.hpp"
#include "testutil.hpp"

#include <string>

using namespace akgc;

TEST_CASE("config text round-trips exactly through the canonical form") {
    TrainConfig c;
    c.n_anchors = 7;
    c.d_structure = 48;
    c.kge = KgeModel::RotatE;
    c.anchor_init = AnchorInit::Random;
    c.lr = 0.0012345678901234567;
    c.tau_init = 1.0 / 3.0;
    c.seed = 18446744073709551615ull; // uint64 max survives
    c.use_structure_loss = false;
    c.negatives = NegativeMode::InBatch;
    c.eval_split = EvalSplit::Test;
    c.target_mrr = 0.95;

    const std::string text = to_config_text(c);
    const ConfigFile parsed = parse_config_text(text);
    CHECK(to_config_text(parsed.train) == text); // bitwise identical serialization
    CHECK(parsed.train.lr == c.lr);
    CHECK(parsed.train.tau_init == c.tau_init);
    CHECK(parsed.train.seed == c.seed);
    CHECK(parsed.train.kge == KgeModel::RotatE);
    CHECK(parsed.train.negatives == NegativeMode::InBatch);
    CHECK(parsed.train.eval_split == EvalSplit::Test);
    CHECK(!parsed.train.use_structure_loss);
}

TEST_CASE("parser strips comments and blank lines") {
    const std::string text =
        "# full line comment\n"
        "\n"
        "lr = 0.5   # trailing comment\n"
        "   epochs   =   3\n";
    const ConfigFile parsed = parse_config_text(text);
    CHECK(parsed.train.lr == 0.5);
    CHECK(parsed.train.epochs == 3);
    // untouched keys keep their defaults
    CHECK(parsed.train.batch_size == TrainConfig{}.batch_size);
}

TEST_CASE("parse errors carry the line number and offending key") {
    CHECK_THROWS_WITH_AS(parse_config_text("lr = 0.1\nnot a pair\n"),
                         doctest::Contains("line 2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("mystery_key = 5\n"),
                         doctest::Contains("mystery_key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("epochs = banana\n"),
                         doctest::Contains("banana"), std::invalid_argument);
    CHECK_THROWS(parse_config_text("kge = unknown_model\n"));
    CHECK_THROWS(parse_config_text("tie_anchors = maybe\n"));
}

TEST_CASE("set_config_key mutates a single field") {
    ConfigFile cfg;
    set_config_key(cfg, "gamma_k", "12.5");
    CHECK(cfg.train.gamma_k == 12.5);
    set_config_key(cfg, "mask_false_negatives", "false");
    CHECK(!cfg.train.mask_false_negatives);
    set_config_key(cfg, "anchor_init", "kmeans");
    CHECK(cfg.train.anchor_init == AnchorInit::KMeans);
    CHECK_THROWS(set_config_key(cfg, "nonsense", "1"));
}

TEST_CASE("config files load from disk and missing files are reported") {
    testutil::TempDir dir;
    testutil::write_file(dir.path / "run.cfg", "epochs = 9\nlr = 0.25\n");
    const ConfigFile cfg = load_config_file(dir.path / "run.cfg");
    CHECK(cfg.train.epochs == 9);
    CHECK(cfg.train.lr == 0.25);
    CHECK_THROWS(load_config_file(dir.path / "absent.cfg"));
}

TEST_CASE("validate rejects inconsistent settings") {
    TrainConfig ok;
    CHECK_NOTHROW(validate(ok));

    TrainConfig c = ok;
    c.kge = KgeModel::ComplEx;
    c.d_structure = 33;
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("even"), std::invalid_argument);
    c.kge = KgeModel::RotatE;
    CHECK_THROWS(validate(c));
    c.d_structure = 34;
    CHECK_NOTHROW(validate(c));

    c = ok;
    c.max_len = c.n_anchors + 2; // no room for text + separator
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("max_len"), std::invalid_argument);

    c = ok;
    c.batch_size = 1;
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("batch_size"), std::invalid_argument);

    c = ok;
    c.lr_min = c.lr * 2.0;
    CHECK_THROWS(validate(c));

    c = ok;
    c.tau_init = 0.0;
    CHECK_THROWS(validate(c));

    c = ok;
    c.n_anchors = 0;
    CHECK_THROWS(validate(c));
}

TEST_CASE("ablation axes parse comma-separated lists") {
    const std::string text =
        "lr = 0.01\n"
        "ablate.kge = transe, distmult ,rotate\n"
        "ablate.losses = full,no_structure\n"
        "ablate.n_anchors = 4,8\n"
        "ablate.seeds = 1,2,3\n";
    const ConfigFile cfg = parse_config_text(text);
    CHECK(cfg.ablate.kge == std::vector<std::string>{"transe", "distmult", "rotate"});
    CHECK(cfg.ablate.losses == std::vector<std::string>{"full", "no_structure"});
    CHECK(cfg.ablate.n_anchors == std::vector<std::int32_t>{4, 8});
    CHECK(cfg.ablate.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(cfg.ablate.negatives.empty()); // unset axis stays empty
    CHECK(cfg.train.lr == 0.01);         // plain keys coexist with ablate keys
}

TEST_CASE("enum helpers name every member") {
    CHECK(parse_anchor_init("random") == AnchorInit::Random);
    CHECK(parse_anchor_init("kmeans") == AnchorInit::KMeans);
    CHECK(anchor_init_name(AnchorInit::Random) == std::string("random"));
    CHECK_THROWS(parse_anchor_init("pca"));

    CHECK(parse_eval_split("train") == EvalSplit::Train);
    CHECK(parse_eval_split("valid") == EvalSplit::Valid);
    CHECK(parse_eval_split("test") == EvalSplit::Test);
    CHECK(eval_split_name(EvalSplit::Test) == std::string("test"));
    CHECK_THROWS(parse_eval_split("dev"));
}
