#include "doctest.h"

#include "akgc/checkpoint.hpp"
#include "akgc/dataset.hpp"
#include "akgc/model.hpp"
#include "testutil.hpp"

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

using namespace akgc;

namespace {

Model toy_model(std::uint64_t seed = 3) {
    testutil::TempDir dir;
    testutil::write_raw_dataset(dir.path, testutil::tiny_dataset());
    const KnowledgeGraph g = load_dataset(dir.path, GraphMode::Transductive);
    TrainConfig cfg = testutil::small_config(seed);
    cfg.anchor_init = AnchorInit::Random;
    return build_model(cfg, g);
}

bool bitwise_equal(const Model& a, const Model& b, bool skip_T = false) {
    Model& ma = const_cast<Model&>(a);
    Model& mb = const_cast<Model&>(b);
    auto va = tensor_views(ma);
    auto vb = tensor_views(mb);
    if (va.size() != vb.size()) return false;
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (va[i].name != vb[i].name) return false;
        if (skip_T && va[i].name == "anchors.T") continue;
        if (va[i].dims != vb[i].dims) return false;
        for (std::size_t j = 0; j < va[i].size(); ++j) {
            if (va[i].data[j] != vb[i].data[j]) return false;
        }
    }
    return true;
}

void perturb(Model& m) {
    for (auto& view : tensor_views(m)) {
        for (std::size_t j = 0; j < view.size(); ++j) view.data[j] += 0.5 + double(j % 3);
    }
}

} // namespace

TEST_CASE("checkpoints round-trip models bitwise") {
    Model model = toy_model();
    model.temperature.log_tau = -2.9957;

    testutil::TempDir dir;
    const auto file = dir.path / "model.akgc";
    Checkpoint ckpt = snapshot_model(model, 1234, "epochs = 3\n", "rng-state-blob");
    save_checkpoint(ckpt, file);

    const Checkpoint loaded = load_checkpoint(file);
    CHECK(loaded.step == 1234);
    CHECK(loaded.config_text == "epochs = 3\n");
    CHECK(loaded.rng_state == "rng-state-blob");
    CHECK(loaded.tensors.size() == ckpt.tensors.size());

    Model restored = toy_model();
    perturb(restored);
    CHECK(!bitwise_equal(model, restored));
    restore_model(loaded, restored);
    CHECK(bitwise_equal(model, restored));
    CHECK(restored.temperature.log_tau == model.temperature.log_tau);
}

TEST_CASE("restore resizes tensors to the stored shapes") {
    Model small = toy_model();
    Checkpoint ckpt = snapshot_model(small, 0, "", "");

    // restore into a model with entirely different dimensions
    testutil::TempDir dir;
    testutil::write_raw_dataset(dir.path, testutil::tiny_dataset());
    const KnowledgeGraph g = load_dataset(dir.path, GraphMode::Transductive);
    TrainConfig big_cfg = testutil::small_config(7);
    big_cfg.anchor_init = AnchorInit::Random;
    big_cfg.n_anchors = 3;
    big_cfg.d_structure = 16;
    big_cfg.d_unified = 48;
    Model target = build_model(big_cfg, g);

    restore_model(ckpt, target);
    CHECK(bitwise_equal(small, target));
    CHECK(target.enc.W1.rows() == small.enc.W1.rows());
    CHECK(target.anchors.anchor_count() == small.anchors.anchor_count());
}

TEST_CASE("partial checkpoints work only without require_all") {
    Model model = toy_model();
    Checkpoint full = snapshot_model(model, 0, "", "");

    Checkpoint partial;
    for (const auto& t : full.tensors) {
        if (t.name.rfind("anchors.", 0) == 0) partial.tensors.push_back(t);
    }
    REQUIRE(partial.tensors.size() == 3); // A, T, R

    Model target = toy_model();
    perturb(target);
    CHECK_THROWS_WITH_AS(restore_model(partial, target, true),
                         doctest::Contains("missing"), std::runtime_error);

    const Mat before_W1 = target.enc.W1;
    restore_model(partial, target, false);
    CHECK((target.anchors.A.array() == model.anchors.A.array()).all());
    CHECK((target.enc.W1.array() == before_W1.array()).all()); // untouched
}

TEST_CASE("drop_entity_weights yields a serving model without T") {
    Model model = toy_model();
    Checkpoint ckpt = snapshot_model(model, 0, "", "");

    Model inductive = toy_model();
    restore_model(ckpt, inductive, true, true);
    CHECK(bitwise_equal(model, inductive, /*skip_T=*/true));
    CHECK(inductive.anchors.T.size() == 0);
    CHECK_THROWS(inductive.anchors.entity_structure_embedding(0));
    CHECK_NOTHROW(inductive.anchors.relation_structure_embedding(0));

    // a checkpoint that never stored T restores cleanly in that mode
    Checkpoint no_t;
    no_t.step = ckpt.step;
    for (const auto& t : ckpt.tensors) {
        if (t.name != "anchors.T") no_t.tensors.push_back(t);
    }
    Model again = toy_model();
    CHECK_THROWS(restore_model(no_t, again, true, false));
    CHECK_NOTHROW(restore_model(no_t, again, true, true));
}

TEST_CASE("optimizer moments ride along under their prefixes") {
    Model model = toy_model();
    ModelGrads m, v;
    m.init(model.anchors, model.enc, model.proj);
    v.init(model.anchors, model.enc, model.proj);
    m.A.setConstant(0.25);
    m.log_tau = -0.125;
    v.W1.setConstant(1.5);
    v.log_tau = 2.0;

    Checkpoint ckpt = snapshot_model(model, 7, "", "");
    append_tensors(ckpt, m, "adam.m.");
    append_tensors(ckpt, v, "adam.v.");

    testutil::TempDir dir;
    const auto file = dir.path / "train.akgc";
    save_checkpoint(ckpt, file);
    const Checkpoint loaded = load_checkpoint(file);

    ModelGrads m2, v2;
    m2.init(model.anchors, model.enc, model.proj);
    v2.init(model.anchors, model.enc, model.proj);
    CHECK(restore_moments(loaded, m2, v2));
    CHECK((m2.A.array() == 0.25).all());
    CHECK(m2.log_tau == -0.125);
    CHECK((v2.W1.array() == 1.5).all());
    CHECK(v2.log_tau == 2.0);
    CHECK((m2.W1.array() == 0.0).all());

    // a plain model checkpoint reports the absence of moments
    const Checkpoint bare = snapshot_model(model, 7, "", "");
    CHECK(!restore_moments(bare, m2, v2));
}

TEST_CASE("corrupt checkpoint files are rejected with clear errors") {
    testutil::TempDir dir;

    const auto bad_magic = dir.path / "bad.akgc";
    testutil::write_file(bad_magic, "NOPE this is not a checkpoint");
    CHECK_THROWS_WITH_AS(load_checkpoint(bad_magic), doctest::Contains("magic"),
                         std::runtime_error);

    Model model = toy_model();
    const Checkpoint ckpt = snapshot_model(model, 1, "", "");
    const auto good = dir.path / "good.akgc";
    save_checkpoint(ckpt, good);
    const std::string bytes = testutil::read_file(good);
    const auto truncated = dir.path / "cut.akgc";
    testutil::write_file(truncated, bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS(load_checkpoint(truncated));

    CHECK_THROWS(load_checkpoint(dir.path / "absent.akgc"));
}

TEST_CASE("tensor views enumerate a fixed parameter order") {
    Model model = toy_model();
    const auto views = tensor_views(model);
    REQUIRE(!views.empty());
    CHECK(views[0].name == "anchors.A");
    bool saw_log_tau = false, saw_token_table = false;
    std::size_t total = 0;
    for (const auto& view : views) {
        total += view.size();
        if (view.name == "temperature.log_tau") {
            saw_log_tau = true;
            CHECK(view.size() == 1);
            CHECK(view.data == &model.temperature.log_tau);
        }
        if (view.name == "encoder.token_table") saw_token_table = true;
    }
    CHECK(saw_log_tau);
    CHECK(saw_token_table);

    ModelGrads grads;
    grads.init(model.anchors, model.enc, model.proj);
    const auto gviews = tensor_views(grads);
    REQUIRE(gviews.size() == views.size());
    for (std::size_t i = 0; i < views.size(); ++i) {
        CHECK(gviews[i].name == views[i].name);
        CHECK(gviews[i].dims == views[i].dims);
    }
}
