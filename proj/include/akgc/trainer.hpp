#pragma once

#include "akgc/config.hpp"
#include "akgc/dataset.hpp"
#include "akgc/grads.hpp"
#include "akgc/model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace akgc {

// Cosine decay from lr_max to lr_min over total_steps; step is the number of
// completed optimizer updates.
double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double lr_max, double lr_min);

// Flat AdamW update with bias correction and decoupled weight decay:
//   θ ← θ − lr·(m̂/(√v̂ + ε) + wd·θ)
// t is the 1-based update count after this step.
void adamw_step(double* theta, const double* grad, double* m, double* v, std::size_t n,
                std::uint64_t t, double lr, double beta1, double beta2, double eps,
                double weight_decay);

class AdamW {
public:
    AdamW(const Model& model, const TrainConfig& config);

    void step(Model& model, ModelGrads& grads, double lr);

    std::uint64_t updates() const { return t_; }
    void set_updates(std::uint64_t t) { t_ = t; }
    ModelGrads& first_moment() { return m_; }
    ModelGrads& second_moment() { return v_; }

private:
    ModelGrads m_;
    ModelGrads v_;
    std::uint64_t t_ = 0;
    double beta1_;
    double beta2_;
    double eps_;
    double weight_decay_;
};

struct StepStats {
    double loss_unified = 0.0;   // batch means
    double loss_structure = 0.0;
    double loss_alignment = 0.0;
    std::size_t all_masked_queries = 0;

    double total() const { return loss_unified + loss_structure + loss_alignment; }
};

// One batch: forward both branches, analytic backward, gradients averaged over
// the batch and accumulated into grads (which the caller must zero). The result
// is bit-identical for any thread count: work is split into a fixed chunk
// topology and partial gradients are reduced in chunk order.
StepStats train_step(const PreparedData& data, Model& model, const TrainConfig& config,
                     std::span<const Triple> batch, std::uint64_t negative_seed, int threads,
                     ModelGrads& grads);

struct EpochLog {
    std::int32_t epoch = 0; // 1-based
    double loss_unified = 0.0;
    double loss_structure = 0.0;
    double loss_alignment = 0.0;
    double loss_total = 0.0;
    double lr_last = 0.0;
    std::size_t all_masked_queries = 0;
    std::optional<double> eval_mrr;
};

struct TrainResult {
    std::vector<EpochLog> epochs;
    std::uint64_t steps = 0;
    std::optional<double> best_mrr;
    std::int32_t best_epoch = -1; // 1-based, -1 if never evaluated
    bool reached_target = false;
};

struct TrainOptions {
    std::filesystem::path out_dir;      // empty: no checkpoints written
    std::filesystem::path resume_from;  // empty: fresh run
    std::int32_t stop_after_epoch = -1; // >0: pause after this many epochs of this run
    std::ostream* log = nullptr;        // progress lines, one per epoch
};

// Full training loop: shuffled batches, cosine schedule, AdamW, per-epoch
// last/best checkpoints (with optimizer moments and sampler RNG state), optional
// epoch-aligned resume, early stop once the monitored split reaches target_mrr.
TrainResult train(const PreparedData& data, Model& model, const TrainConfig& config,
                  const TrainOptions& options = {});

} // namespace akgc
