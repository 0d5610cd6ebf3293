#include "akgc/trainer.hpp"

#include "akgc/checkpoint.hpp"
#include "akgc/encoder.hpp"
#include "akgc/evaluate.hpp"
#include "akgc/kge.hpp"
#include "akgc/losses.hpp"
#include "akgc/parallel.hpp"
#include "akgc/rng.hpp"
#include "akgc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace akgc {

double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double lr_max, double lr_min) {
    if (total_steps == 0) return lr_max;
    const double frac =
        static_cast<double>(std::min(step, total_steps)) / static_cast<double>(total_steps);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * frac));
}

void adamw_step(double* theta, const double* grad, double* m, double* v, std::size_t n,
                std::uint64_t t, double lr, double beta1, double beta2, double eps,
                double weight_decay) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        theta[i] -= lr * (m_hat / (std::sqrt(v_hat) + eps) + weight_decay * theta[i]);
    }
}

AdamW::AdamW(const Model& model, const TrainConfig& config)
    : beta1_(config.adam_beta1), beta2_(config.adam_beta2), eps_(config.adam_eps),
      weight_decay_(config.weight_decay) {
    m_.init(model.anchors, model.enc, model.proj);
    v_.init(model.anchors, model.enc, model.proj);
    m_.set_zero();
    v_.set_zero();
}

void AdamW::step(Model& model, ModelGrads& grads, double lr) {
    ++t_;
    auto theta = tensor_views(model);
    auto g = tensor_views(grads);
    auto m = tensor_views(m_);
    auto v = tensor_views(v_);
    if (theta.size() != g.size() || theta.size() != m.size() || theta.size() != v.size()) {
        throw std::logic_error("optimizer tensor enumeration mismatch");
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const std::size_t n = theta[i].size();
        if (g[i].size() != n || m[i].size() != n || v[i].size() != n) {
            throw std::logic_error("optimizer tensor shape mismatch: " + theta[i].name);
        }
        adamw_step(theta[i].data, g[i].data, m[i].data, v[i].data, n, t_, lr, beta1_, beta2_,
                   eps_, weight_decay_);
    }
}

namespace {

Vec& slot_grad(std::vector<Vec>& slots, std::int32_t slot, Eigen::Index dim) {
    Vec& g = slots[static_cast<std::size_t>(slot)];
    if (g.size() == 0) g = Vec::Zero(dim);
    return g;
}

} // namespace

StepStats train_step(const PreparedData& data, Model& model, const TrainConfig& config,
                     std::span<const Triple> batch, std::uint64_t negative_seed, int threads,
                     ModelGrads& grads) {
    const KnowledgeGraph& graph = data.graph;
    const std::size_t B = batch.size();
    if (B < 2) throw std::invalid_argument("train_step: batch must hold at least two triples");
    const int n_threads = resolve_threads(threads);
    const double upstream = 1.0 / static_cast<double>(B);
    const Eigen::Index d_u = model.enc.d_unified();
    const Eigen::Index d_s = model.anchors.dim();
    const Eigen::Index n_anchors = model.anchors.anchor_count();
    const double tau = model.temperature.tau();

    const NegativeBatch negatives =
        build_negatives(batch, graph.num_entities(), data.train_filter, config.negatives,
                        config.mask_false_negatives, negative_seed);

    // Unique tail entities, interned in a fixed order (gold tails in batch
    // order, then the uniform block) so every reduction below is deterministic.
    std::vector<std::int32_t> slots;
    std::unordered_map<std::int32_t, std::int32_t> slot_of;
    slots.reserve(2 * B);
    const auto intern = [&](std::int32_t entity) {
        const auto [it, inserted] =
            slot_of.emplace(entity, static_cast<std::int32_t>(slots.size()));
        if (inserted) slots.push_back(entity);
        return it->second;
    };
    std::vector<std::int32_t> gold_slot(B);
    for (std::size_t q = 0; q < B; ++q) gold_slot[q] = intern(batch[q].tail);
    for (const std::int32_t e : negatives.uniform_ids) intern(e);
    const std::size_t n_slots = slots.size();

    std::vector<std::vector<std::int32_t>> neg_slots(B);
    for (std::size_t q = 0; q < B; ++q) {
        const auto& ids = negatives.negative_ids[q];
        neg_slots[q].resize(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) neg_slots[q][i] = slot_of.at(ids[i]);
    }

    // Phase 0: every unique tail through the encoder, traced for the backward.
    std::vector<SequenceTrace> tail_traces(n_slots);
    std::vector<Vec> t_u(n_slots);
    const int tail_chunks = chunk_count(n_slots);
    parallel_chunks(tail_chunks, n_threads, [&](int c) {
        const auto [lo, hi] = chunk_range(n_slots, tail_chunks, c);
        for (std::size_t s = lo; s < hi; ++s) {
            t_u[s] = embed_sequence_traced(entity_sequence(graph, slots[s], model.enc),
                                           model.anchors.A, model.enc, tail_traces[s]);
        }
    });

    // Phase A: per-query losses and gradients, one buffer per chunk. Gradients
    // for the shared tails are only staged into per-chunk slot buffers here.
    const int q_chunks = chunk_count(B);
    std::vector<GradBuffer> buffers(static_cast<std::size_t>(q_chunks));
    std::vector<std::vector<Vec>> chunk_d_tu(static_cast<std::size_t>(q_chunks));
    std::vector<std::vector<Vec>> chunk_d_ts(static_cast<std::size_t>(q_chunks));
    std::vector<StepStats> chunk_stats(static_cast<std::size_t>(q_chunks));
    const bool need_structure_space = config.use_structure_loss || config.use_alignment_loss;

    parallel_chunks(q_chunks, n_threads, [&](int c) {
        const auto uc = static_cast<std::size_t>(c);
        GradBuffer& gb = buffers[uc];
        gb.init(model.anchors, model.enc, model.proj);
        auto& d_tu = chunk_d_tu[uc];
        auto& d_ts = chunk_d_ts[uc];
        d_tu.assign(n_slots, Vec());
        d_ts.assign(n_slots, Vec());
        StepStats& stats = chunk_stats[uc];

        // structure vectors reused across the chunk's queries
        std::vector<Vec> ts_cache(n_slots);
        const auto t_s = [&](std::int32_t slot) -> const Vec& {
            Vec& v = ts_cache[static_cast<std::size_t>(slot)];
            if (v.size() == 0) {
                v = model.anchors.entity_structure_embedding(slots[static_cast<std::size_t>(slot)]);
            }
            return v;
        };

        const auto [lo, hi] = chunk_range(B, q_chunks, c);
        for (std::size_t q = lo; q < hi; ++q) {
            const Triple& triple = batch[q];
            const auto& ids = negatives.negative_ids[q];
            const auto& mask = negatives.mask[q];
            const std::size_t n_neg = ids.size();
            const std::int32_t gold = gold_slot[q];

            SequenceTrace ctx_trace;
            const Vec c_u =
                embed_sequence_traced(context_sequence(graph, triple.head, triple.relation, model.enc),
                                      model.anchors.A, model.enc, ctx_trace);
            Vec d_cu = Vec::Zero(d_u);

            // contrastive loss over cosine scores
            {
                std::vector<double> negs(n_neg, 0.0), d_negs(n_neg, 0.0);
                for (std::size_t i = 0; i < n_neg; ++i) {
                    if (!mask[i]) negs[i] = cosine(c_u, t_u[static_cast<std::size_t>(neg_slots[q][i])]);
                }
                const double pos = cosine(c_u, t_u[static_cast<std::size_t>(gold)]);
                double d_pos = 0.0, d_tau = 0.0;
                bool all_masked = false;
                stats.loss_unified += info_nce_grad(pos, negs, mask, config.gamma_c, tau, upstream,
                                                    d_pos, d_negs, d_tau, &all_masked);
                if (all_masked) ++stats.all_masked_queries;
                gb.log_tau += tau * d_tau; // trained through log(tau)
                if (d_pos != 0.0) {
                    cosine_grad(c_u, t_u[static_cast<std::size_t>(gold)], d_pos, d_cu,
                                slot_grad(d_tu, gold, d_u));
                }
                for (std::size_t i = 0; i < n_neg; ++i) {
                    if (mask[i] || d_negs[i] == 0.0) continue;
                    const std::int32_t slot = neg_slots[q][i];
                    cosine_grad(c_u, t_u[static_cast<std::size_t>(slot)], d_negs[i], d_cu,
                                slot_grad(d_tu, slot, d_u));
                }
            }

            Vec h_s;
            if (need_structure_space) h_s = model.anchors.entity_structure_embedding(triple.head);
            Vec d_hs; // accumulated over both structure-space losses
            if (need_structure_space) d_hs = Vec::Zero(d_s);

            if (config.use_structure_loss) {
                const Vec r_s = model.anchors.relation_structure_embedding(triple.relation);
                std::vector<double> negs(n_neg, 0.0), d_negs(n_neg, 0.0);
                for (std::size_t i = 0; i < n_neg; ++i) {
                    if (!mask[i]) negs[i] = kge_score(config.kge, h_s, r_s, t_s(neg_slots[q][i]));
                }
                const double pos = kge_score(config.kge, h_s, r_s, t_s(gold));
                double d_pos = 0.0;
                stats.loss_structure +=
                    self_adversarial_grad(pos, negs, mask, config.gamma_k, upstream, d_pos, d_negs);
                Vec d_rs = Vec::Zero(d_s);
                if (d_pos != 0.0) {
                    kge_score_grad(config.kge, h_s, r_s, t_s(gold), d_pos, d_hs, d_rs,
                                   slot_grad(d_ts, gold, d_s));
                }
                for (std::size_t i = 0; i < n_neg; ++i) {
                    if (mask[i] || d_negs[i] == 0.0) continue;
                    const std::int32_t slot = neg_slots[q][i];
                    kge_score_grad(config.kge, h_s, r_s, t_s(slot), d_negs[i], d_hs, d_rs,
                                   slot_grad(d_ts, slot, d_s));
                }
                gb.R.row(triple.relation) += d_rs.transpose();
            }

            if (config.use_alignment_loss) {
                const Vec& tu_gold = t_u[static_cast<std::size_t>(gold)];
                const Vec g_t = project(model.proj, tu_gold);
                Vec d_g = Vec::Zero(d_s), d_ta = Vec::Zero(d_s);
                stats.loss_alignment +=
                    alignment_grad(g_t, h_s, t_s(gold), config.gamma_m, config.use_printed_margin,
                                   upstream, d_g, d_hs, d_ta);
                Vec d_tu_proj = Vec::Zero(d_u);
                project_backward(model.proj, tu_gold, d_g, gb, d_tu_proj);
                slot_grad(d_tu, gold, d_u) += d_tu_proj;
                slot_grad(d_ts, gold, d_s) += d_ta;
            }

            if (need_structure_space) {
                // h_s = T[head]·A: route into the head's weight row and the anchors
                gb.t_row(triple.head, n_anchors) += model.anchors.A * d_hs;
                gb.A += model.anchors.T.row(triple.head).transpose() * d_hs.transpose();
            }

            embed_sequence_backward(ctx_trace, model.anchors.A, model.enc, d_cu, gb);
        }
    });

    for (int c = 0; c < q_chunks; ++c) grads.add(buffers[static_cast<std::size_t>(c)]);

    // Reduce the staged tail gradients in chunk order, then scatter.
    std::vector<Vec> d_tu_total(n_slots), d_ts_total(n_slots);
    for (int c = 0; c < q_chunks; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        for (std::size_t s = 0; s < n_slots; ++s) {
            if (chunk_d_tu[uc][s].size() != 0) {
                slot_grad(d_tu_total, static_cast<std::int32_t>(s), d_u) += chunk_d_tu[uc][s];
            }
            if (chunk_d_ts[uc][s].size() != 0) {
                slot_grad(d_ts_total, static_cast<std::int32_t>(s), d_s) += chunk_d_ts[uc][s];
            }
        }
    }
    for (std::size_t s = 0; s < n_slots; ++s) {
        if (d_ts_total[s].size() == 0) continue;
        const std::int32_t e = slots[s];
        grads.T.row(e) += (model.anchors.A * d_ts_total[s]).transpose();
        grads.A += model.anchors.T.row(e).transpose() * d_ts_total[s].transpose();
    }

    // Phase B: tail encoder backward for every slot that received gradient.
    std::vector<GradBuffer> tail_buffers(static_cast<std::size_t>(tail_chunks));
    parallel_chunks(tail_chunks, n_threads, [&](int c) {
        GradBuffer& gb = tail_buffers[static_cast<std::size_t>(c)];
        gb.init(model.anchors, model.enc, model.proj);
        const auto [lo, hi] = chunk_range(n_slots, tail_chunks, c);
        for (std::size_t s = lo; s < hi; ++s) {
            if (d_tu_total[s].size() == 0) continue;
            embed_sequence_backward(tail_traces[s], model.anchors.A, model.enc, d_tu_total[s], gb);
        }
    });
    for (int c = 0; c < tail_chunks; ++c) grads.add(tail_buffers[static_cast<std::size_t>(c)]);

    StepStats total;
    for (const StepStats& s : chunk_stats) {
        total.loss_unified += s.loss_unified;
        total.loss_structure += s.loss_structure;
        total.loss_alignment += s.loss_alignment;
        total.all_masked_queries += s.all_masked_queries;
    }
    total.loss_unified *= upstream;
    total.loss_structure *= upstream;
    total.loss_alignment *= upstream;
    return total;
}

namespace {

Split to_split(EvalSplit s) {
    switch (s) {
        case EvalSplit::Train: return Split::Train;
        case EvalSplit::Valid: return Split::Valid;
        case EvalSplit::Test: return Split::Test;
    }
    throw std::logic_error("unreachable eval split");
}

double tensor_norm(const TensorView& view) {
    double sq = 0.0;
    for (std::size_t i = 0; i < view.size(); ++i) sq += view.data[i] * view.data[i];
    return std::sqrt(sq);
}

[[noreturn]] void abort_non_finite(std::uint64_t step, const StepStats& stats, ModelGrads& grads,
                                   std::ostream* log) {
    std::ostringstream msg;
    msg << "training aborted: non-finite loss at step " << step << " (unified="
        << stats.loss_unified << ", structure=" << stats.loss_structure
        << ", alignment=" << stats.loss_alignment << ")\ngradient norms:";
    for (const auto& view : tensor_views(grads)) {
        msg << ' ' << view.name << '=' << tensor_norm(view);
    }
    if (log != nullptr) *log << msg.str() << '\n';
    throw std::runtime_error(msg.str());
}

void clip_gradients(ModelGrads& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& view : tensor_views(grads)) {
        const double n = tensor_norm(view);
        sq += n * n;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
}

void check_resume_config(const std::string& stored_text, const TrainConfig& config) {
    TrainConfig stored = parse_config_text(stored_text).train;
    stored.threads = config.threads; // thread count never changes results
    if (to_config_text(stored) != to_config_text(config)) {
        throw std::runtime_error(
            "resume config does not match the checkpoint's training config");
    }
}

void write_training_checkpoint(const std::filesystem::path& file, Model& model, AdamW& opt,
                               std::uint64_t step, const std::string& config_text, Rng& master) {
    std::ostringstream rng_out;
    rng_out << master.engine();
    Checkpoint ckpt = snapshot_model(model, step, config_text, rng_out.str());
    append_tensors(ckpt, opt.first_moment(), "adam.m.");
    append_tensors(ckpt, opt.second_moment(), "adam.v.");
    save_checkpoint(ckpt, file);
}

void print_epoch(std::ostream& out, const EpochLog& e, std::int32_t total_epochs) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "epoch %4d/%d  loss %.6f  unified %.6f  structure %.6f  align %.6f  lr %.3e",
                  e.epoch, total_epochs, e.loss_total, e.loss_unified, e.loss_structure,
                  e.loss_alignment, e.lr_last);
    out << buf;
    if (e.eval_mrr.has_value()) {
        std::snprintf(buf, sizeof(buf), "  mrr %.4f", *e.eval_mrr);
        out << buf;
    }
    if (e.all_masked_queries > 0) {
        out << "  [" << e.all_masked_queries << " fully-masked queries]";
    }
    out << '\n';
}

} // namespace

TrainResult train(const PreparedData& data, Model& model, const TrainConfig& config,
                  const TrainOptions& options) {
    validate(config);
    const KnowledgeGraph& graph = data.graph;
    const std::size_t n_train = graph.train.size();
    if (n_train < 2) throw std::runtime_error("training needs at least two triples");
    if (graph.mode == GraphMode::Inductive && config.eval_split == EvalSplit::Train) {
        throw std::runtime_error(
            "config: eval_split = train is not available in inductive mode (the evaluator "
            "ranks over the held-out vocabulary)");
    }

    // fixed batch boundaries; a trailing single triple joins the previous batch
    const auto batch_size = static_cast<std::size_t>(config.batch_size);
    std::vector<std::pair<std::size_t, std::size_t>> batches;
    for (std::size_t lo = 0; lo < n_train; lo += batch_size) {
        batches.emplace_back(lo, std::min(lo + batch_size, n_train));
    }
    if (batches.size() > 1 && batches.back().second - batches.back().first == 1) {
        batches[batches.size() - 2].second = n_train;
        batches.pop_back();
    }
    const std::uint64_t steps_per_epoch = batches.size();
    const std::uint64_t total_steps = steps_per_epoch * static_cast<std::uint64_t>(config.epochs);
    const int threads = resolve_threads(config.threads);

    Rng master(derive_seed(config.seed, "master"));
    std::uint64_t global_step = 0;
    std::int32_t start_epoch = 0;

    // Restore the model before shaping the optimizer: a resumed model may be
    // built empty and take all its shapes from the checkpoint.
    std::optional<Checkpoint> resume_ckpt;
    if (!options.resume_from.empty()) {
        resume_ckpt = load_checkpoint(options.resume_from);
        check_resume_config(resume_ckpt->config_text, config);
        restore_model(*resume_ckpt, model);
        global_step = resume_ckpt->step;
        if (global_step % steps_per_epoch != 0) {
            throw std::runtime_error("resume step is not aligned to an epoch boundary");
        }
        start_epoch = static_cast<std::int32_t>(global_step / steps_per_epoch);
        if (start_epoch >= config.epochs) {
            throw std::runtime_error("checkpoint has already finished the configured epochs");
        }
        std::istringstream rng_in(resume_ckpt->rng_state);
        rng_in >> master.engine();
        if (!rng_in) throw std::runtime_error("checkpoint RNG state is unreadable");
    }

    AdamW opt(model, config);
    ModelGrads grads;
    grads.init(model.anchors, model.enc, model.proj);
    if (resume_ckpt.has_value()) {
        if (!restore_moments(*resume_ckpt, opt.first_moment(), opt.second_moment())) {
            throw std::runtime_error("resume checkpoint holds no optimizer moments: " +
                                     options.resume_from.string());
        }
        opt.set_updates(global_step);
        resume_ckpt.reset();
    }

    TrainResult result;
    const std::string config_text = to_config_text(config);
    const bool writing = !options.out_dir.empty();
    if (writing) std::filesystem::create_directories(options.out_dir);

    std::vector<std::size_t> order(n_train);
    std::vector<Triple> batch_buf;
    batch_buf.reserve(batch_size + 1);
    double best_mrr = -1.0;

    for (std::int32_t epoch = start_epoch; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed(config.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = n_train - 1; i > 0; --i) {
            std::swap(order[i], order[shuffle_rng.below(i + 1)]);
        }

        EpochLog entry;
        entry.epoch = epoch + 1;
        for (const auto& [lo, hi] : batches) {
            batch_buf.clear();
            for (std::size_t i = lo; i < hi; ++i) batch_buf.push_back(graph.train[order[i]]);
            const double lr = cosine_lr(global_step, total_steps, config.lr, config.lr_min);
            grads.set_zero();
            const StepStats stats =
                train_step(data, model, config, batch_buf,
                           derive_seed(config.seed, "neg", global_step), threads, grads);
            if (!std::isfinite(stats.total())) {
                abort_non_finite(global_step, stats, grads, options.log);
            }
            if (config.grad_clip > 0.0) clip_gradients(grads, config.grad_clip);
            opt.step(model, grads, lr);
            if (!model.anchors.A.allFinite() || !model.anchors.T.allFinite() ||
                !model.anchors.R.allFinite()) {
                throw std::runtime_error("training aborted: non-finite anchor parameters after step " +
                                         std::to_string(global_step));
            }
            ++global_step;
            entry.loss_unified += stats.loss_unified;
            entry.loss_structure += stats.loss_structure;
            entry.loss_alignment += stats.loss_alignment;
            entry.all_masked_queries += stats.all_masked_queries;
            entry.lr_last = lr;
        }
        const double inv = 1.0 / static_cast<double>(steps_per_epoch);
        entry.loss_unified *= inv;
        entry.loss_structure *= inv;
        entry.loss_alignment *= inv;
        entry.loss_total = total_loss(entry.loss_unified, entry.loss_structure, entry.loss_alignment);

        bool hit_target = false;
        const bool eval_due = config.eval_every > 0 && ((epoch + 1) % config.eval_every == 0 ||
                                                        epoch + 1 == config.epochs);
        if (eval_due && !graph.split(to_split(config.eval_split)).empty()) {
            const Evaluator evaluator(data, model, config, threads);
            const RankingReport report = evaluator.evaluate(to_split(config.eval_split));
            entry.eval_mrr = report.all.mrr;
            if (report.all.mrr > best_mrr) {
                best_mrr = report.all.mrr;
                result.best_mrr = best_mrr;
                result.best_epoch = epoch + 1;
                if (writing) {
                    write_training_checkpoint(options.out_dir / "best.akgc", model, opt,
                                              global_step, config_text, master);
                }
            }
            hit_target = config.target_mrr > 0.0 && report.all.mrr >= config.target_mrr;
        }

        if (writing) {
            write_training_checkpoint(options.out_dir / "last.akgc", model, opt, global_step,
                                      config_text, master);
        }
        result.epochs.push_back(entry);
        if (options.log != nullptr) print_epoch(*options.log, entry, config.epochs);
        if (hit_target) {
            result.reached_target = true;
            break;
        }
        if (options.stop_after_epoch > 0 && epoch - start_epoch + 1 >= options.stop_after_epoch) {
            break;
        }
    }
    result.steps = global_step;
    return result;
}

} // namespace akgc
