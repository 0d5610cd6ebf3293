// Acceptance gate for the toolkit. Runs twelve end-to-end checks, prints one
// PASS/FAIL line per criterion, and exits with the number of failures. Every
// tolerance and time budget is pinned in the constants below; reference
// values come from the independent oracles in oracles.hpp (finite
// differences, sort-based ranking, boolean k-hop relaxation, Monte-Carlo
// baselines, chi-squared tails), never from the library under test.

#include "akgc/anchors.hpp"
#include "akgc/config.hpp"
#include "akgc/dataset.hpp"
#include "akgc/encoder.hpp"
#include "akgc/evaluate.hpp"
#include "akgc/grads.hpp"
#include "akgc/kge.hpp"
#include "akgc/losses.hpp"
#include "akgc/model.hpp"
#include "akgc/rng.hpp"
#include "akgc/sampling.hpp"
#include "akgc/text.hpp"
#include "akgc/trainer.hpp"

#include "oracles.hpp"
#include "testutil.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace akgc;

namespace {

// ---- pinned tolerances and budgets -----------------------------------------
constexpr double kGradTol = 1e-4;           // max relative error, analytic vs central FD
constexpr double kGradAbsFloor = 1e-9;      // below this |analytic − numeric| is FD noise
constexpr int kGradInstances = 50;          // random instances per component family
constexpr double kGradBudgetSec = 30.0;     // wall clock for the whole gradient sweep
constexpr double kRecoverTol = 1e-8;        // max |T·A − E| after least-squares recovery
constexpr double kRecoverBudgetSec = 1.0;
constexpr int kKmeansFixtures = 20;
constexpr double kKmeansRiseTol = 1e-9;     // allowed per-iteration objective increase
constexpr double kMeanTol = 1e-12;          // k = 1 centroid vs column mean
constexpr double kMemorizeMrr = 0.95;
constexpr double kMemorizeBudgetSec = 120.0;
constexpr double kCompositionalFactor = 5.0; // × the random-ranking baseline
constexpr double kInductiveFactor = 2.0;     // × the random-ranking baseline
constexpr double kAblationSlack = 0.02;      // full may trail an ablation by at most this
constexpr double kChiAlpha = 0.01;           // two-sided gate on the sampling p-values
constexpr std::uint32_t kRankFixtures = 100;

int g_failures = 0;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

// Runs one criterion body; an empty returned string means pass.
void criterion(int id, const char* label, const std::function<std::string()>& body) {
    std::string detail;
    try {
        detail = body();
    } catch (const std::exception& e) {
        detail = fmt("exception: %s", e.what());
    }
    if (detail.empty()) {
        std::printf("PASS criterion-%02d: %s\n", id, label);
    } else {
        std::printf("FAIL criterion-%02d: %s (%s)\n", id, label, detail.c_str());
        ++g_failures;
    }
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp_bytes(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Worst relative error seen across a family of gradient checks.
struct GradSweep {
    double worst = 0.0;
    std::size_t checked = 0;
    std::string where;

    void note(double analytic, double numeric, const std::string& w) {
        ++checked;
        if (std::abs(analytic - numeric) < kGradAbsFloor) return; // below FD resolution
        const double r = oracle::rel_err(analytic, numeric);
        if (r > worst) {
            worst = r;
            where = w;
        }
    }
    std::string gate(std::size_t min_checked) const {
        if (checked < min_checked) return fmt("only %zu checks ran", checked);
        if (worst >= kGradTol) return fmt("rel err %.3g at %s", worst, where.c_str());
        return {};
    }
};

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---- criterion 1: gradients ------------------------------------------------

std::string check_kge_gradients(GradSweep& sweep) {
    const KgeModel models[] = {KgeModel::TransE, KgeModel::DistMult, KgeModel::ComplEx,
                               KgeModel::RotatE};
    const Eigen::Index d = 8;
    for (const KgeModel m : models) {
        Rng rng(derive_seed(101, kge_model_name(m)));
        for (int inst = 0; inst < kGradInstances; ++inst) {
            Vec h(d), r(d), t(d);
            for (Eigen::Index i = 0; i < d; ++i) {
                h[i] = rng.normal();
                r[i] = rng.normal();
                t[i] = rng.normal();
            }
            const double upstream = rng.uniform(0.5, 1.5);
            Vec dh = Vec::Zero(d), dr = Vec::Zero(d), dt = Vec::Zero(d);
            kge_score_grad(m, h, r, t, upstream, dh, dr, dt);

            const auto loss = [&] { return upstream * kge_score(m, h, r, t); };
            const std::string tag = fmt("%s/%d", kge_model_name(m), inst);
            for (Eigen::Index i = 0; i < d; ++i) {
                sweep.note(dh[i], oracle::central_diff(loss, &h[i]), tag + "/h");
                sweep.note(dr[i], oracle::central_diff(loss, &r[i]), tag + "/r");
                sweep.note(dt[i], oracle::central_diff(loss, &t[i]), tag + "/t");
            }
            if (m == KgeModel::RotatE) {
                // only the phase half of the relation vector carries gradient
                for (Eigen::Index i = d / 2; i < d; ++i) {
                    if (dr[i] != 0.0) return fmt("rotate d_rel[%ld] = %g, want exact 0",
                                                 static_cast<long>(i), dr[i]);
                }
            }
        }
    }
    return {};
}

std::string check_encoder_gradients(GradSweep& sweep) {
    const std::int32_t hash_vocab = 50, max_len = 12, d_u = 6, d_s = 4, n_anchors = 2;
    const char* names[] = {"Alpha Widget", "beta gadget", "Gamma Unit"};
    const char* descs[] = {"spins quietly", "measures twice and cuts", "holds the line"};
    const char* rels[] = {"part of", "located in"};

    for (int inst = 0; inst < kGradInstances; ++inst) {
        const std::uint64_t seed = derive_seed(202, "enc", static_cast<std::uint64_t>(inst));
        Rng rng(seed);
        AnchorDecomposition anchors = init_random(8, n_anchors, d_s, 3, seed);
        EncoderParams enc = init_encoder(hash_vocab, max_len, d_u, d_s, n_anchors,
                                         /*tie_anchors=*/true, seed + 1);
        ProjectionHead proj = init_projection(d_s, d_u, seed + 2);
        // b1/b2 start at zero; nudge them so their gradients see a generic point
        for (Eigen::Index i = 0; i < d_u; ++i) {
            enc.b1[i] = 0.1 * rng.normal();
            enc.b2[i] = 0.1 * rng.normal();
        }
        const std::string rel = rels[inst % 2];
        const TokenSequence seq =
            text::build_sequence(names[inst % 3], descs[(inst + 1) % 3],
                                 (inst % 2 == 0) ? &rel : nullptr, n_anchors, max_len, hash_vocab);
        Vec probe(d_u);
        for (Eigen::Index i = 0; i < d_u; ++i) probe[i] = rng.normal();

        SequenceTrace trace;
        embed_sequence_traced(seq, anchors.A, enc, trace);
        GradBuffer gb;
        gb.init(anchors, enc, proj);
        embed_sequence_backward(trace, anchors.A, enc, probe, gb);

        const auto loss = [&] { return probe.dot(embed_sequence(seq, anchors.A, enc)); };
        const std::string tag = fmt("enc/%d", inst);
        for (Eigen::Index i = 0; i < d_u; ++i) {
            for (Eigen::Index j = 0; j < d_u; ++j) {
                sweep.note(gb.W1(i, j), oracle::central_diff(loss, &enc.W1(i, j)), tag + "/W1");
                sweep.note(gb.W2(i, j), oracle::central_diff(loss, &enc.W2(i, j)), tag + "/W2");
            }
            sweep.note(gb.b1[i], oracle::central_diff(loss, &enc.b1[i]), tag + "/b1");
            sweep.note(gb.b2[i], oracle::central_diff(loss, &enc.b2[i]), tag + "/b2");
            sweep.note(gb.sep[i], oracle::central_diff(loss, &enc.sep_vector[i]), tag + "/sep");
        }
        for (Eigen::Index i = 0; i < d_u; ++i) {
            for (Eigen::Index j = 0; j < d_s; ++j) {
                sweep.note(gb.anchor_proj(i, j), oracle::central_diff(loss, &enc.anchor_proj(i, j)),
                           tag + "/anchor_proj");
            }
        }
        for (Eigen::Index i = 0; i < n_anchors; ++i) {
            for (Eigen::Index j = 0; j < d_s; ++j) {
                sweep.note(gb.A(i, j), oracle::central_diff(loss, &anchors.A(i, j)), tag + "/A");
            }
        }
        // one hashed token row and every occupied position row
        std::int32_t tok = -1;
        for (std::size_t p = 0; p < seq.size(); ++p) {
            if (seq.tags[p] != text::Tag::Anchor && seq.ids[p] < hash_vocab) {
                tok = seq.ids[p];
                break;
            }
        }
        if (tok >= 0) {
            const Vec& drow = gb.token_rows.at(tok);
            for (Eigen::Index j = 0; j < d_u; ++j) {
                sweep.note(drow[j], oracle::central_diff(loss, &enc.token_table(tok, j)),
                           tag + "/token");
            }
        }
        for (std::size_t p = 0; p < seq.size(); ++p) {
            for (Eigen::Index j = 0; j < d_u; ++j) {
                sweep.note(gb.position_table(static_cast<Eigen::Index>(p), j),
                           oracle::central_diff(loss, &enc.position_table(static_cast<Eigen::Index>(p), j)),
                           tag + "/pos");
            }
        }

        // projection head and cosine on the same instance
        Vec x(d_u);
        for (Eigen::Index i = 0; i < d_u; ++i) x[i] = rng.normal();
        Vec probe_s(d_s);
        for (Eigen::Index i = 0; i < d_s; ++i) probe_s[i] = rng.normal();
        GradBuffer gp;
        gp.init(anchors, enc, proj);
        Vec d_x = Vec::Zero(d_u);
        project_backward(proj, x, probe_s, gp, d_x);
        const auto ploss = [&] { return probe_s.dot(project(proj, x)); };
        for (Eigen::Index i = 0; i < d_s; ++i) {
            for (Eigen::Index j = 0; j < d_u; ++j) {
                sweep.note(gp.G(i, j), oracle::central_diff(ploss, &proj.G(i, j)), tag + "/G");
            }
            sweep.note(gp.g_b[i], oracle::central_diff(ploss, &proj.b[i]), tag + "/g_b");
        }
        for (Eigen::Index j = 0; j < d_u; ++j) {
            sweep.note(d_x[j], oracle::central_diff(ploss, &x[j]), tag + "/x");
        }

        Vec a(d_u), b(d_u);
        for (Eigen::Index i = 0; i < d_u; ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal();
        }
        const double up = rng.uniform(0.5, 1.5);
        Vec d_a = Vec::Zero(d_u), d_b = Vec::Zero(d_u);
        cosine_grad(a, b, up, d_a, d_b);
        const auto closs = [&] { return up * cosine(a, b); };
        for (Eigen::Index i = 0; i < d_u; ++i) {
            sweep.note(d_a[i], oracle::central_diff(closs, &a[i]), tag + "/cos_a");
            sweep.note(d_b[i], oracle::central_diff(closs, &b[i]), tag + "/cos_b");
        }
    }
    return {};
}

std::string check_loss_gradients(GradSweep& sweep) {
    for (int inst = 0; inst < kGradInstances; ++inst) {
        Rng rng(derive_seed(303, "loss", static_cast<std::uint64_t>(inst)));
        const std::size_t n = 1 + rng.below(8);
        std::vector<double> negs(n);
        std::vector<char> mask(n, 0);
        for (auto& s : negs) s = rng.normal();
        std::size_t unmasked = n;
        for (std::size_t i = 0; i < n && unmasked > 1; ++i) {
            if (rng.below(4) == 0) {
                mask[i] = 1;
                --unmasked;
            }
        }
        double pos = rng.normal();
        double tau = rng.uniform(0.05, 1.5);
        const double gamma_c = 0.02;
        const double upstream = rng.uniform(0.5, 1.5);
        const std::string tag = fmt("loss/%d", inst);

        // contrastive: softmax over the positive and the unmasked negatives
        {
            double d_pos = 0.0, d_tau = 0.0;
            std::vector<double> d_negs(n, 0.0);
            info_nce_grad(pos, negs, mask, gamma_c, tau, upstream, d_pos, d_negs, d_tau);
            const auto loss = [&] { return upstream * info_nce(pos, negs, mask, gamma_c, tau); };
            sweep.note(d_pos, oracle::central_diff(loss, &pos), tag + "/nce_pos");
            sweep.note(d_tau, oracle::central_diff(loss, &tau), tag + "/nce_tau");
            for (std::size_t i = 0; i < n; ++i) {
                if (mask[i]) {
                    if (d_negs[i] != 0.0) return fmt("masked contrastive grad %g, want exact 0",
                                                     d_negs[i]);
                    continue;
                }
                sweep.note(d_negs[i], oracle::central_diff(loss, &negs[i]), tag + "/nce_neg");
            }
        }

        // structure loss: the softmax weights are constants, so the reference
        // for the negatives keeps them frozen at the base point
        {
            const double gamma_k = rng.uniform(0.5, 4.0);
            double d_pos = 0.0;
            std::vector<double> d_negs(n, 0.0);
            self_adversarial_grad(pos, negs, mask, gamma_k, upstream, d_pos, d_negs);

            const auto full = [&] {
                return upstream * self_adversarial(pos, negs, mask, gamma_k);
            };
            sweep.note(d_pos, oracle::central_diff(full, &pos), tag + "/adv_pos");

            std::vector<double> p(n, 0.0);
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                if (!mask[i]) mx = std::max(mx, negs[i]);
            }
            double z = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!mask[i]) z += std::exp(negs[i] - mx);
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (!mask[i]) p[i] = std::exp(negs[i] - mx) / z;
            }
            const auto frozen = [&] {
                double l = -std::log(sigmoid_ref(gamma_k + pos));
                for (std::size_t i = 0; i < n; ++i) {
                    if (!mask[i]) l -= p[i] * std::log(sigmoid_ref(-negs[i] - gamma_k));
                }
                return upstream * l;
            };
            for (std::size_t i = 0; i < n; ++i) {
                if (mask[i]) {
                    if (d_negs[i] != 0.0) return fmt("masked structure grad %g, want exact 0",
                                                     d_negs[i]);
                    continue;
                }
                sweep.note(d_negs[i], oracle::central_diff(frozen, &negs[i]), tag + "/adv_neg");
            }
        }

        // alignment: margin picked so the hinge is strictly active (no kink)
        {
            const Eigen::Index d = 5;
            Vec g(d), h(d), t(d);
            for (Eigen::Index i = 0; i < d; ++i) {
                g[i] = rng.normal();
                h[i] = rng.normal();
                t[i] = rng.normal();
            }
            const bool printed = inst % 2 == 0;
            const double dist_t = (g - t).norm();
            const double dist_h = (g - h).norm();
            const double gap = printed ? dist_h - dist_t : dist_t - dist_h;
            const double gamma_m = std::max(0.0, -gap) + 0.7;
            Vec d_g = Vec::Zero(d), d_h = Vec::Zero(d), d_t = Vec::Zero(d);
            alignment_grad(g, h, t, gamma_m, printed, upstream, d_g, d_h, d_t);
            const auto loss = [&] { return upstream * alignment(g, h, t, gamma_m, printed); };
            for (Eigen::Index i = 0; i < d; ++i) {
                sweep.note(d_g[i], oracle::central_diff(loss, &g[i]), tag + "/align_g");
                sweep.note(d_h[i], oracle::central_diff(loss, &h[i]), tag + "/align_h");
                sweep.note(d_t[i], oracle::central_diff(loss, &t[i]), tag + "/align_t");
            }
        }
    }
    return {};
}

// ---- shared training helpers ------------------------------------------------

struct RunOutput {
    Model model;
    TrainResult result;
};

RunOutput run_training(const PreparedData& data, const TrainConfig& config,
                       const TrainOptions& options = {}) {
    RunOutput out;
    out.model = build_model(config, data.graph);
    out.result = train(data, out.model, config, options);
    return out;
}

double test_split_mrr(const PreparedData& data, const Model& model, const TrainConfig& config) {
    const Evaluator ev(data, model, config, 4);
    return ev.evaluate(Split::Test).all.mrr;
}

// Per-query candidate count after filtering, for the Monte-Carlo baseline.
std::vector<std::int32_t> effective_candidates(const PreparedData& data,
                                               std::span<const Triple> queries,
                                               std::int32_t num_candidates) {
    std::vector<std::int32_t> out;
    out.reserve(queries.size());
    for (const Triple& q : queries) {
        const auto tails = data.filter.tails(q.head, q.relation);
        const auto filtered = static_cast<std::int32_t>(tails.size()) - 1; // gold stays
        out.push_back(num_candidates - filtered);
    }
    return out;
}

} // namespace

int main() {
    criterion(1, "analytic gradients match central finite differences", [] {
        const auto t0 = std::chrono::steady_clock::now();
        GradSweep sweep;
        if (auto d = check_kge_gradients(sweep); !d.empty()) return d;
        if (auto d = check_encoder_gradients(sweep); !d.empty()) return d;
        if (auto d = check_loss_gradients(sweep); !d.empty()) return d;
        if (auto d = sweep.gate(4 * 50 * 24); !d.empty()) return d;
        const double secs = seconds_since(t0);
        if (secs >= kGradBudgetSec) return fmt("took %.1fs, budget %.0fs", secs, kGradBudgetSec);
        return std::string();
    });

    criterion(2, "least-squares recovery reconstructs a planted decomposition", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const Eigen::Index V = 200, N = 10, D = 64;
        Rng rng(404);
        Mat A(N, D), T0(V, N);
        for (Eigen::Index i = 0; i < N; ++i)
            for (Eigen::Index j = 0; j < D; ++j) A(i, j) = rng.normal();
        for (Eigen::Index i = 0; i < V; ++i)
            for (Eigen::Index j = 0; j < N; ++j) T0(i, j) = rng.normal();
        const Mat E = T0 * A;
        const Mat T = fit_transform(E, A, 0.0);
        const double err = (T * A - E).cwiseAbs().maxCoeff();
        if (err >= kRecoverTol) return fmt("max |T*A - E| = %.3g", err);
        const double secs = seconds_since(t0);
        if (secs >= kRecoverBudgetSec) return fmt("took %.2fs, budget %.0fs", secs, kRecoverBudgetSec);
        return std::string();
    });

    criterion(3, "k-means objective never increases across iterations", [] {
        for (int f = 0; f < kKmeansFixtures; ++f) {
            Rng rng(derive_seed(505, "km", static_cast<std::uint64_t>(f)));
            const Eigen::Index V = 20 + static_cast<Eigen::Index>(rng.below(101));
            const Eigen::Index D = 2 + static_cast<Eigen::Index>(rng.below(15));
            const std::int32_t k = 1 + static_cast<std::int32_t>(rng.below(8));
            const Eigen::Index k_true = 2 + static_cast<Eigen::Index>(rng.below(5));
            Mat centers(k_true, D);
            for (Eigen::Index i = 0; i < k_true; ++i)
                for (Eigen::Index j = 0; j < D; ++j) centers(i, j) = 5.0 * rng.normal();
            Mat features(V, D);
            for (Eigen::Index i = 0; i < V; ++i) {
                const auto c = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(k_true)));
                for (Eigen::Index j = 0; j < D; ++j) features(i, j) = centers(c, j) + rng.normal();
            }
            const KMeansResult res = init_kmeans(features, k, 40, 1000 + f);
            if (res.objective.empty()) return fmt("fixture %d recorded no objective", f);
            if (res.iterations != static_cast<int>(res.objective.size()))
                return fmt("fixture %d: %d iterations vs %zu objective entries", f, res.iterations,
                           res.objective.size());
            for (std::size_t i = 1; i < res.objective.size(); ++i) {
                const double allowed = res.objective[i - 1] + kKmeansRiseTol * std::max(1.0, res.objective[i - 1]);
                if (res.objective[i] > allowed)
                    return fmt("fixture %d: objective rose %.17g -> %.17g at iteration %zu", f,
                               res.objective[i - 1], res.objective[i], i);
            }
            if (res.assignments.size() != static_cast<std::size_t>(V))
                return fmt("fixture %d: %zu assignments for %ld points", f, res.assignments.size(),
                           static_cast<long>(V));
            for (const auto a : res.assignments) {
                if (a < 0 || a >= k) return fmt("fixture %d: assignment %d out of range", f, a);
            }
        }
        // single cluster degenerates to the column mean
        Rng rng(606);
        Mat features(30, 6);
        for (Eigen::Index i = 0; i < 30; ++i)
            for (Eigen::Index j = 0; j < 6; ++j) features(i, j) = rng.normal();
        const KMeansResult res = init_kmeans(features, 1, 10, 7);
        const double err = (res.centroids.row(0) - features.colwise().mean()).cwiseAbs().maxCoeff();
        if (err >= kMeanTol) return fmt("k=1 centroid off the mean by %.3g", err);
        return std::string();
    });

    criterion(4, "training memorizes a small graph to MRR >= 0.95 in budget", [] {
        const auto t0 = std::chrono::steady_clock::now();
        testutil::TempDir dir;
        testutil::write_raw_dataset(dir.path, testutil::memorization_dataset(50, 5, 200, 4));
        const PreparedData data = testutil::prepare(dir.path, GraphMode::Transductive);
        TrainConfig cfg; // stock hyperparameters: only the budget and stop rule are set
        cfg.seed = 4;
        cfg.threads = 1;
        cfg.epochs = 300;
        cfg.eval_every = 5;
        cfg.eval_split = EvalSplit::Train;
        cfg.target_mrr = kMemorizeMrr;
        validate(cfg);
        const RunOutput run = run_training(data, cfg);
        const double secs = seconds_since(t0);
        const double best = run.result.best_mrr.value_or(0.0);
        if (best < kMemorizeMrr)
            return fmt("best train MRR %.4f after %zu epochs (%.1fs)", best,
                       run.result.epochs.size(), secs);
        if (secs >= kMemorizeBudgetSec)
            return fmt("reached %.4f but took %.1fs, budget %.0fs", best, secs, kMemorizeBudgetSec);
        return std::string();
    });

    criterion(5, "held-out composition beats the random baseline five-fold", [] {
        testutil::TempDir dir;
        testutil::write_raw_dataset(dir.path, testutil::compositional_dataset(40, 8));
        const PreparedData data = testutil::prepare(dir.path, GraphMode::Transductive);
        TrainConfig base = testutil::small_config(1);
        base.n_anchors = 6;
        base.epochs = 60;
        base.threads = 4;
        base.eval_every = base.epochs; // score once at the end; intermediate evals are not under test
        std::vector<double> mrrs;
        for (const std::uint64_t seed : {1, 2, 3}) {
            TrainConfig cfg = base;
            cfg.seed = seed;
            validate(cfg);
            const RunOutput run = run_training(data, cfg);
            mrrs.push_back(test_split_mrr(data, run.model, cfg));
        }
        const auto counts =
            effective_candidates(data, data.graph.test, data.graph.num_entities());
        const double baseline = oracle::mc_random_mrr(counts, 2000, 909);
        const double med = median(mrrs);
        if (med < kCompositionalFactor * baseline)
            return fmt("median test MRR %.4f vs baseline %.4f (need %.1fx)", med, baseline,
                       kCompositionalFactor);
        return std::string();
    });

    criterion(6, "uniform negatives hold up under a skewed tail distribution", [] {
        testutil::TempDir dir;
        testutil::write_raw_dataset(dir.path, testutil::zipf_dataset(7));
        const PreparedData data = testutil::prepare(dir.path, GraphMode::Transductive);
        TrainConfig base = testutil::small_config(1);
        base.epochs = 40;
        base.threads = 4;
        base.eval_every = base.epochs; // score once at the end; intermediate evals are not under test
        std::vector<double> in_batch, plus_uniform;
        for (const std::uint64_t seed : {1, 2, 3, 4, 5}) {
            for (const NegativeMode mode : {NegativeMode::InBatch, NegativeMode::InBatchPlusUniform}) {
                TrainConfig cfg = base;
                cfg.seed = seed;
                cfg.negatives = mode;
                validate(cfg);
                const RunOutput run = run_training(data, cfg);
                const double mrr = test_split_mrr(data, run.model, cfg);
                (mode == NegativeMode::InBatch ? in_batch : plus_uniform).push_back(mrr);
            }
        }
        const double med_in = median(in_batch), med_plus = median(plus_uniform);
        if (med_plus < med_in)
            return fmt("median MRR %.4f with uniform block vs %.4f in-batch only", med_plus, med_in);
        return std::string();
    });

    criterion(7, "removing a loss term never wins by more than the slack", [] {
        testutil::TempDir dir;
        testutil::write_raw_dataset(dir.path, testutil::zipf_dataset(7));
        const PreparedData data = testutil::prepare(dir.path, GraphMode::Transductive);
        TrainConfig base = testutil::small_config(1);
        base.epochs = 40;
        base.threads = 4;
        base.eval_every = base.epochs; // score once at the end; intermediate evals are not under test
        std::vector<double> full, no_structure, no_alignment;
        for (const std::uint64_t seed : {1, 2, 3, 4, 5}) {
            for (int variant = 0; variant < 3; ++variant) {
                TrainConfig cfg = base;
                cfg.seed = seed;
                cfg.use_structure_loss = variant != 1;
                cfg.use_alignment_loss = variant != 2;
                validate(cfg);
                const RunOutput run = run_training(data, cfg);
                for (const EpochLog& e : run.result.epochs) {
                    if (!cfg.use_structure_loss && e.loss_structure != 0.0)
                        return fmt("disabled structure loss reported %.3g", e.loss_structure);
                    if (!cfg.use_alignment_loss && e.loss_alignment != 0.0)
                        return fmt("disabled alignment loss reported %.3g", e.loss_alignment);
                }
                const double mrr = test_split_mrr(data, run.model, cfg);
                (variant == 0 ? full : variant == 1 ? no_structure : no_alignment).push_back(mrr);
            }
        }
        const double med_full = median(full);
        const double med_ns = median(no_structure), med_na = median(no_alignment);
        if (med_full + kAblationSlack < med_ns)
            return fmt("full %.4f trails no-structure %.4f beyond slack", med_full, med_ns);
        if (med_full + kAblationSlack < med_na)
            return fmt("full %.4f trails no-alignment %.4f beyond slack", med_full, med_na);
        return std::string();
    });

    criterion(8, "inductive serving skips entity weights and beats chance twice over", [] {
        testutil::TempDir dir;
        testutil::write_raw_dataset(dir.path, testutil::inductive_dataset(3));
        const PreparedData data = testutil::prepare(dir.path, GraphMode::Inductive);
        TrainConfig base = testutil::small_config(1);
        base.epochs = 60;
        base.threads = 4;
        base.eval_every = base.epochs; // score once at the end; intermediate evals are not under test
        base.alpha = 0.0; // no k-hop boost exists for unseen heads
        base.beta = 1.0;  // but the self-match still needs demoting
        std::vector<double> mrrs;
        for (const std::uint64_t seed : {1, 2, 3}) {
            TrainConfig cfg = base;
            cfg.seed = seed;
            validate(cfg);
            RunOutput run = run_training(data, cfg);
            Model served = run.model;
            served.anchors.drop_entity_weights(); // serving copy keeps no entity table at all
            served.anchors.reset_read_counter();
            const Evaluator ev(data, served, cfg, 4);
            const RankingReport rep = ev.evaluate(Split::Test);
            if (const auto reads = served.anchors.entity_weight_reads(); reads != 0)
                return fmt("evaluation read entity weights %llu times",
                           static_cast<unsigned long long>(reads));
            mrrs.push_back(rep.all.mrr);
        }
        const auto counts =
            effective_candidates(data, data.graph.test, data.graph.num_inductive_entities());
        const double baseline = oracle::mc_random_mrr(counts, 2000, 808);
        const double med = median(mrrs);
        if (med < kInductiveFactor * baseline)
            return fmt("median inductive MRR %.4f vs baseline %.4f (need %.1fx)", med, baseline,
                       kInductiveFactor);
        return std::string();
    });

    criterion(9, "filtered ranks equal a sort-based reference on tie-heavy data", [] {
        Rng rng(111);
        for (std::uint32_t f = 0; f < kRankFixtures; ++f) {
            const std::size_t V = 5 + rng.below(26);
            std::vector<double> scores(V);
            for (auto& s : scores) s = 0.25 * static_cast<double>(rng.below(5));
            const auto gold = static_cast<std::int32_t>(rng.below(V));
            FilterIndex filter;
            std::vector<std::int32_t> filtered_out;
            for (std::size_t t = 0; t < V; ++t) {
                if (static_cast<std::int32_t>(t) != gold && rng.below(4) == 0) {
                    filter.insert({5, 2, static_cast<std::int32_t>(t)});
                    filtered_out.push_back(static_cast<std::int32_t>(t));
                }
            }
            const std::uint32_t got = filtered_rank(scores, gold, 5, 2, filter);
            const std::uint32_t want = oracle::sorted_filtered_rank(scores, gold, filtered_out);
            if (got != want) return fmt("fixture %u: rank %u, reference %u", f, got, want);
        }
        // ties count against the gold
        const std::vector<double> scores = {0.9, 0.5, 0.5, 0.5, 0.1};
        if (const auto r = filtered_rank(scores, 2, 0, 0, FilterIndex{}); r != 4)
            return fmt("tie rank %u, want 4", r);
        return std::string();
    });

    criterion(10, "k-hop re-ranking adjustments are exact", [] {
        testutil::TempDir dir;
        testutil::write_raw_dataset(dir.path, testutil::tiny_dataset());
        const PreparedData data = testutil::prepare(dir.path, GraphMode::Transductive, 2);
        const std::int32_t V = data.graph.num_entities();
        std::vector<std::pair<std::int32_t, std::int32_t>> edges;
        for (const Triple& t : data.graph.train) edges.emplace_back(t.head, t.tail);

        for (std::int32_t head = 0; head < V; ++head) {
            std::vector<double> scores(static_cast<std::size_t>(V));
            for (std::int32_t i = 0; i < V; ++i)
                scores[static_cast<std::size_t>(i)] = 1.0 - 0.0625 * i; // dyadic, exact
            std::vector<double> expect = scores;
            for (const std::int32_t n : oracle::relaxed_khop(V, edges, head, data.neighbors.hops()))
                expect[static_cast<std::size_t>(n)] += 0.25;
            expect[static_cast<std::size_t>(head)] -= 0.0625;
            rerank_scores(scores, head, data.neighbors, 0.25, 0.0625, /*unseen_head=*/false);
            for (std::int32_t i = 0; i < V; ++i) {
                if (scores[static_cast<std::size_t>(i)] != expect[static_cast<std::size_t>(i)])
                    return fmt("head %d candidate %d: %.17g want %.17g", head, i,
                               scores[static_cast<std::size_t>(i)],
                               expect[static_cast<std::size_t>(i)]);
            }
            // unseen head: the k-hop set collapses to the head itself
            std::vector<double> unseen(static_cast<std::size_t>(V), 0.5);
            rerank_scores(unseen, head, data.neighbors, 0.25, 0.0625, /*unseen_head=*/true);
            for (std::int32_t i = 0; i < V; ++i) {
                const double want = i == head ? 0.5 + 0.25 - 0.0625 : 0.5;
                if (unseen[static_cast<std::size_t>(i)] != want)
                    return fmt("unseen head %d candidate %d: %.17g want %.17g", head, i,
                               unseen[static_cast<std::size_t>(i)], want);
            }
        }

        // with both adjustments off, evaluation is exactly score + filtered rank
        TrainConfig cfg = testutil::small_config(11);
        cfg.anchor_init = AnchorInit::Random;
        cfg.alpha = 0.0;
        cfg.beta = 0.0;
        const Model model = build_model(cfg, data.graph);
        const Evaluator ev(data, model, cfg, 1);
        const RankingReport rep = ev.evaluate(Split::Test);
        std::size_t q = 0;
        for (const Triple& t : data.graph.test) {
            const std::vector<double> scores = ev.score_all(t.head, t.relation);
            const std::uint32_t want = filtered_rank(scores, t.tail, t.head, t.relation, data.filter);
            if (rep.ranks[q] != want)
                return fmt("query %zu: rank %u, plain scoring gives %u", q, rep.ranks[q], want);
            ++q;
        }
        return std::string();
    });

    criterion(11, "same seed reproduces checkpoints byte for byte; threads do not matter", [] {
        testutil::TempDir dir;
        testutil::write_raw_dataset(dir.path, testutil::memorization_dataset(12, 2, 30, 5));
        const PreparedData data = testutil::prepare(dir.path, GraphMode::Transductive);
        TrainConfig cfg = testutil::small_config(9);
        cfg.epochs = 6;
        cfg.eval_every = 3;
        cfg.eval_split = EvalSplit::Train;
        cfg.threads = 1;
        validate(cfg);

        testutil::TempDir out_a, out_b;
        RunOutput a = run_training(data, cfg, {.out_dir = out_a.path});
        RunOutput b = run_training(data, cfg, {.out_dir = out_b.path});
        for (const char* file : {"last.akgc", "best.akgc"}) {
            if (slurp_bytes(out_a.path / file) != slurp_bytes(out_b.path / file))
                return fmt("%s differs between identical runs", file);
        }
        const Evaluator ev_a(data, a.model, cfg, 1), ev_b(data, b.model, cfg, 1);
        if (report_metrics_text(ev_a.evaluate(Split::Train)) !=
            report_metrics_text(ev_b.evaluate(Split::Train)))
            return std::string("metrics text differs between identical runs");

        TrainConfig threaded = cfg;
        threaded.threads = 4;
        RunOutput c = run_training(data, threaded);
        auto va = tensor_views(a.model);
        auto vc = tensor_views(c.model);
        if (va.size() != vc.size()) return std::string("tensor enumeration mismatch");
        for (std::size_t i = 0; i < va.size(); ++i) {
            if (va[i].name != vc[i].name || va[i].size() != vc[i].size())
                return fmt("tensor %s shape mismatch across thread counts", va[i].name.c_str());
            if (std::memcmp(va[i].data, vc[i].data, va[i].size() * sizeof(double)) != 0)
                return fmt("tensor %s differs between 1 and 4 threads", va[i].name.c_str());
        }
        return std::string();
    });

    criterion(12, "negative draws are uniform; in-batch negatives carry the data skew", [] {
        testutil::TempDir dir;
        testutil::write_raw_dataset(dir.path, testutil::zipf_dataset(7));
        const PreparedData data = testutil::prepare(dir.path, GraphMode::Transductive);
        const auto V = static_cast<std::uint64_t>(data.graph.num_entities());
        const std::size_t B = 8;
        std::vector<std::uint64_t> uniform_counts(V, 0), inbatch_counts(V, 0);
        Rng rng(555);
        for (int step = 0; step < 10000; ++step) {
            std::vector<Triple> batch;
            for (std::size_t q = 0; q < B; ++q)
                batch.push_back(data.graph.train[rng.below(data.graph.train.size())]);
            const NegativeBatch nb =
                build_negatives(batch, static_cast<std::int32_t>(V), data.train_filter,
                                NegativeMode::InBatchPlusUniform, /*mask_false_negatives=*/false,
                                derive_seed(555, "neg", static_cast<std::uint64_t>(step)));
            for (const std::int32_t id : nb.uniform_ids)
                ++uniform_counts[static_cast<std::size_t>(id)];
            for (const auto& negs : nb.negative_ids) {
                if (negs.size() != (B - 1) + nb.uniform_ids.size())
                    return fmt("negative list holds %zu entries, want %zu", negs.size(),
                               (B - 1) + nb.uniform_ids.size());
                for (std::size_t i = 0; i + nb.uniform_ids.size() < negs.size(); ++i)
                    ++inbatch_counts[static_cast<std::size_t>(negs[i])];
            }
        }
        const double p_uniform =
            oracle::chi2_pvalue(oracle::chi2_uniform_statistic(uniform_counts),
                                static_cast<int>(V) - 1);
        const double p_skew =
            oracle::chi2_pvalue(oracle::chi2_uniform_statistic(inbatch_counts),
                                static_cast<int>(V) - 1);
        if (p_uniform <= kChiAlpha)
            return fmt("uniform block rejected as uniform, p = %.4g", p_uniform);
        if (p_skew >= kChiAlpha)
            return fmt("in-batch tails look uniform, p = %.4g", p_skew);
        return std::string();
    });

    if (g_failures == 0) {
        std::printf("acceptance: 12/12 criteria passed\n");
    } else {
        std::printf("acceptance: %d criteria failed\n", g_failures);
    }
    return g_failures;
}
