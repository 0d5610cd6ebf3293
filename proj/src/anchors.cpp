#include "akgc/anchors.hpp"

#include "akgc/rng.hpp"
#include "akgc/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace akgc {

Vec AnchorDecomposition::entity_structure_embedding(std::int32_t entity) const {
    if (entity < 0 || entity >= entity_count()) {
        throw std::out_of_range("no structure embedding for entity index " + std::to_string(entity) +
                                " (entity weights cover " + std::to_string(entity_count()) +
                                " training entities)");
    }
    ++t_reads_;
    return (T.row(entity) * A).transpose();
}

Vec AnchorDecomposition::relation_structure_embedding(std::int32_t relation) const {
    if (relation < 0 || relation >= relation_count()) {
        throw std::out_of_range("relation index " + std::to_string(relation) + " out of range");
    }
    return R.row(relation).transpose();
}

AnchorDecomposition init_random(std::int32_t V, std::int32_t N, std::int32_t D,
                                std::int32_t num_relations, std::uint64_t seed) {
    if (V < 1 || N < 1 || D < 1 || num_relations < 1) {
        throw std::invalid_argument("init_random: all dimensions must be >= 1");
    }
    const double b = 6.0 / std::sqrt(static_cast<double>(D));
    Rng rng(seed);
    AnchorDecomposition decomp;
    const auto fill = [&](Mat& m, Eigen::Index rows, Eigen::Index cols) {
        m.resize(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-b, b);
        }
    };
    fill(decomp.A, N, D);
    fill(decomp.T, V, N);
    fill(decomp.R, num_relations, D);
    return decomp;
}

namespace {

double wcss(const Mat& x, const Mat& centroids, const std::vector<std::int32_t>& assign) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        total += (x.row(i) - centroids.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
    }
    return total;
}

Mat kmeanspp_seed(const Mat& x, std::int32_t N, Rng& rng) {
    const Eigen::Index V = x.rows();
    Mat centroids(N, x.cols());
    centroids.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(V))));
    Vec dist2 = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (std::int32_t k = 1; k < N; ++k) {
        const double total = dist2.sum();
        Eigen::Index pick;
        if (total <= 0.0) {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(V)));
        } else {
            double target = rng.uniform() * total;
            pick = V - 1;
            for (Eigen::Index i = 0; i < V; ++i) {
                target -= dist2[i];
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.row(k) = x.row(pick);
        dist2 = dist2.cwiseMin((x.rowwise() - centroids.row(k)).rowwise().squaredNorm());
    }
    return centroids;
}

} // namespace

KMeansResult init_kmeans(const Mat& features, std::int32_t N, int max_iters, std::uint64_t seed) {
    const Eigen::Index V = features.rows();
    if (N < 1) throw std::invalid_argument("init_kmeans: need at least one cluster");
    if (V < N) {
        throw std::invalid_argument("init_kmeans: " + std::to_string(V) + " points cannot seed " +
                                    std::to_string(N) + " clusters");
    }
    Rng rng(seed);
    KMeansResult result;
    result.centroids = kmeanspp_seed(features, N, rng);
    result.assignments.assign(static_cast<std::size_t>(V), 0);

    std::vector<std::int32_t> previous;
    for (int iter = 0; iter < max_iters; ++iter) {
        previous = result.assignments;
        // Assignment step: nearest centroid, lowest index on ties.
        for (Eigen::Index i = 0; i < V; ++i) {
            Eigen::Index best = 0;
            double best_d = (features.row(i) - result.centroids.row(0)).squaredNorm();
            for (Eigen::Index k = 1; k < N; ++k) {
                const double d = (features.row(i) - result.centroids.row(k)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            result.assignments[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(best);
        }

        std::vector<Eigen::Index> counts(static_cast<std::size_t>(N), 0);
        for (const std::int32_t a : result.assignments) ++counts[static_cast<std::size_t>(a)];

        // Re-seed empty clusters with the point farthest from its current
        // centroid; moving that point to its own singleton cluster can only
        // lower the objective.
        for (std::int32_t k = 0; k < N; ++k) {
            if (counts[static_cast<std::size_t>(k)] > 0) continue;
            Eigen::Index farthest = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < V; ++i) {
                const std::int32_t a = result.assignments[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(a)] <= 1) continue; // don't empty a singleton
                const double d = (features.row(i) - result.centroids.row(a)).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    farthest = i;
                }
            }
            if (farthest < 0) continue; // all occupied clusters are singletons
            --counts[static_cast<std::size_t>(
                result.assignments[static_cast<std::size_t>(farthest)])];
            result.assignments[static_cast<std::size_t>(farthest)] = k;
            counts[static_cast<std::size_t>(k)] = 1;
        }

        // Update step: centroids become cluster means.
        Mat sums = Mat::Zero(N, features.cols());
        for (Eigen::Index i = 0; i < V; ++i) {
            sums.row(result.assignments[static_cast<std::size_t>(i)]) += features.row(i);
        }
        for (Eigen::Index k = 0; k < N; ++k) {
            if (counts[static_cast<std::size_t>(k)] > 0) {
                result.centroids.row(k) =
                    sums.row(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
            }
        }

        result.objective.push_back(wcss(features, result.centroids, result.assignments));
        result.iterations = iter + 1;
        if (result.assignments == previous) break;
    }
    return result;
}

Mat fit_transform(const Mat& E, const Mat& A, double ridge) {
    if (E.cols() != A.cols()) {
        throw std::invalid_argument("fit_transform: feature dimension mismatch between E and A");
    }
    if (ridge < 0.0) throw std::invalid_argument("fit_transform: ridge must be >= 0");
    for (Eigen::Index k = 0; k < A.rows(); ++k) {
        if (A.row(k).isZero(0.0)) {
            throw std::invalid_argument("fit_transform: anchor row " + std::to_string(k) +
                                        " is all-zero");
        }
    }
    Mat gram = A * A.transpose();
    gram.diagonal().array() += ridge;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) {
        throw std::runtime_error(
            "fit_transform: anchor Gram matrix is singular; anchors are linearly dependent "
            "(use a positive ridge)");
    }
    // T·gram = E·Aᵀ, and gram is symmetric.
    return lu.solve(A * E.transpose()).transpose();
}

TextFeatures text_feature_matrix(const KnowledgeGraph& graph, std::int32_t D,
                                 std::int32_t hash_vocab) {
    if (D < 1) throw std::invalid_argument("text_feature_matrix: D must be >= 1");
    TextFeatures out;
    out.rows = Mat::Zero(graph.num_entities(), D);
    std::unordered_map<std::int32_t, Vec> token_vectors;
    const auto token_vector = [&](std::int32_t id) -> const Vec& {
        auto it = token_vectors.find(id);
        if (it == token_vectors.end()) {
            Rng rng(derive_seed(0x616b6763ull, "token-feature", static_cast<std::uint64_t>(id)));
            Vec v(D);
            for (Eigen::Index j = 0; j < D; ++j) v[j] = rng.normal();
            v.normalize();
            it = token_vectors.emplace(id, std::move(v)).first;
        }
        return it->second;
    };
    for (std::int32_t e = 0; e < graph.num_entities(); ++e) {
        const auto& rec = graph.entities[static_cast<std::size_t>(e)];
        std::vector<std::string> words = text::tokenize(rec.name);
        for (auto& w : text::tokenize(rec.description)) words.push_back(std::move(w));
        if (words.empty()) {
            out.empty_entities.push_back(e);
            continue;
        }
        Vec row = Vec::Zero(D);
        for (const auto& w : words) row += token_vector(text::hash_token(w, hash_vocab));
        const double norm = row.norm();
        if (norm > 0.0) row /= norm;
        out.rows.row(e) = row.transpose();
    }
    return out;
}

Mat read_feature_matrix(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open feature file " + file.string());
    Eigen::Index V = 0, D = 0;
    if (!(in >> V >> D) || V < 1 || D < 1) {
        throw std::runtime_error("feature file " + file.string() +
                                 " must start with a 'V D' header of positive integers");
    }
    Mat features(V, D);
    for (Eigen::Index i = 0; i < V; ++i) {
        for (Eigen::Index j = 0; j < D; ++j) {
            if (!(in >> features(i, j))) {
                throw std::runtime_error("feature file " + file.string() + " is truncated at row " +
                                         std::to_string(i));
            }
        }
    }
    return features;
}

void write_feature_matrix(const Mat& features, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write feature file " + file.string());
    out << features.rows() << ' ' << features.cols() << '\n';
    out.precision(17);
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index j = 0; j < features.cols(); ++j) {
            if (j) out << ' ';
            out << features(i, j);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + file.string());
}

} // namespace akgc
