#pragma once

#include "akgc/dataset.hpp"
#include "akgc/linalg.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace akgc {

// Structure-embedding branch: every training entity's structure vector is a
// linear combination of N shared anchors, h_s = T[i]·A, compressing the usual
// V×D entity table to V×N + N×D. Relations keep a plain table.
class AnchorDecomposition {
public:
    Mat A; // N×D anchor vectors
    Mat T; // V×N per-entity anchor weights
    Mat R; // |relations|×D relation vectors

    AnchorDecomposition() = default;
    AnchorDecomposition(const AnchorDecomposition& other)
        : A(other.A), T(other.T), R(other.R), t_reads_(other.t_reads_.load()) {}
    AnchorDecomposition(AnchorDecomposition&& other) noexcept
        : A(std::move(other.A)), T(std::move(other.T)), R(std::move(other.R)),
          t_reads_(other.t_reads_.load()) {}
    AnchorDecomposition& operator=(const AnchorDecomposition& other) {
        A = other.A;
        T = other.T;
        R = other.R;
        t_reads_.store(other.t_reads_.load());
        return *this;
    }
    AnchorDecomposition& operator=(AnchorDecomposition&& other) noexcept {
        A = std::move(other.A);
        T = std::move(other.T);
        R = std::move(other.R);
        t_reads_.store(other.t_reads_.load());
        return *this;
    }

    std::int32_t anchor_count() const { return static_cast<std::int32_t>(A.rows()); }
    std::int32_t dim() const { return static_cast<std::int32_t>(A.cols()); }
    std::int32_t entity_count() const { return static_cast<std::int32_t>(T.rows()); }
    std::int32_t relation_count() const { return static_cast<std::int32_t>(R.rows()); }

    // T[i]·A. Counts every reconstruction so evaluations can assert they never
    // touched the entity table (the inductive contract).
    Vec entity_structure_embedding(std::int32_t entity) const;
    Vec relation_structure_embedding(std::int32_t relation) const;

    std::uint64_t entity_weight_reads() const { return t_reads_; }
    void reset_read_counter() const { t_reads_ = 0; }

    // Physically discards T, leaving an anchors+relations-only view for
    // inductive serving. Any later entity_structure_embedding call throws.
    void drop_entity_weights() { T.resize(0, 0); }

private:
    mutable std::atomic<std::uint64_t> t_reads_{0}; // atomic: read concurrently from worker chunks
};

// All entries i.i.d. uniform on [-b, b], b = 6/sqrt(D).
AnchorDecomposition init_random(std::int32_t V, std::int32_t N, std::int32_t D,
                                std::int32_t num_relations, std::uint64_t seed);

struct KMeansResult {
    Mat centroids;                       // N×D
    std::vector<std::int32_t> assignments; // size V
    std::vector<double> objective;       // WCSS after each Lloyd iteration
    int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Stops when assignments are stable
// or after max_iters. An empty cluster is re-seeded to the point currently
// farthest from its assigned centroid (lowest index on ties), which keeps the
// objective non-increasing.
KMeansResult init_kmeans(const Mat& features, std::int32_t N, int max_iters, std::uint64_t seed);

// Least-squares transformation recovery: T = E·Aᵀ·(A·Aᵀ + εI)⁻¹. With ε = 0
// this is the Moore–Penrose solution and requires A·Aᵀ to be invertible.
Mat fit_transform(const Mat& E, const Mat& A, double ridge);

struct TextFeatures {
    Mat rows;                               // V×D, zero row for token-less entities
    std::vector<std::int32_t> empty_entities; // indices of those zero rows
};

// Deterministic text featurizer: row i is the L2-normalized sum of fixed
// pseudo-random unit vectors, one per hashed token of entity i's name and
// description. Stands in for a sentence encoder when clustering anchors.
TextFeatures text_feature_matrix(const KnowledgeGraph& graph, std::int32_t D, std::int32_t hash_vocab);

// Plain-text feature matrix exchange format: header "V D", then V rows of D
// whitespace-separated numbers. Lets externally computed entity features feed
// the k-means path.
Mat read_feature_matrix(const std::filesystem::path& file);
void write_feature_matrix(const Mat& features, const std::filesystem::path& file);

} // namespace akgc
