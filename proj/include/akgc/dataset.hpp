#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace akgc {

struct Triple {
    std::int32_t head = 0;
    std::int32_t relation = 0;
    std::int32_t tail = 0;

    friend bool operator==(const Triple&, const Triple&) = default;
};

enum class GraphMode { Transductive, Inductive };
enum class Split { Train, Valid, Test };

const char* split_name(Split s);

struct EntityRecord {
    std::string ext_id;
    std::string name;
    std::string description;
};

struct RelationRecord {
    std::string ext_id;
    std::string name;
};

// Integer-indexed knowledge graph with train/valid/test splits. In inductive
// mode the valid/test triples index into a second, disjoint entity
// vocabulary; the training triples never reference it.
class KnowledgeGraph {
public:
    GraphMode mode = GraphMode::Transductive;
    std::vector<EntityRecord> entities;
    std::vector<RelationRecord> relations;
    std::vector<EntityRecord> inductive_entities;
    std::vector<Triple> train;
    std::vector<Triple> valid;
    std::vector<Triple> test;
    std::int32_t raw_relation_count = 0; // before inverse augmentation
    bool augmented = false;
    std::vector<std::string> load_warnings;

    std::int32_t num_entities() const { return static_cast<std::int32_t>(entities.size()); }
    std::int32_t num_relations() const { return static_cast<std::int32_t>(relations.size()); }
    std::int32_t num_inductive_entities() const {
        return static_cast<std::int32_t>(inductive_entities.size());
    }

    const std::vector<Triple>& split(Split s) const;
    std::vector<Triple>& split(Split s);

    // Text record for an entity; `inductive` selects the held-out vocabulary.
    const EntityRecord& entity_record(std::int32_t index, bool inductive = false) const;
};

// Reads train.txt / valid.txt / test.txt / descriptions.txt (and, when
// present, relations.txt; inductive mode additionally descriptions_inductive.txt)
// from `directory`. Tab-separated, UTF-8, LF or CRLF.
KnowledgeGraph load_dataset(const std::filesystem::path& directory, GraphMode mode);

// Appends (t, r + raw_count, h) for every (h, r, t) in every split and doubles
// the relation vocabulary. Inverse names are the base name prefixed with
// "inverse ". Rejects graphs that are already augmented.
void add_inverse_relations(KnowledgeGraph& graph);

// (head, relation) -> set of known-true tails.
class FilterIndex {
public:
    void insert(const Triple& t);
    bool contains(std::int32_t head, std::int32_t relation, std::int32_t tail) const;
    // Sorted tails for a query, empty when the pair is unseen.
    std::vector<std::int32_t> tails(std::int32_t head, std::int32_t relation) const;
    std::size_t pair_count() const { return index_.size(); }

private:
    struct PairHash {
        std::size_t operator()(const std::pair<std::int32_t, std::int32_t>& p) const {
            return std::hash<std::uint64_t>{}(
                (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.first)) << 32) |
                static_cast<std::uint32_t>(p.second));
        }
    };
    std::unordered_map<std::pair<std::int32_t, std::int32_t>, std::vector<std::int32_t>, PairHash>
        index_;
    friend class GraphArchive;
};

// Over train ∪ valid ∪ test of `graph`.
FilterIndex build_filter_index(const KnowledgeGraph& graph);
// Over an explicit triple list (e.g. the train split alone, for negative
// masking).
FilterIndex build_filter_index(std::span<const Triple> triples);

// Entities reachable from `entity` within k undirected hops over the train
// split, including the entity itself. Sorted ascending.
std::vector<std::int32_t> khop_neighbors(const KnowledgeGraph& graph, std::int32_t entity, int k);

// Precomputed k-hop sets for every training entity.
class NeighborIndex {
public:
    static NeighborIndex build(const KnowledgeGraph& graph, int k);

    int hops() const { return k_; }
    bool contains(std::int32_t entity, std::int32_t candidate) const;
    const std::vector<std::int32_t>& neighbors(std::int32_t entity) const;

private:
    int k_ = 0;
    std::vector<std::vector<std::int32_t>> sets_;
    friend class GraphArchive;
};

// Fully prepared dataset: graph plus the evaluation-side indexes.
struct PreparedData {
    KnowledgeGraph graph;
    FilterIndex filter;      // train ∪ valid ∪ test
    FilterIndex train_filter; // train only, for false-negative masking
    NeighborIndex neighbors;
};

PreparedData prepare_dataset(KnowledgeGraph graph, int khop);

// Binary container for a prepared dataset (magic "AKGD").
void save_prepared(const PreparedData& data, const std::filesystem::path& file);
PreparedData load_prepared(const std::filesystem::path& file);

} // namespace akgc
