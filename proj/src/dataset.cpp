#include "akgc/dataset.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace akgc {

namespace {

static_assert(std::endian::native == std::endian::little,
              "serialized formats are little-endian; this build targets little-endian hosts");

[[noreturn]] void fail(const std::string& message) { throw std::runtime_error(message); }

std::string loc(const std::filesystem::path& file, std::size_t line_number) {
    return file.filename().string() + ":" + std::to_string(line_number);
}

// Splits one line on tabs. CR at line end is stripped by the caller.
std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

template <typename LineFn>
void for_each_line(const std::filesystem::path& file, LineFn&& fn) {
    std::ifstream in(file, std::ios::binary);
    if (!in) fail("cannot open " + file.string());
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fn(line, line_number);
    }
}

struct VocabBuilder {
    std::vector<EntityRecord>* records;
    std::unordered_map<std::string, std::int32_t> by_ext;

    std::int32_t lookup(const std::string& ext) const {
        const auto it = by_ext.find(ext);
        return it == by_ext.end() ? -1 : it->second;
    }

    std::int32_t add(EntityRecord rec, const std::string& where) {
        const auto [it, inserted] = by_ext.emplace(rec.ext_id, static_cast<std::int32_t>(records->size()));
        if (!inserted) fail("duplicate entity id '" + rec.ext_id + "' at " + where);
        records->push_back(std::move(rec));
        return it->second;
    }
};

void read_descriptions(const std::filesystem::path& file, VocabBuilder& vocab) {
    for_each_line(file, [&](const std::string& line, std::size_t n) {
        const auto fields = split_tabs(line);
        if (fields.size() != 3) {
            fail("malformed description line (expected id<TAB>name<TAB>description) at " + loc(file, n));
        }
        vocab.add(EntityRecord{fields[0], fields[1], fields[2]}, loc(file, n));
    });
}

struct RawTriple {
    std::string head, relation, tail;
    std::string where;
};

std::vector<RawTriple> read_triples(const std::filesystem::path& file) {
    std::vector<RawTriple> out;
    for_each_line(file, [&](const std::string& line, std::size_t n) {
        const auto fields = split_tabs(line);
        if (fields.size() != 3) {
            fail("malformed triple line (expected head<TAB>relation<TAB>tail) at " + loc(file, n));
        }
        out.push_back(RawTriple{fields[0], fields[1], fields[2], loc(file, n)});
    });
    return out;
}

} // namespace

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Valid: return "valid";
        case Split::Test: return "test";
    }
    return "?";
}

const std::vector<Triple>& KnowledgeGraph::split(Split s) const {
    switch (s) {
        case Split::Train: return train;
        case Split::Valid: return valid;
        case Split::Test: return test;
    }
    fail("unreachable split");
}

std::vector<Triple>& KnowledgeGraph::split(Split s) {
    return const_cast<std::vector<Triple>&>(static_cast<const KnowledgeGraph&>(*this).split(s));
}

const EntityRecord& KnowledgeGraph::entity_record(std::int32_t index, bool inductive) const {
    const auto& vocab = inductive ? inductive_entities : entities;
    if (index < 0 || static_cast<std::size_t>(index) >= vocab.size()) {
        throw std::out_of_range("entity index " + std::to_string(index) + " out of range");
    }
    return vocab[static_cast<std::size_t>(index)];
}

KnowledgeGraph load_dataset(const std::filesystem::path& directory, GraphMode mode) {
    if (!std::filesystem::is_directory(directory)) {
        fail("dataset directory not found: " + directory.string());
    }

    KnowledgeGraph g;
    g.mode = mode;

    VocabBuilder train_vocab{&g.entities, {}};
    read_descriptions(directory / "descriptions.txt", train_vocab);

    VocabBuilder inductive_vocab{&g.inductive_entities, {}};
    if (mode == GraphMode::Inductive) {
        read_descriptions(directory / "descriptions_inductive.txt", inductive_vocab);
    }

    std::unordered_map<std::string, std::int32_t> relation_by_ext;
    const auto relations_file = directory / "relations.txt";
    if (std::filesystem::exists(relations_file)) {
        for_each_line(relations_file, [&](const std::string& line, std::size_t n) {
            const auto fields = split_tabs(line);
            if (fields.size() != 2) {
                fail("malformed relation line (expected id<TAB>name) at " + loc(relations_file, n));
            }
            const auto [it, inserted] =
                relation_by_ext.emplace(fields[0], static_cast<std::int32_t>(g.relations.size()));
            if (!inserted) fail("duplicate relation id '" + fields[0] + "' at " + loc(relations_file, n));
            g.relations.push_back(RelationRecord{fields[0], fields[1]});
        });
    }

    const auto relation_index = [&](const std::string& ext, const std::string& where,
                                    bool allow_new) -> std::int32_t {
        const auto it = relation_by_ext.find(ext);
        if (it != relation_by_ext.end()) return it->second;
        if (!allow_new) fail("triple references unknown relation id '" + ext + "' at " + where);
        const std::int32_t idx = static_cast<std::int32_t>(g.relations.size());
        relation_by_ext.emplace(ext, idx);
        // Without a relations.txt the external id doubles as the name.
        g.relations.push_back(RelationRecord{ext, ext});
        return idx;
    };

    const bool relations_fixed = !g.relations.empty();

    const auto train_entity = [&](const std::string& ext, const std::string& where,
                                  bool allow_new) -> std::int32_t {
        std::int32_t idx = train_vocab.lookup(ext);
        if (idx >= 0) return idx;
        if (!allow_new) {
            fail("triple references entity '" + ext + "' absent from the training vocabulary at " + where);
        }
        idx = train_vocab.add(EntityRecord{ext, ext, std::string{}}, where);
        g.load_warnings.push_back("entity '" + ext + "' has no description record (" + where + ")");
        return idx;
    };

    const auto inductive_entity = [&](const std::string& ext, const std::string& where) -> std::int32_t {
        if (train_vocab.lookup(ext) >= 0) {
            fail("inductive split references training entity '" + ext + "' at " + where +
                 " (vocabularies must be disjoint)");
        }
        std::int32_t idx = inductive_vocab.lookup(ext);
        if (idx >= 0) return idx;
        idx = inductive_vocab.add(EntityRecord{ext, ext, std::string{}}, where);
        g.load_warnings.push_back("entity '" + ext + "' has no description record (" + where + ")");
        return idx;
    };

    for (const auto& raw : read_triples(directory / "train.txt")) {
        g.train.push_back(Triple{train_entity(raw.head, raw.where, true),
                                 relation_index(raw.relation, raw.where, !relations_fixed),
                                 train_entity(raw.tail, raw.where, true)});
    }

    for (const Split s : {Split::Valid, Split::Test}) {
        const auto file = directory / (std::string(split_name(s)) + ".txt");
        for (const auto& raw : read_triples(file)) {
            std::int32_t h, t;
            if (mode == GraphMode::Transductive) {
                h = train_entity(raw.head, raw.where, false);
                t = train_entity(raw.tail, raw.where, false);
            } else {
                h = inductive_entity(raw.head, raw.where);
                t = inductive_entity(raw.tail, raw.where);
            }
            g.split(s).push_back(Triple{h, relation_index(raw.relation, raw.where, !relations_fixed), t});
        }
    }

    if (mode == GraphMode::Inductive) {
        // Disjointness is enforced per triple above; assert the vocabularies
        // never alias as a whole.
        for (const auto& rec : g.inductive_entities) {
            if (train_vocab.lookup(rec.ext_id) >= 0) {
                fail("inductive vocabulary overlaps training vocabulary on '" + rec.ext_id + "'");
            }
        }
    }

    g.raw_relation_count = g.num_relations();
    return g;
}

void add_inverse_relations(KnowledgeGraph& graph) {
    if (graph.augmented) fail("graph is already augmented with inverse relations");
    const std::int32_t raw = graph.num_relations();
    graph.relations.reserve(static_cast<std::size_t>(raw) * 2);
    for (std::int32_t r = 0; r < raw; ++r) {
        const auto& base = graph.relations[static_cast<std::size_t>(r)];
        graph.relations.push_back(RelationRecord{"inverse:" + base.ext_id, "inverse " + base.name});
    }
    for (const Split s : {Split::Train, Split::Valid, Split::Test}) {
        auto& triples = graph.split(s);
        const std::size_t n = triples.size();
        triples.reserve(n * 2);
        for (std::size_t i = 0; i < n; ++i) {
            const Triple t = triples[i];
            triples.push_back(Triple{t.tail, t.relation + raw, t.head});
        }
    }
    graph.raw_relation_count = raw;
    graph.augmented = true;
}

void FilterIndex::insert(const Triple& t) {
    auto& tails = index_[{t.head, t.relation}];
    const auto it = std::lower_bound(tails.begin(), tails.end(), t.tail);
    if (it == tails.end() || *it != t.tail) tails.insert(it, t.tail);
}

bool FilterIndex::contains(std::int32_t head, std::int32_t relation, std::int32_t tail) const {
    const auto it = index_.find({head, relation});
    if (it == index_.end()) return false;
    return std::binary_search(it->second.begin(), it->second.end(), tail);
}

std::vector<std::int32_t> FilterIndex::tails(std::int32_t head, std::int32_t relation) const {
    const auto it = index_.find({head, relation});
    return it == index_.end() ? std::vector<std::int32_t>{} : it->second;
}

FilterIndex build_filter_index(const KnowledgeGraph& graph) {
    FilterIndex index;
    for (const Split s : {Split::Train, Split::Valid, Split::Test}) {
        for (const Triple& t : graph.split(s)) index.insert(t);
    }
    return index;
}

FilterIndex build_filter_index(std::span<const Triple> triples) {
    FilterIndex index;
    for (const Triple& t : triples) index.insert(t);
    return index;
}

namespace {

std::vector<std::vector<std::int32_t>> undirected_adjacency(const KnowledgeGraph& graph) {
    std::vector<std::vector<std::int32_t>> adj(static_cast<std::size_t>(graph.num_entities()));
    for (const Triple& t : graph.train) {
        if (t.head == t.tail) continue;
        adj[static_cast<std::size_t>(t.head)].push_back(t.tail);
        adj[static_cast<std::size_t>(t.tail)].push_back(t.head);
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return adj;
}

std::vector<std::int32_t> bfs_khop(const std::vector<std::vector<std::int32_t>>& adj,
                                   std::int32_t source, int k) {
    std::vector<std::int32_t> found{source};
    std::vector<char> seen(adj.size(), 0);
    seen[static_cast<std::size_t>(source)] = 1;
    std::deque<std::pair<std::int32_t, int>> frontier{{source, 0}};
    while (!frontier.empty()) {
        const auto [node, depth] = frontier.front();
        frontier.pop_front();
        if (depth == k) continue;
        for (const std::int32_t next : adj[static_cast<std::size_t>(node)]) {
            if (!seen[static_cast<std::size_t>(next)]) {
                seen[static_cast<std::size_t>(next)] = 1;
                found.push_back(next);
                frontier.emplace_back(next, depth + 1);
            }
        }
    }
    std::sort(found.begin(), found.end());
    return found;
}

} // namespace

std::vector<std::int32_t> khop_neighbors(const KnowledgeGraph& graph, std::int32_t entity, int k) {
    if (entity < 0 || entity >= graph.num_entities()) {
        throw std::out_of_range("khop_neighbors: entity index out of range");
    }
    if (k < 0) throw std::invalid_argument("khop_neighbors: k must be >= 0");
    return bfs_khop(undirected_adjacency(graph), entity, k);
}

NeighborIndex NeighborIndex::build(const KnowledgeGraph& graph, int k) {
    if (k < 0) throw std::invalid_argument("NeighborIndex: k must be >= 0");
    NeighborIndex index;
    index.k_ = k;
    const auto adj = undirected_adjacency(graph);
    index.sets_.resize(static_cast<std::size_t>(graph.num_entities()));
    for (std::int32_t e = 0; e < graph.num_entities(); ++e) {
        index.sets_[static_cast<std::size_t>(e)] = bfs_khop(adj, e, k);
    }
    return index;
}

bool NeighborIndex::contains(std::int32_t entity, std::int32_t candidate) const {
    if (entity < 0 || static_cast<std::size_t>(entity) >= sets_.size()) return false;
    const auto& set = sets_[static_cast<std::size_t>(entity)];
    return std::binary_search(set.begin(), set.end(), candidate);
}

const std::vector<std::int32_t>& NeighborIndex::neighbors(std::int32_t entity) const {
    if (entity < 0 || static_cast<std::size_t>(entity) >= sets_.size()) {
        throw std::out_of_range("NeighborIndex: entity index out of range");
    }
    return sets_[static_cast<std::size_t>(entity)];
}

PreparedData prepare_dataset(KnowledgeGraph graph, int khop) {
    PreparedData data;
    data.graph = std::move(graph);
    if (data.graph.mode == GraphMode::Inductive) {
        // Inductive valid/test triples index the held-out vocabulary, which is
        // numerically disjoint from training ids; filtering against training
        // triples would cross id spaces.
        for (const Split s : {Split::Valid, Split::Test}) {
            for (const Triple& t : data.graph.split(s)) data.filter.insert(t);
        }
    } else {
        data.filter = build_filter_index(data.graph);
    }
    data.train_filter = build_filter_index(std::span<const Triple>(data.graph.train));
    data.neighbors = NeighborIndex::build(data.graph, khop);
    return data;
}

// ---------------------------------------------------------------------------
// Binary archive
// ---------------------------------------------------------------------------

class GraphArchive {
public:
    static void save(const PreparedData& data, const std::filesystem::path& file);
    static PreparedData load(const std::filesystem::path& file);

private:
    static void put_u32(std::ostream& out, std::uint32_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    static void put_u64(std::ostream& out, std::uint64_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    static void put_str(std::ostream& out, const std::string& s) {
        put_u64(out, s.size());
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    static std::uint32_t get_u32(std::istream& in) {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        return v;
    }
    static std::uint64_t get_u64(std::istream& in) {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        return v;
    }
    static std::string get_str(std::istream& in) {
        const std::uint64_t n = get_u64(in);
        std::string s(n, '\0');
        in.read(s.data(), static_cast<std::streamsize>(n));
        return s;
    }
    static void put_triples(std::ostream& out, const std::vector<Triple>& ts) {
        put_u64(out, ts.size());
        for (const Triple& t : ts) {
            put_u32(out, static_cast<std::uint32_t>(t.head));
            put_u32(out, static_cast<std::uint32_t>(t.relation));
            put_u32(out, static_cast<std::uint32_t>(t.tail));
        }
    }
    static std::vector<Triple> get_triples(std::istream& in) {
        std::vector<Triple> ts(get_u64(in));
        for (Triple& t : ts) {
            t.head = static_cast<std::int32_t>(get_u32(in));
            t.relation = static_cast<std::int32_t>(get_u32(in));
            t.tail = static_cast<std::int32_t>(get_u32(in));
        }
        return ts;
    }
    static void put_entities(std::ostream& out, const std::vector<EntityRecord>& es) {
        put_u64(out, es.size());
        for (const auto& e : es) {
            put_str(out, e.ext_id);
            put_str(out, e.name);
            put_str(out, e.description);
        }
    }
    static std::vector<EntityRecord> get_entities(std::istream& in) {
        std::vector<EntityRecord> es(get_u64(in));
        for (auto& e : es) {
            e.ext_id = get_str(in);
            e.name = get_str(in);
            e.description = get_str(in);
        }
        return es;
    }
};

void GraphArchive::save(const PreparedData& data, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot write " + file.string());
    out.write("AKGD", 4);
    put_u32(out, 1); // format version
    const KnowledgeGraph& g = data.graph;
    put_u32(out, g.mode == GraphMode::Inductive ? 1 : 0);
    put_u32(out, g.augmented ? 1 : 0);
    put_u32(out, static_cast<std::uint32_t>(g.raw_relation_count));
    put_entities(out, g.entities);
    put_entities(out, g.inductive_entities);
    put_u64(out, g.relations.size());
    for (const auto& r : g.relations) {
        put_str(out, r.ext_id);
        put_str(out, r.name);
    }
    put_triples(out, g.train);
    put_triples(out, g.valid);
    put_triples(out, g.test);

    const auto put_filter = [&](const FilterIndex& f) {
        std::vector<std::pair<std::pair<std::int32_t, std::int32_t>, const std::vector<std::int32_t>*>>
            pairs;
        pairs.reserve(f.index_.size());
        for (const auto& [key, tails] : f.index_) pairs.emplace_back(key, &tails);
        std::sort(pairs.begin(), pairs.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        put_u64(out, pairs.size());
        for (const auto& [key, tails] : pairs) {
            put_u32(out, static_cast<std::uint32_t>(key.first));
            put_u32(out, static_cast<std::uint32_t>(key.second));
            put_u64(out, tails->size());
            for (const std::int32_t t : *tails) put_u32(out, static_cast<std::uint32_t>(t));
        }
    };
    put_filter(data.filter);
    put_filter(data.train_filter);

    put_u32(out, static_cast<std::uint32_t>(data.neighbors.k_));
    put_u64(out, data.neighbors.sets_.size());
    for (const auto& set : data.neighbors.sets_) {
        put_u64(out, set.size());
        for (const std::int32_t e : set) put_u32(out, static_cast<std::uint32_t>(e));
    }
    if (!out) fail("write failed for " + file.string());
}

PreparedData GraphArchive::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) fail("cannot open " + file.string());
    char magic[4] = {};
    in.read(magic, 4);
    if (std::string_view(magic, 4) != "AKGD") fail(file.string() + " is not a prepared dataset");
    const std::uint32_t version = get_u32(in);
    if (version != 1) fail("unsupported dataset format version " + std::to_string(version));

    PreparedData data;
    KnowledgeGraph& g = data.graph;
    g.mode = get_u32(in) != 0 ? GraphMode::Inductive : GraphMode::Transductive;
    g.augmented = get_u32(in) != 0;
    g.raw_relation_count = static_cast<std::int32_t>(get_u32(in));
    g.entities = get_entities(in);
    g.inductive_entities = get_entities(in);
    g.relations.resize(get_u64(in));
    for (auto& r : g.relations) {
        r.ext_id = get_str(in);
        r.name = get_str(in);
    }
    g.train = get_triples(in);
    g.valid = get_triples(in);
    g.test = get_triples(in);

    const auto get_filter = [&](FilterIndex& f) {
        const std::uint64_t pairs = get_u64(in);
        for (std::uint64_t i = 0; i < pairs; ++i) {
            const std::int32_t h = static_cast<std::int32_t>(get_u32(in));
            const std::int32_t r = static_cast<std::int32_t>(get_u32(in));
            std::vector<std::int32_t> tails(get_u64(in));
            for (auto& t : tails) t = static_cast<std::int32_t>(get_u32(in));
            f.index_.emplace(std::make_pair(h, r), std::move(tails));
        }
    };
    get_filter(data.filter);
    get_filter(data.train_filter);

    data.neighbors.k_ = static_cast<int>(get_u32(in));
    data.neighbors.sets_.resize(get_u64(in));
    for (auto& set : data.neighbors.sets_) {
        set.resize(get_u64(in));
        for (auto& e : set) e = static_cast<std::int32_t>(get_u32(in));
    }
    if (!in) fail("truncated dataset file " + file.string());
    return data;
}

void save_prepared(const PreparedData& data, const std::filesystem::path& file) {
    GraphArchive::save(data, file);
}

PreparedData load_prepared(const std::filesystem::path& file) { return GraphArchive::load(file); }

} // namespace akgc
