#include "akgc/text.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

#include "akgc/rng.hpp"

namespace akgc::text {

namespace {

bool is_token_byte(unsigned char c) {
    if (c >= 0x80) return true; // keep multi-byte UTF-8 intact
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char fold(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

} // namespace

std::vector<std::string> tokenize(std::string_view input) {
    std::vector<std::string> words;
    std::string current;
    for (const char raw : input) {
        const unsigned char c = static_cast<unsigned char>(raw);
        if (is_token_byte(c)) {
            current.push_back(fold(c));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

std::int32_t hash_token(std::string_view word, std::int32_t hash_vocab) {
    if (hash_vocab < 2) throw std::invalid_argument("hash_token: hash_vocab must be >= 2");
    return static_cast<std::int32_t>(fnv1a64(word) % static_cast<std::uint64_t>(hash_vocab));
}

TokenSequence build_sequence(std::string_view name,
                             std::string_view description,
                             const std::string* relation_text,
                             int n_anchors,
                             int max_len,
                             std::int32_t hash_vocab) {
    if (n_anchors < 0) throw std::invalid_argument("build_sequence: n_anchors must be >= 0");
    if (max_len <= n_anchors + 2) {
        throw std::invalid_argument("build_sequence: max_len must exceed n_anchors + 2");
    }
    if (hash_vocab < 2) throw std::invalid_argument("build_sequence: hash_vocab must be >= 2");

    std::vector<std::string> entity_words = tokenize(name);
    {
        std::vector<std::string> desc_words = tokenize(description);
        entity_words.insert(entity_words.end(),
                            std::make_move_iterator(desc_words.begin()),
                            std::make_move_iterator(desc_words.end()));
    }

    const std::size_t budget = static_cast<std::size_t>(max_len - n_anchors);
    std::size_t entity_keep = entity_words.size();
    std::size_t relation_keep = 0;
    std::vector<std::string> relation_words;
    if (relation_text != nullptr) {
        relation_words = tokenize(*relation_text);
        relation_keep = relation_words.size();
        // budget covers entity tokens + SEP + relation tokens
        if (entity_keep + 1 + relation_keep > budget) {
            if (relation_keep + 1 >= budget) {
                entity_keep = 0;
                relation_keep = budget - 1;
            } else {
                entity_keep = budget - 1 - relation_keep;
            }
        }
    } else {
        entity_keep = std::min(entity_keep, budget);
    }

    TokenSequence seq;
    seq.ids.reserve(static_cast<std::size_t>(n_anchors) + entity_keep + 1 + relation_keep);
    seq.tags.reserve(seq.ids.capacity());

    for (int a = 0; a < n_anchors; ++a) {
        seq.ids.push_back(a);
        seq.tags.push_back(Tag::Anchor);
    }
    const Tag entity_tag = relation_text != nullptr ? Tag::HeadText : Tag::EntityText;
    for (std::size_t i = 0; i < entity_keep; ++i) {
        seq.ids.push_back(hash_token(entity_words[i], hash_vocab));
        seq.tags.push_back(entity_tag);
    }
    if (relation_text != nullptr) {
        seq.ids.push_back(hash_vocab); // reserved separator index
        seq.tags.push_back(Tag::Separator);
        for (std::size_t i = 0; i < relation_keep; ++i) {
            seq.ids.push_back(hash_token(relation_words[i], hash_vocab));
            seq.tags.push_back(Tag::RelationText);
        }
    }
    return seq;
}

} // namespace akgc::text
