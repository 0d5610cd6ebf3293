#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace akgc::text {

// Per-position role inside an input sequence.
enum class Tag : std::uint8_t {
    Anchor,
    HeadText,
    Separator,
    RelationText,
    EntityText,
};

// Token-index sequence fed to the encoder. Anchor positions carry the anchor
// index in `ids`; the separator carries the reserved index hash_vocab; all
// text positions carry hashed indices in [0, hash_vocab).
struct TokenSequence {
    std::vector<std::int32_t> ids;
    std::vector<Tag> tags;

    std::size_t size() const { return ids.size(); }
};

// Lowercases and splits on every non-alphanumeric codepoint; empty pieces are
// dropped. Bytes >= 0x80 (multi-byte UTF-8) are kept as token characters,
// only ASCII is case-folded.
std::vector<std::string> tokenize(std::string_view input);

// FNV-1a 64-bit over the UTF-8 bytes, reduced modulo hash_vocab.
std::int32_t hash_token(std::string_view word, std::int32_t hash_vocab);

// Builds [anchors ++ entity text (++ SEP ++ relation text)]. The relation
// segment is present only when relation_text is non-null (context sequences).
// Truncation to max_len drops entity-description tokens first and relation
// tokens last; anchor slots are never dropped.
TokenSequence build_sequence(std::string_view name,
                             std::string_view description,
                             const std::string* relation_text,
                             int n_anchors,
                             int max_len,
                             std::int32_t hash_vocab);

} // namespace akgc::text
