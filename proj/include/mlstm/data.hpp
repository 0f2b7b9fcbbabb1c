// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Corpus ingestion: whitespace tokenization with one end-of-sentence token
// per line, first-occurrence vocabulary ids, contiguous batching and
// unrolled windows for truncated BPTT.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mlstm {

using TokenId = std::uint32_t;

/// Token ids laid out [steps x batch]: at(t, b) is stream b at step t.
struct TokenGrid {
  std::size_t steps = 0;
  std::size_t batch = 0;
  std::vector<TokenId> ids;

  TokenGrid() = default;
  TokenGrid(std::size_t steps_, std::size_t batch_) : steps(steps_), batch(batch_), ids(steps_ * batch_) {}

  TokenId& at(std::size_t t, std::size_t b) { return ids[t * batch + b]; }
  TokenId at(std::size_t t, std::size_t b) const { return ids[t * batch + b]; }
  std::span<const TokenId> step(std::size_t t) const { return {ids.data() + t * batch, batch}; }

  friend bool operator==(const TokenGrid&, const TokenGrid&) = default;
};

class Vocabulary {
 public:
  static constexpr std::string_view kUnknown = "<unk>";
  static constexpr std::string_view kEndOfSentence = "<eos>";

  /// Ids by first occurrence; each line contributes its tokens and then
  /// <eos>; <unk> is appended if the text never contains it. Throws on a
  /// stream with no tokens.
  static Vocabulary build(std::istream& text);
  static Vocabulary build_from_file(const std::filesystem::path& path);

  /// Restores a vocabulary from its id-ordered token list.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  TokenId unk_id() const noexcept { return unk_id_; }
  TokenId eos_id() const noexcept { return eos_id_; }

  std::optional<TokenId> find(std::string_view token) const;
  TokenId id_or_unk(std::string_view token) const;
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  TokenId add(std::string_view token);
  void finalize();

  std::map<std::string, TokenId, std::less<>> ids_;
  std::vector<std::string> tokens_;
  TokenId unk_id_ = 0;
  TokenId eos_id_ = 0;
};

/// Out-of-vocabulary tokens map to <unk>; each line end maps to <eos>.
std::vector<TokenId> encode(std::istream& text, const Vocabulary& vocab);
std::vector<TokenId> encode_file(const std::filesystem::path& path, const Vocabulary& vocab);
std::vector<TokenId> encode_words(std::string_view words, const Vocabulary& vocab);

/// Inverse of encode up to whitespace: tokens separated by single spaces,
/// <eos> rendered as a line break.
std::string decode(std::span<const TokenId> ids, const Vocabulary& vocab);

/// batch_size contiguous streams of equal length; stream s holds
/// ids[s * steps, (s + 1) * steps). The remainder is dropped.
struct BatchedCorpus {
  std::size_t batch_size = 0;
  std::size_t steps = 0;
  std::size_t vocab_size = 0;
  std::vector<TokenId> ids;  // [batch_size x steps], row-major

  TokenId at(std::size_t stream, std::size_t step) const { return ids[stream * steps + step]; }
};

BatchedCorpus batchify(std::span<const TokenId> ids, std::size_t batch_size, std::size_t vocab_size);

/// One unrolled window; targets are the inputs shifted by one step.
struct Window {
  std::size_t start = 0;
  TokenGrid inputs;
  TokenGrid targets;
};

/// Contiguous windows over a batched corpus. Windows cover every step
/// except each stream's final one as inputs; the last window is shorter
/// than `unroll` when (steps - 1) is not a multiple of it.
class WindowSequence {
 public:
  WindowSequence(const BatchedCorpus& corpus, std::size_t unroll);

  std::size_t size() const noexcept { return count_; }
  Window operator[](std::size_t k) const;

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Window;
    using difference_type = std::ptrdiff_t;

    iterator(const WindowSequence* seq, std::size_t k) : seq_(seq), k_(k) {}
    Window operator*() const { return (*seq_)[k_]; }
    iterator& operator++() {
      ++k_;
      return *this;
    }
    bool operator==(const iterator& other) const { return k_ == other.k_; }

   private:
    const WindowSequence* seq_;
    std::size_t k_;
  };

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, count_}; }

 private:
  const BatchedCorpus* corpus_;
  std::size_t unroll_;
  std::size_t count_;
};

inline WindowSequence windows(const BatchedCorpus& corpus, std::size_t unroll) {
  return WindowSequence(corpus, unroll);
}

}  // namespace mlstm
