// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/data.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "mlstm/error.hpp"

namespace mlstm {

namespace {

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open corpus file '" + path.string() + "'");
  return in;
}

// Calls on_word(token) for each whitespace-separated token and on_eol() at
// the end of each line.
template <class OnWord, class OnEol>
void scan(std::istream& text, OnWord&& on_word, OnEol&& on_eol) {
  std::string line;
  while (std::getline(text, line)) {
    std::istringstream words(line);
    std::string word;
    while (words >> word) on_word(word);
    on_eol();
  }
}

}  // namespace

TokenId Vocabulary::add(std::string_view token) {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(std::string(token), id);
  return id;
}

void Vocabulary::finalize() {
  unk_id_ = add(kUnknown);
  eos_id_ = add(kEndOfSentence);
}

Vocabulary Vocabulary::build(std::istream& text) {
  Vocabulary vocab;
  std::size_t words = 0;
  scan(
      text,
      [&](const std::string& w) {
        vocab.add(w);
        ++words;
      },
      [&] { vocab.add(kEndOfSentence); });
  require(words > 0, ErrorKind::invalid_argument, "build_vocabulary: input contains no tokens");
  vocab.finalize();
  return vocab;
}

Vocabulary Vocabulary::build_from_file(const std::filesystem::path& path) {
  std::ifstream in = open_text(path);
  return build(in);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary vocab;
  for (const std::string& t : tokens) {
    require(!vocab.find(t).has_value(), ErrorKind::corrupt, "vocabulary: duplicate token '" + t + "'");
    vocab.add(t);
  }
  require(vocab.find(kUnknown).has_value() && vocab.find(kEndOfSentence).has_value(),
          ErrorKind::corrupt, "vocabulary: missing <unk> or <eos>");
  vocab.finalize();
  return vocab;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  return std::nullopt;
}

TokenId Vocabulary::id_or_unk(std::string_view token) const {
  return find(token).value_or(unk_id_);
}

const std::string& Vocabulary::token(TokenId id) const {
  require(id < tokens_.size(), ErrorKind::invalid_argument, "vocabulary: id out of range");
  return tokens_[id];
}

std::vector<TokenId> encode(std::istream& text, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  scan(
      text, [&](const std::string& w) { ids.push_back(vocab.id_or_unk(w)); },
      [&] { ids.push_back(vocab.eos_id()); });
  return ids;
}

std::vector<TokenId> encode_file(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in = open_text(path);
  return encode(in, vocab);
}

std::vector<TokenId> encode_words(std::string_view words, const Vocabulary& vocab) {
  std::istringstream in{std::string(words)};
  std::vector<TokenId> ids;
  std::string w;
  while (in >> w) ids.push_back(vocab.id_or_unk(w));
  return ids;
}

std::string decode(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::string out;
  bool line_start = true;
  for (TokenId id : ids) {
    if (id == vocab.eos_id()) {
      out += '\n';
      line_start = true;
      continue;
    }
    if (!line_start) out += ' ';
    out += vocab.token(id);
    line_start = false;
  }
  return out;
}

BatchedCorpus batchify(std::span<const TokenId> ids, std::size_t batch_size, std::size_t vocab_size) {
  require(batch_size >= 1, ErrorKind::invalid_argument, "batchify: batch size must be >= 1");
  require(ids.size() >= batch_size, ErrorKind::invalid_argument,
          "batchify: corpus shorter than the batch size");
  BatchedCorpus corpus;
  corpus.batch_size = batch_size;
  corpus.steps = ids.size() / batch_size;
  corpus.vocab_size = vocab_size;
  corpus.ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(batch_size * corpus.steps));
  return corpus;
}

WindowSequence::WindowSequence(const BatchedCorpus& corpus, std::size_t unroll)
    : corpus_(&corpus), unroll_(unroll) {
  require(unroll >= 1, ErrorKind::invalid_argument, "windows: unroll must be >= 1");
  require(corpus.steps >= 2, ErrorKind::invalid_argument,
          "windows: each stream needs at least two tokens");
  count_ = (corpus.steps - 1 + unroll - 1) / unroll;
}

Window WindowSequence::operator[](std::size_t k) const {
  require(k < count_, ErrorKind::invalid_argument, "windows: index out of range");
  const std::size_t start = k * unroll_;
  const std::size_t len = std::min(unroll_, corpus_->steps - 1 - start);
  Window w{start, TokenGrid(len, corpus_->batch_size), TokenGrid(len, corpus_->batch_size)};
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t b = 0; b < corpus_->batch_size; ++b) {
      w.inputs.at(t, b) = corpus_->at(b, start + t);
      w.targets.at(t, b) = corpus_->at(b, start + t + 1);
    }
  }
  return w;
}

}  // namespace mlstm
