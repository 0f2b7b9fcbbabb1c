// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "mlstm/data.hpp"
#include "mlstm/error.hpp"

namespace mlstm {
namespace {

Vocabulary vocab_of(const std::string& text) {
  std::istringstream in(text);
  return Vocabulary::build(in);
}

std::vector<TokenId> encode_text(const std::string& text, const Vocabulary& vocab) {
  std::istringstream in(text);
  return encode(in, vocab);
}

std::vector<TokenId> iota_ids(std::size_t n) {
  std::vector<TokenId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

TEST(Vocabulary, FirstOccurrenceIdsWithEosAndUnk) {
  const Vocabulary v = vocab_of("a b\na");
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"a", "b", "<eos>", "<unk>"}));
  EXPECT_EQ(v.eos_id(), 2u);
  EXPECT_EQ(v.unk_id(), 3u);
  EXPECT_EQ(*v.find("b"), 1u);
  EXPECT_FALSE(v.find("c").has_value());
  EXPECT_EQ(v.id_or_unk("c"), v.unk_id());
}

TEST(Vocabulary, ExistingUnkIsReused) {
  const Vocabulary v = vocab_of("x <unk> y\n");
  EXPECT_EQ(v.unk_id(), 1u);
  EXPECT_EQ(v.size(), 4u);
}

TEST(Vocabulary, DeterministicAndRejectsEmptyInput) {
  const std::string text = "the cat sat\non the mat\n";
  EXPECT_EQ(vocab_of(text), vocab_of(text));
  EXPECT_THROW(vocab_of(""), Error);
  EXPECT_THROW(vocab_of("  \n\t\n"), Error);
  EXPECT_EQ(Vocabulary::from_tokens(vocab_of(text).tokens()), vocab_of(text));
}

TEST(Vocabulary, MissingFileIsAnIoError) {
  try {
    Vocabulary::build_from_file("/nonexistent/corpus.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(Encode, MapsLinesAndUnknownWords) {
  Vocabulary v = vocab_of("a b\n");
  EXPECT_EQ(encode_text("a b", v), (std::vector<TokenId>{0, 1, 2}));
  EXPECT_EQ(encode_text("a zebra\nb\n", v), (std::vector<TokenId>{0, v.unk_id(), 2, 1, 2}));
  EXPECT_EQ(encode_words("b  a", v), (std::vector<TokenId>{1, 0}));
}

TEST(Encode, DecodeInvertsUpToWhitespace) {
  const std::string text = "the  cat sat\non   the mat\n";
  const Vocabulary v = vocab_of(text);
  EXPECT_EQ(decode(encode_text(text, v), v), "the cat sat\non the mat\n");
}

TEST(Batchify, DocumentedExamples) {
  const std::vector<TokenId> ids = iota_ids(103);
  const BatchedCorpus c = batchify(ids, 4, 200);
  EXPECT_EQ(c.batch_size, 4u);
  EXPECT_EQ(c.steps, 25u);
  EXPECT_EQ(c.ids.size(), 100u);
  EXPECT_EQ(c.at(1, 0), 25u);
  EXPECT_EQ(c.at(3, 24), 99u);

  const BatchedCorpus single = batchify(ids, 1, 200);
  EXPECT_EQ(single.ids, ids);

  const std::vector<TokenId> ptb_sized(929589, 0);
  const BatchedCorpus ptb = batchify(ptb_sized, 20, 1);
  EXPECT_EQ(ptb.steps, 46479u);
  EXPECT_THROW(batchify(iota_ids(3), 4, 200), Error);
}

TEST(Windows, DocumentedExample) {
  const std::vector<TokenId> ids{0, 1, 2, 3};
  const BatchedCorpus c = batchify(ids, 1, 4);
  const WindowSequence w = windows(c, 2);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].inputs.ids, (std::vector<TokenId>{0, 1}));
  EXPECT_EQ(w[0].targets.ids, (std::vector<TokenId>{1, 2}));
  EXPECT_EQ(w[1].inputs.ids, (std::vector<TokenId>{2}));
  EXPECT_EQ(w[1].targets.ids, (std::vector<TokenId>{3}));
  EXPECT_EQ(w[1].start, 2u);
}

TEST(Windows, CountAndCoverage) {
  for (std::size_t n : {40u, 41u, 57u, 100u}) {
    for (std::size_t batch : {1u, 3u}) {
      for (std::size_t unroll : {1u, 4u, 7u, 35u}) {
        const std::vector<TokenId> ids = iota_ids(n);
        const BatchedCorpus c = batchify(ids, batch, n);
        const WindowSequence seq = windows(c, unroll);
        const std::size_t full = (c.steps - 1) / unroll;
        EXPECT_EQ(seq.size(), full + ((c.steps - 1) % unroll != 0 ? 1 : 0));
        for (std::size_t s = 0; s < batch; ++s) {
          std::vector<TokenId> targets;
          std::size_t expected_start = 0;
          for (const Window& w : seq) {
            EXPECT_EQ(w.start, expected_start);
            expected_start += w.inputs.steps;
            for (std::size_t t = 0; t < w.targets.steps; ++t) {
              EXPECT_EQ(w.targets.at(t, s), c.at(s, w.start + t + 1));
              EXPECT_EQ(w.inputs.at(t, s), c.at(s, w.start + t));
              targets.push_back(w.targets.at(t, s));
            }
          }
          const std::vector<TokenId> stream(c.ids.begin() + s * c.steps + 1, c.ids.begin() + (s + 1) * c.steps);
          EXPECT_EQ(targets, stream);
        }
      }
    }
  }
}

TEST(Windows, NeedAtLeastOnePair) {
  const std::vector<TokenId> ids{0, 1, 2};
  const BatchedCorpus c = batchify(ids, 3, 3);
  EXPECT_THROW(windows(c, 2), Error);
  EXPECT_THROW(windows(batchify(iota_ids(10), 2, 10), 0), Error);
}

// Real-corpus figures; runs only when MLSTM_PTB_DIR points at the data.
TEST(PennTreebank, VocabularyAndSplitSizes) {
  const char* dir = std::getenv("MLSTM_PTB_DIR");
  if (dir == nullptr) GTEST_SKIP() << "MLSTM_PTB_DIR not set";
  const std::filesystem::path root(dir);
  const Vocabulary v = Vocabulary::build_from_file(root / "ptb.train.txt");
  EXPECT_EQ(v.size(), 10000u);
  EXPECT_NEAR(static_cast<double>(encode_file(root / "ptb.train.txt", v).size()), 929e3, 1e3);
  EXPECT_NEAR(static_cast<double>(encode_file(root / "ptb.valid.txt", v).size()), 73e3, 1e3);
  EXPECT_NEAR(static_cast<double>(encode_file(root / "ptb.test.txt", v).size()), 82e3, 1e3);
}

}  // namespace
}  // namespace mlstm
