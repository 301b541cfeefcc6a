#include "charlstm/data.hpp"

#include <cstdio>
#include <fstream>

#include "charlstm/error.hpp"
#include "charlstm/model.hpp"
#include "doctest.h"

using namespace charlstm;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& bytes) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  return path;
}

std::u32string u32(const std::string& ascii) {
  return decode_utf8(ascii, "test literal");
}

}  // namespace

TEST_CASE("load_corpus: basic file, missing file, empty file") {
  const auto path = write_temp("charlstm_abab.txt", "abab");
  CHECK(load_corpus(path).size() == 4);

  CHECK_THROWS_AS(load_corpus("/nonexistent/definitely_missing.txt"), IoError);

  const auto empty = write_temp("charlstm_empty.txt", "");
  CHECK_THROWS_WITH_AS(load_corpus(empty), doctest::Contains("corpus too small"),
                       IoError);
}

TEST_CASE("load_corpus: undecodable bytes report the offset") {
  const auto path = write_temp("charlstm_bad.txt", std::string("ab\xFFz", 4));
  try {
    load_corpus(path);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("byte offset 2") != std::string::npos);
  }
}

TEST_CASE("decode_utf8: multibyte round-trip") {
  const std::string bytes = "a\xC3\xA9z";  // 'a', e-acute, 'z'
  const auto text = decode_utf8(bytes, "literal");
  CHECK(text.size() == 3);
  CHECK(text[1] == char32_t(0xE9));
}

TEST_CASE("build_vocab: first-appearance order") {
  const Vocab v1 = build_vocab(u32("abab"));
  CHECK(v1.size() == 2);
  CHECK(v1.symbols[0] == U'a');
  CHECK(v1.symbols[1] == U'b');

  const Vocab v2 = build_vocab(u32("ba"));
  CHECK(v2.symbols[0] == U'b');
  CHECK(v2.symbols[1] == U'a');

  CHECK_THROWS_AS(build_vocab(std::u32string{}), ContractViolation);
}

TEST_CASE("single-symbol text builds a vocabulary the model rejects") {
  const Corpus c = make_corpus(u32("aaaa"));
  CHECK(c.vocab.size() == 1);
  CHECK_THROWS_AS(init_params(0, c.vocab.size(), 4), ContractViolation);
}

TEST_CASE("encode/decode round-trips the corpus exactly") {
  Rng rng(6);
  const std::u32string alphabet = u32("abcXYZ ,.'\n");
  for (int rep = 0; rep < 20; ++rep) {
    std::u32string text;
    const std::size_t len = 1 + rng.next() % 200;
    for (std::size_t i = 0; i < len; ++i)
      text.push_back(alphabet[rng.next() % alphabet.size()]);
    const Corpus c = make_corpus(text);
    CHECK(decode(c.chars, c.vocab) == text);
  }
}

TEST_CASE("vocabulary indices are stable across rebuilds") {
  const std::u32string text = u32("the quick brown fox, the lazy dog.");
  const Corpus a = make_corpus(text);
  const Corpus b = make_corpus(text);
  CHECK(a.chars == b.chars);
  CHECK(a.vocab.symbols == b.vocab.symbols);
}

TEST_CASE("split_corpus: tail split arithmetic") {
  std::vector<int> chars(1000);
  for (std::size_t i = 0; i < chars.size(); ++i) chars[i] = int(i % 7);
  const CorpusSplit s = split_corpus(chars, 0.01);
  CHECK(s.train.size() == 990);
  CHECK(s.test.size() == 10);
  // test is the contiguous tail
  for (std::size_t i = 0; i < 10; ++i) CHECK(s.test[i] == chars[990 + i]);

  CHECK_THROWS_AS(split_corpus(chars, 0.6), ContractViolation);
  CHECK_THROWS_AS(split_corpus(chars, 0.0), ContractViolation);
}

TEST_CASE("make_lanes: partition of a prefix, remainder dropped") {
  std::vector<int> train(103);
  for (std::size_t i = 0; i < train.size(); ++i) train[i] = int(i % 5);

  const auto lanes = make_lanes(std::span<const int>(train).first(100), 4, 3);
  REQUIRE(lanes.size() == 4);
  for (const auto& lane : lanes) CHECK(lane.size() == 25);
  std::vector<int> joined;
  for (const auto& lane : lanes) joined.insert(joined.end(), lane.begin(), lane.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(joined[i] == train[i]);

  const auto lanes2 = make_lanes(train, 4, 3);
  for (const auto& lane : lanes2) CHECK(lane.size() == 25);  // 3 chars dropped
}

TEST_CASE("make_lanes: insufficient text is a configuration error") {
  std::vector<int> train(20, 0);
  try {
    make_lanes(train, 4, 10);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("44") != std::string::npos);  // 4 * (10+1)
  }
}
