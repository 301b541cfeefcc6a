#pragma once

// Corpus ingestion and preparation. A character is one decoded text character
// (Unicode code point), not a byte. The vocabulary is built over the full
// corpus so the test tail never contains an unknown symbol.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace charlstm {

struct Vocab {
  std::vector<char32_t> symbols;               // first-appearance order
  std::unordered_map<char32_t, int> index;

  std::size_t size() const { return symbols.size(); }
};

struct Corpus {
  std::vector<int> chars;  // every index < vocab.size()
  Vocab vocab;
};

// Whole file as decoded characters. UTF-8; an undecodable byte reports the
// path and byte offset.
std::u32string load_corpus(const std::filesystem::path& path);

// Distinct characters in first-appearance order.
Vocab build_vocab(const std::u32string& text);

std::vector<int> encode(const std::u32string& text, const Vocab& vocab);
std::u32string decode(std::span<const int> chars, const Vocab& vocab);

Corpus make_corpus(const std::u32string& text);

struct CorpusSplit {
  std::vector<int> train;
  std::vector<int> test;  // contiguous tail of the corpus
};

CorpusSplit split_corpus(std::span<const int> chars, double test_fraction);

// Train stream cut into lane_count contiguous equal-length streams; the
// remainder at the end is dropped.
std::vector<std::vector<int>> make_lanes(std::span<const int> train,
                                         std::size_t lane_count,
                                         std::size_t min_window);

// Encodes a UTF-8 std::string corpus held in memory (tests, synthetic data).
std::u32string decode_utf8(const std::string& bytes, const std::string& origin);

}  // namespace charlstm
