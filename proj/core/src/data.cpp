#include "charlstm/data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "charlstm/error.hpp"

namespace charlstm {

std::u32string decode_utf8(const std::string& bytes, const std::string& origin) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  auto fail = [&](std::size_t at) {
    throw IoError("undecodable UTF-8 in " + origin + " at byte offset " +
                  std::to_string(at));
  };
  while (i < n) {
    const unsigned char b0 = static_cast<unsigned char>(bytes[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      fail(i);
    }
    if (i + len > n) fail(i);
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(bytes[i + k]);
      if ((bk & 0xC0) != 0x80) fail(i + k);
      cp = (cp << 6) | (bk & 0x3F);
    }
    // Reject overlong encodings and surrogate range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || (cp >= 0xD800 && cp <= 0xDFFF) ||
        cp > 0x10FFFF) {
      fail(i);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::u32string load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure on corpus file: " + path.string());
  std::string bytes = std::move(buf).str();
  if (bytes.empty()) throw IoError("corpus too small: " + path.string() + " is empty");
  return decode_utf8(bytes, path.string());
}

Vocab build_vocab(const std::u32string& text) {
  require(!text.empty(), "build_vocab: empty text");
  Vocab v;
  for (char32_t c : text) {
    if (v.index.emplace(c, static_cast<int>(v.symbols.size())).second) {
      v.symbols.push_back(c);
    }
  }
  return v;
}

std::vector<int> encode(const std::u32string& text, const Vocab& vocab) {
  std::vector<int> out;
  out.reserve(text.size());
  for (char32_t c : text) {
    auto it = vocab.index.find(c);
    require(it != vocab.index.end(), "encode: character not in vocabulary");
    out.push_back(it->second);
  }
  return out;
}

std::u32string decode(std::span<const int> chars, const Vocab& vocab) {
  std::u32string out;
  out.reserve(chars.size());
  for (int i : chars) {
    require(i >= 0 && static_cast<std::size_t>(i) < vocab.size(),
            "decode: index out of range");
    out.push_back(vocab.symbols[static_cast<std::size_t>(i)]);
  }
  return out;
}

Corpus make_corpus(const std::u32string& text) {
  Corpus c;
  c.vocab = build_vocab(text);
  c.chars = encode(text, c.vocab);
  return c;
}

CorpusSplit split_corpus(std::span<const int> chars, double test_fraction) {
  require(test_fraction > 0.0 && test_fraction < 0.5,
          "split_corpus: test_fraction must be in (0, 0.5)");
  const auto n = chars.size();
  const std::size_t test_len = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * test_fraction));
  require_config(test_len >= 1, "split_corpus: corpus too small for requested split");
  CorpusSplit s;
  s.train.assign(chars.begin(), chars.end() - static_cast<std::ptrdiff_t>(test_len));
  s.test.assign(chars.end() - static_cast<std::ptrdiff_t>(test_len), chars.end());
  return s;
}

std::vector<std::vector<int>> make_lanes(std::span<const int> train,
                                         std::size_t lane_count,
                                         std::size_t min_window) {
  require(lane_count >= 1, "make_lanes: lane_count must be >= 1");
  const std::size_t lane_len = train.size() / lane_count;
  if (lane_len < min_window + 1) {
    throw ConfigError(
        "make_lanes: train stream of " + std::to_string(train.size()) +
        " chars cannot supply " + std::to_string(lane_count) + " lanes of at least " +
        std::to_string(min_window + 1) + " chars (need >= " +
        std::to_string(lane_count * (min_window + 1)) + ")");
  }
  std::vector<std::vector<int>> lanes(lane_count);
  for (std::size_t l = 0; l < lane_count; ++l) {
    const auto begin = train.begin() + static_cast<std::ptrdiff_t>(l * lane_len);
    lanes[l].assign(begin, begin + static_cast<std::ptrdiff_t>(lane_len));
  }
  return lanes;
}

}  // namespace charlstm
