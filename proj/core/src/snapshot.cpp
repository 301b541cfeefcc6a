#include "charlstm/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "charlstm/error.hpp"

namespace charlstm {

namespace {

constexpr char kMagic[8] = {'C', 'H', 'A', 'R', 'L', 'S', 'T', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ofstream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

std::uint64_t take_u64(std::ifstream& in, const std::string& path) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw IoError("truncated snapshot: " + path);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint32_t take_u32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError("truncated snapshot: " + path);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

void save_model(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open snapshot for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u64(out, params.vocab);
  put_u64(out, params.hidden);
  for_each_tensor(params, [&](const std::vector<double>& t) {
    for (double x : t) put_u64(out, std::bit_cast<std::uint64_t>(x));
  });
  out.flush();
  if (!out) throw IoError("write failure on snapshot: " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a model snapshot: " + path.string());
  }
  const std::uint32_t version = take_u32(in, path.string());
  if (version != kVersion) {
    throw IoError("unsupported snapshot version " + std::to_string(version) + ": " +
                  path.string());
  }
  const std::uint64_t V = take_u64(in, path.string());
  const std::uint64_t H = take_u64(in, path.string());
  if (V < 2 || H < 1 || V > (1u << 20) || H > (1u << 20)) {
    throw IoError("implausible snapshot dimensions: " + path.string());
  }
  ModelParams params(static_cast<std::size_t>(V), static_cast<std::size_t>(H));
  for_each_tensor(params, [&](std::vector<double>& t) {
    for (double& x : t) x = std::bit_cast<double>(take_u64(in, path.string()));
  });
  char extra;
  if (in.read(&extra, 1)) throw IoError("trailing bytes in snapshot: " + path.string());
  return params;
}

}  // namespace charlstm
