#include "ease/checkpoint.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ease/error.h"

namespace ease {

namespace {

constexpr std::size_t kMagicLen = sizeof(kCheckpointMagic) - 1;
constexpr std::size_t kHeaderLen = kMagicLen + 5 * 4;
constexpr std::uint32_t kKnownFlags = kFlagPretrainedEntities;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::uint32_t crc32_of(const unsigned char* data, std::size_t len) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, data, static_cast<uInt>(len));
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > UINT32_MAX) throw Error(ErrorKind::kConfig, std::string(what) + " too large for checkpoint");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<unsigned char> serialize_checkpoint(const ModelParams& params) {
  std::vector<unsigned char> out(kCheckpointMagic, kCheckpointMagic + kMagicLen);
  put_u32(out, checked_u32(params.sentence_dim(), "d_s"));
  put_u32(out, checked_u32(params.entity_dim(), "d_e"));
  put_u32(out, checked_u32(params.token_emb.rows(), "vocabulary"));
  put_u32(out, checked_u32(params.entity_emb.rows(), "entity table"));
  put_u32(out, params.entity_init_pretrained ? kFlagPretrainedEntities : 0u);
  for (double d : params.token_emb.data()) put_f64(out, d);
  for (double d : params.entity_emb.data()) put_f64(out, d);
  for (double d : params.projection.data()) put_f64(out, d);
  put_u32(out, crc32_of(out.data(), out.size()));
  return out;
}

ModelParams deserialize_checkpoint(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kHeaderLen + 4) {
    throw Error(ErrorKind::kCorruptCheckpoint, "file too short");
  }
  if (std::memcmp(bytes.data(), kCheckpointMagic, kMagicLen) != 0) {
    if (std::memcmp(bytes.data(), "EASE", 4) == 0) {
      throw Error(ErrorKind::kVersionMismatch,
                  std::string("unsupported format version '") + static_cast<char>(bytes[4]) + "'");
    }
    throw Error(ErrorKind::kCorruptCheckpoint, "bad magic");
  }
  const std::uint32_t stored_crc = get_u32(bytes.data() + bytes.size() - 4);
  if (stored_crc != crc32_of(bytes.data(), bytes.size() - 4)) {
    throw Error(ErrorKind::kCorruptCheckpoint, "CRC mismatch");
  }
  const unsigned char* h = bytes.data() + kMagicLen;
  const std::size_t ds = get_u32(h);
  const std::size_t de = get_u32(h + 4);
  const std::size_t vocab = get_u32(h + 8);
  const std::size_t entities = get_u32(h + 12);
  const std::uint32_t flags = get_u32(h + 16);
  if ((flags & ~kKnownFlags) != 0) {
    throw Error(ErrorKind::kVersionMismatch, "unknown checkpoint flags");
  }
  const std::size_t values = vocab * ds + entities * de + ds * de;
  if (bytes.size() != kHeaderLen + 8 * values + 4) {
    throw Error(ErrorKind::kCorruptCheckpoint, "payload size does not match header");
  }
  ModelParams p;
  p.token_emb = Matrix(vocab, ds);
  p.entity_emb = Matrix(entities, de);
  p.projection = Matrix(ds, de);
  p.entity_init_pretrained = (flags & kFlagPretrainedEntities) != 0;
  const unsigned char* cursor = bytes.data() + kHeaderLen;
  for (auto* m : {&p.token_emb, &p.entity_emb, &p.projection}) {
    for (double& d : m->data()) {
      d = get_f64(cursor);
      cursor += 8;
    }
  }
  return p;
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  const auto bytes = serialize_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace ease
