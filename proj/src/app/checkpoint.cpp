/**
 * Copyright (c) The introspect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "introspect/app/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <zlib.h>

namespace introspect::app {

namespace {

constexpr std::string_view kMagic = "INTRCKPT";

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return value;
  }

  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

  std::string get_string(std::uint64_t n) {
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::uint64_t n) const {
    if (n > remaining()) throw CheckpointError("checkpoint: unexpected end of data");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset), chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void Checkpoint::add(std::string name, const Matrix& value) {
  if (find(name) != nullptr) throw CheckpointError(fmt::format("checkpoint: duplicate block '{}'", name));
  blocks.push_back({std::move(name), value});
}

void Checkpoint::add(std::span<const Param* const> params) {
  for (const Param* p : params) add(p->name, p->value);
}

const Block* Checkpoint::find(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return &b;
  return nullptr;
}

const Matrix& Checkpoint::get(const std::string& name) const {
  const Block* b = find(name);
  if (b == nullptr) throw CheckpointError(fmt::format("checkpoint: missing block '{}'", name));
  return b->value;
}

void Checkpoint::restore(std::span<Param* const> params) const {
  for (Param* p : params) {
    const Matrix& v = get(p->name);
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols()) {
      throw CheckpointError(fmt::format("checkpoint: block '{}' is {}x{}, model expects {}x{}", p->name, v.rows(),
                                        v.cols(), p->value.rows(), p->value.cols()));
    }
    p->value = v;
  }
}

std::string serialize(const Checkpoint& checkpoint) {
  std::string out(kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, checkpoint.config.size());
  out += checkpoint.config;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.blocks.size()));
  for (const auto& b : checkpoint.blocks) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(b.name.size()));
    out += b.name;
    put<std::uint64_t>(out, static_cast<std::uint64_t>(b.value.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(b.value.cols()));
    for (nn::Index r = 0; r < b.value.rows(); ++r)
      for (nn::Index c = 0; c < b.value.cols(); ++c) put_f64(out, b.value(r, c));
  }
  put<std::uint32_t>(out, crc_of(out));
  return out;
}

Checkpoint deserialize(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw CheckpointError("checkpoint: not a checkpoint file (bad magic)");
  }
  if (bytes.size() < kMagic.size() + 8) throw CheckpointError("checkpoint: checksum mismatch (file truncated)");
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  Reader tail(bytes.substr(bytes.size() - 4));
  if (tail.get<std::uint32_t>() != crc_of(body)) throw CheckpointError("checkpoint: checksum mismatch");

  Reader in(body.substr(kMagic.size()));
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(fmt::format("checkpoint: unsupported version {} (expected {})", version, kCheckpointVersion));
  }
  Checkpoint cp;
  cp.config = in.get_string(in.get<std::uint64_t>());
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.get_string(in.get<std::uint32_t>());
    const auto rows = in.get<std::uint64_t>();
    const auto cols = in.get<std::uint64_t>();
    if (cols != 0 && rows > in.remaining() / 8 / cols) throw CheckpointError("checkpoint: block larger than file");
    Matrix m(static_cast<nn::Index>(rows), static_cast<nn::Index>(cols));
    for (nn::Index r = 0; r < m.rows(); ++r)
      for (nn::Index c = 0; c < m.cols(); ++c) m(r, c) = in.get_f64();
    cp.add(std::move(name), m);
  }
  if (in.remaining() != 0) throw CheckpointError("checkpoint: trailing bytes after last block");
  return cp;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::string bytes = serialize(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(fmt::format("cannot write checkpoint '{}'", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(fmt::format("failed writing checkpoint '{}'", path.string()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(fmt::format("cannot open checkpoint '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return deserialize(buffer.str());
}

}  // namespace introspect::app
