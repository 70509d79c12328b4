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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "introspect/nn/tape.hpp"

namespace introspect::app {

using nn::Matrix;
using nn::Param;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Block {
  std::string name;
  Matrix value;
};

/// Byte layout, all integers and floats little-endian:
///   "INTRCKPT"                      8 bytes
///   version                         u32
///   config length, config text      u64, bytes
///   block count                     u32
///   per block: name length, name    u32, bytes
///              rows, cols           u64, u64
///              payload              rows*cols f64, row-major
///   crc32 of everything above       u32
struct Checkpoint {
  std::string config;
  std::vector<Block> blocks;

  void add(std::string name, const Matrix& value);
  void add(std::span<const Param* const> params);
  const Block* find(const std::string& name) const;
  /// Throws CheckpointError if the block is missing.
  const Matrix& get(const std::string& name) const;
  /// Copies every named parameter out of the checkpoint, checking shapes.
  void restore(std::span<Param* const> params) const;
};

std::string serialize(const Checkpoint& checkpoint);
Checkpoint deserialize(std::string_view bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace introspect::app
