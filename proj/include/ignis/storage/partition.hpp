// Copyright 2026 The Ignis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ignis/properties.hpp"
#include "ignis/value.hpp"

namespace ignis::storage {

/// Which tier backs a partition.
///
/// InMemory keeps decoded Values. RawMemory keeps the serialized container
/// body in a growable buffer (zlib-compressed when level > 0). Disk streams
/// the same container to a file.
struct StoreKind {
  enum class Tier : uint8_t { kInMemory = 0, kRawMemory = 1, kDisk = 2 };

  Tier tier = Tier::kInMemory;
  int level = 6;
  std::string dir;

  static StoreKind inMemory() { return {Tier::kInMemory, 0, {}}; }
  static StoreKind rawMemory(int level = 6);
  static StoreKind disk(std::string dir, int level = 6);

  /// Reads ignis.partition.storage / compression / disk.dir.
  static StoreKind fromProperties(const Properties& props);

  Value toValue() const;
  static StoreKind fromValue(const Value& v);
  std::string describe() const;

  bool operator==(const StoreKind&) const = default;
};

class PartitionStore;

/// Ordered element container. Iteration order is append order and does not
/// depend on the tier. Single writer while being filled; appends after the
/// first read of a RawMemory or Disk partition are rejected.
class Partition {
 public:
  Partition();
  ~Partition();
  Partition(Partition&&) noexcept;
  Partition& operator=(Partition&&) noexcept;
  Partition(const Partition&) = delete;
  Partition& operator=(const Partition&) = delete;

  /// `fileName` names the Disk file inside kind.dir; a unique name is chosen
  /// when empty.
  static Partition create(const StoreKind& kind, const std::string& fileName = "");

  static Partition fromValues(std::vector<Value> values);

  /// Opens an existing container file as a Disk partition (used to reload
  /// persisted data after an executor restart).
  static Partition openFile(const std::string& path);

  void append(const Value& v);
  void append(Value&& v);

  uint64_t size() const;
  bool empty() const { return size() == 0; }
  const StoreKind& kind() const;

  void forEach(const std::function<void(const Value&)>& fn) const;
  std::vector<Value> values() const;

  /// Bytes currently held by the tier: encoded body length for RawMemory and
  /// Disk, encoded size estimate for InMemory.
  uint64_t storedBytes() const;

  /// Disk tier only: backing file path.
  std::string filePath() const;
  /// Disk tier only: keep the file when the partition is destroyed. Keeping
  /// finalizes the container, so no further appends are accepted.
  void keepFile(bool keep);

 private:
  explicit Partition(std::unique_ptr<PartitionStore> store);
  std::unique_ptr<PartitionStore> store_;
};

using PartitionGroup = std::vector<Partition>;

uint64_t totalSize(const PartitionGroup& group);

/// Copies the element sequence into a new tier and frees the source.
Partition spill(Partition&& p, const StoreKind& to);

/// Encodes a partition as the container format. `level` < 0 uses the
/// partition's own level (0 for InMemory).
std::string partitionBytes(const Partition& p, int level = -1);
Partition partitionFromBytes(std::string_view bytes, const StoreKind& kind);

/// Decompresses and decodes a container fully into memory.
std::vector<Value> containerValues(std::string_view bytes);

/// Container header fields.
struct ContainerHeader {
  uint8_t version = 1;
  uint8_t level = 0;
  uint64_t count = 0;
};
inline constexpr size_t kContainerHeaderSize = 14;
ContainerHeader parseContainerHeader(std::string_view bytes);

// zlib (RFC 1950) helpers.
std::string zlibCompress(std::string_view data, int level);
std::string zlibDecompress(std::string_view data);

/// Length of the TLV record at the start of `data`, or 0 if it is incomplete.
/// Malformed tags raise kMalformedEncoding.
size_t tlvRecordLength(std::string_view data);

}  // namespace ignis::storage
