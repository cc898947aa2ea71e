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

#include "ignis/storage/partition.hpp"

#include <unistd.h>
#include <zlib.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ignis/bytes.hpp"
#include "ignis/error.hpp"

namespace ignis::storage {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'I', 'G', 'N', 'P'};
constexpr uint8_t kVersion = 1;
constexpr size_t kCountOffset = 6;
constexpr size_t kChunk = 64 * 1024;

void checkLevel(int level) {
  if (level < 0 || level > 9) {
    fail(ErrorCode::kPrecondition, "compression level must be in [0,9], got " + std::to_string(level));
  }
}

std::string header(uint8_t level, uint64_t count) {
  std::string out(kMagic, 4);
  putU8(out, kVersion);
  putU8(out, level);
  putU64(out, count);
  return out;
}

// Streaming zlib deflate appending to a caller-owned sink.
class Deflater {
 public:
  explicit Deflater(int level) {
    if (deflateInit(&zs_, level) != Z_OK) fail(ErrorCode::kInternal, "deflateInit failed");
  }
  ~Deflater() { deflateEnd(&zs_); }
  Deflater(const Deflater&) = delete;
  Deflater& operator=(const Deflater&) = delete;

  template <typename Out>
  void write(std::string_view in, int flush, Out&& out) {
    zs_.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs_.avail_in = static_cast<uInt>(in.size());
    char buf[kChunk];
    do {
      zs_.next_out = reinterpret_cast<Bytef*>(buf);
      zs_.avail_out = sizeof(buf);
      int rc = deflate(&zs_, flush);
      if (rc == Z_STREAM_ERROR) fail(ErrorCode::kInternal, "deflate failed");
      out(std::string_view(buf, sizeof(buf) - zs_.avail_out));
    } while (zs_.avail_out == 0);
  }

 private:
  z_stream zs_{};
};

class Inflater {
 public:
  Inflater() {
    if (inflateInit(&zs_) != Z_OK) fail(ErrorCode::kInternal, "inflateInit failed");
  }
  ~Inflater() { inflateEnd(&zs_); }
  Inflater(const Inflater&) = delete;
  Inflater& operator=(const Inflater&) = delete;

  bool finished() const { return finished_; }

  // Feeds compressed bytes, appending decompressed output to `out`.
  void feed(std::string_view in, std::string& out, size_t baseOffset) {
    zs_.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs_.avail_in = static_cast<uInt>(in.size());
    char buf[kChunk];
    while (zs_.avail_in > 0 && !finished_) {
      zs_.next_out = reinterpret_cast<Bytef*>(buf);
      zs_.avail_out = sizeof(buf);
      int rc = inflate(&zs_, Z_NO_FLUSH);
      if (rc != Z_OK && rc != Z_STREAM_END && rc != Z_BUF_ERROR) {
        fail(ErrorCode::kMalformedContainer,
             std::string("corrupt compressed body near byte offset ") +
                 std::to_string(baseOffset + zs_.total_in) + ": " + (zs_.msg ? zs_.msg : "zlib error"));
      }
      out.append(buf, sizeof(buf) - zs_.avail_out);
      if (rc == Z_STREAM_END) finished_ = true;
      if (rc == Z_BUF_ERROR) break;
    }
  }

 private:
  z_stream zs_{};
  bool finished_ = false;
};

// Walks one TLV record without materializing it.
size_t recordLength(std::string_view d, size_t pos, int depth) {
  if (depth > 512) fail(ErrorCode::kMalformedEncoding, "nesting too deep at byte offset " + std::to_string(pos));
  if (pos >= d.size()) return 0;
  uint8_t tag = static_cast<uint8_t>(d[pos]);
  switch (tag) {
    case 0:
      return 1;
    case 1:
      return pos + 2 <= d.size() ? 2 : 0;
    case 2:
    case 3:
      return pos + 9 <= d.size() ? 9 : 0;
    case 4:
    case 5: {
      if (pos + 5 > d.size()) return 0;
      uint64_t len = loadLE(d.data() + pos + 1, 4);
      return pos + 5 + len <= d.size() ? 5 + len : 0;
    }
    case 6: {
      size_t a = recordLength(d, pos + 1, depth + 1);
      if (a == 0) return 0;
      size_t b = recordLength(d, pos + 1 + a, depth + 1);
      return b == 0 ? 0 : 1 + a + b;
    }
    case 7: {
      if (pos + 5 > d.size()) return 0;
      uint64_t count = loadLE(d.data() + pos + 1, 4);
      size_t at = pos + 5;
      for (uint64_t i = 0; i < count; ++i) {
        size_t n = recordLength(d, at, depth + 1);
        if (n == 0) return 0;
        at += n;
      }
      return at - pos;
    }
    default:
      fail(ErrorCode::kMalformedEncoding,
           "unknown tag " + std::to_string(tag) + " at byte offset " + std::to_string(pos));
  }
}

// Decodes the records of a (decompressed) body with a running cursor.
class BodyDecoder {
 public:
  // Appends decoded bytes and emits every complete record.
  void push(std::string_view chunk, const std::function<void(const Value&)>& fn) {
    buffer_.append(chunk);
    drain(fn);
  }

  void drain(const std::function<void(const Value&)>& fn) {
    while (true) {
      std::string_view rest(buffer_.data() + cursor_, buffer_.size() - cursor_);
      size_t n = rest.empty() ? 0 : recordLength(rest, 0, 0);
      if (n == 0) break;
      size_t off = 0;
      Value v = decodeValue(rest.substr(0, n), off);
      cursor_ += n;
      ++decoded_;
      fn(v);
    }
    if (cursor_ > kChunk && cursor_ * 2 > buffer_.size()) {
      buffer_.erase(0, cursor_);
      cursor_ = 0;
    }
  }

  uint64_t decoded() const { return decoded_; }
  bool leftover() const { return cursor_ != buffer_.size(); }

 private:
  std::string buffer_;
  size_t cursor_ = 0;
  uint64_t decoded_ = 0;
};

std::string uniqueFileName() {
  static std::atomic<uint64_t> counter{0};
  return "part-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)) + ".ignp";
}

}  // namespace

// ---------------------------------------------------------------------------
// Stores

class PartitionStore {
 public:
  explicit PartitionStore(StoreKind kind) : kind_(std::move(kind)) {}
  virtual ~PartitionStore() = default;

  virtual void append(const Value& v) = 0;
  virtual void append(Value&& v) { append(static_cast<const Value&>(v)); }
  virtual void forEach(const std::function<void(const Value&)>& fn) const = 0;
  virtual uint64_t storedBytes() const = 0;
  virtual std::string filePath() const { return {}; }
  virtual void keepFile(bool) {}

  uint64_t size() const { return count_; }
  const StoreKind& kind() const { return kind_; }

 protected:
  StoreKind kind_;
  uint64_t count_ = 0;
};

namespace {

class InMemoryStore final : public PartitionStore {
 public:
  InMemoryStore() : PartitionStore(StoreKind::inMemory()) {}
  explicit InMemoryStore(std::vector<Value> values) : PartitionStore(StoreKind::inMemory()), values_(std::move(values)) {
    count_ = values_.size();
  }

  void append(const Value& v) override {
    values_.push_back(v);
    ++count_;
  }
  void append(Value&& v) override {
    values_.push_back(std::move(v));
    ++count_;
  }
  void forEach(const std::function<void(const Value&)>& fn) const override {
    for (const Value& v : values_) fn(v);
  }
  uint64_t storedBytes() const override {
    uint64_t n = 0;
    for (const Value& v : values_) n += serializeValue(v).size();
    return n;
  }

 private:
  std::vector<Value> values_;
};

class RawMemoryStore final : public PartitionStore {
 public:
  explicit RawMemoryStore(const StoreKind& kind) : PartitionStore(kind) {
    if (kind.level > 0) deflater_ = std::make_unique<Deflater>(kind.level);
  }

  void append(const Value& v) override {
    if (sealed_) fail(ErrorCode::kPrecondition, "append to a sealed raw-memory partition");
    if (!deflater_) {
      appendValue(body_, v);
    } else {
      scratch_.clear();
      appendValue(scratch_, v);
      deflater_->write(scratch_, Z_NO_FLUSH, [this](std::string_view out) { body_.append(out); });
    }
    ++count_;
  }

  void forEach(const std::function<void(const Value&)>& fn) const override {
    seal();
    BodyDecoder decoder;
    if (kind_.level == 0) {
      decoder.push(body_, fn);
    } else {
      Inflater inflater;
      std::string out;
      for (size_t at = 0; at < body_.size(); at += kChunk) {
        out.clear();
        inflater.feed(std::string_view(body_).substr(at, kChunk), out, at);
        decoder.push(out, fn);
      }
    }
  }

  uint64_t storedBytes() const override {
    seal();
    return body_.size();
  }

  const std::string& body() const {
    seal();
    return body_;
  }

 private:
  void seal() const {
    if (sealed_) return;
    sealed_ = true;
    if (deflater_) {
      deflater_->write({}, Z_FINISH, [this](std::string_view out) { body_.append(out); });
      deflater_.reset();
    }
  }

  mutable std::string body_;
  mutable std::unique_ptr<Deflater> deflater_;
  mutable bool sealed_ = false;
  std::string scratch_;
};

class DiskStore final : public PartitionStore {
 public:
  DiskStore(const StoreKind& kind, const std::string& fileName) : PartitionStore(kind) {
    std::error_code ec;
    fs::create_directories(kind.dir, ec);
    path_ = (fs::path(kind.dir) / (fileName.empty() ? uniqueFileName() : fileName)).string();
    if (!fileName.empty()) fs::create_directories(fs::path(path_).parent_path(), ec);
    out_ = std::make_unique<std::ofstream>(path_, std::ios::binary | std::ios::trunc);
    if (!*out_) fail(ErrorCode::kIo, "cannot create partition file " + path_);
    std::string h = header(static_cast<uint8_t>(kind.level), 0);
    out_->write(h.data(), static_cast<std::streamsize>(h.size()));
    if (kind.level > 0) deflater_ = std::make_unique<Deflater>(kind.level);
  }

  // Existing container file; read-only.
  explicit DiskStore(const std::string& path) : PartitionStore(StoreKind()) {
    path_ = path;
    std::ifstream in(path_, std::ios::binary);
    if (!in) fail(ErrorCode::kIo, "cannot open partition file " + path_);
    char buf[kContainerHeaderSize];
    in.read(buf, sizeof(buf));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(buf))) {
      fail(ErrorCode::kMalformedContainer, "truncated container header in " + path_ + " at byte offset " +
                                               std::to_string(in.gcount()));
    }
    ContainerHeader h = parseContainerHeader(std::string_view(buf, sizeof(buf)));
    kind_ = StoreKind::disk(fs::path(path_).parent_path().string(), h.level);
    count_ = h.count;
    sealed_ = true;
    keep_ = true;
  }

  ~DiskStore() override {
    if (keep_ && !sealed_) {
      try {
        seal();
      } catch (const Error&) {
      }
    }
    out_.reset();
    if (!keep_ && !path_.empty()) {
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }

  void append(const Value& v) override {
    if (sealed_) fail(ErrorCode::kPrecondition, "append to a sealed disk partition");
    scratch_.clear();
    appendValue(scratch_, v);
    if (deflater_) {
      deflater_->write(scratch_, Z_NO_FLUSH, [this](std::string_view out) { writeBody(out); });
    } else {
      writeBody(scratch_);
    }
    ++count_;
  }

  void forEach(const std::function<void(const Value&)>& fn) const override {
    seal();
    std::ifstream in(path_, std::ios::binary);
    if (!in) fail(ErrorCode::kIo, "cannot open partition file " + path_);
    in.seekg(static_cast<std::streamoff>(kContainerHeaderSize));
    BodyDecoder decoder;
    std::unique_ptr<Inflater> inflater;
    if (kind_.level > 0) inflater = std::make_unique<Inflater>();
    std::vector<char> buf(kChunk);
    std::string out;
    size_t offset = kContainerHeaderSize;
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      auto got = static_cast<size_t>(in.gcount());
      if (got == 0) break;
      std::string_view chunk(buf.data(), got);
      if (inflater) {
        out.clear();
        inflater->feed(chunk, out, offset);
        decoder.push(out, fn);
      } else {
        decoder.push(chunk, fn);
      }
      offset += got;
    }
    if (decoder.leftover() || decoder.decoded() != count_) {
      fail(ErrorCode::kMalformedContainer, "container " + path_ + " holds " + std::to_string(decoder.decoded()) +
                                               " complete records, header says " + std::to_string(count_));
    }
  }

  uint64_t storedBytes() const override {
    seal();
    std::error_code ec;
    auto n = fs::file_size(path_, ec);
    return ec ? 0 : n - kContainerHeaderSize;
  }

  std::string filePath() const override { return path_; }
  void keepFile(bool keep) override {
    keep_ = keep;
    if (keep) seal();
  }

 private:
  void writeBody(std::string_view data) const {
    out_->write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!*out_) fail(ErrorCode::kIo, "write failed on " + path_);
  }

  void seal() const {
    if (sealed_) return;
    sealed_ = true;
    if (deflater_) {
      deflater_->write({}, Z_FINISH, [this](std::string_view out) { writeBody(out); });
      deflater_.reset();
    }
    std::string count;
    putU64(count, count_);
    out_->seekp(static_cast<std::streamoff>(kCountOffset));
    out_->write(count.data(), 8);
    out_->close();
    if (!*out_) fail(ErrorCode::kIo, "failed to finalize " + path_);
    out_.reset();
  }

  std::string path_;
  mutable std::unique_ptr<std::ofstream> out_;
  mutable std::unique_ptr<Deflater> deflater_;
  mutable bool sealed_ = false;
  bool keep_ = false;
  std::string scratch_;
};

}  // namespace

// ---------------------------------------------------------------------------
// StoreKind

StoreKind StoreKind::rawMemory(int level) {
  checkLevel(level);
  return {Tier::kRawMemory, level, {}};
}

StoreKind StoreKind::disk(std::string dir, int level) {
  checkLevel(level);
  return {Tier::kDisk, level, std::move(dir)};
}

StoreKind StoreKind::fromProperties(const Properties& props) {
  std::string tier = props.get(props::kPartitionStorage);
  int level = static_cast<int>(props.getInt(props::kPartitionCompression));
  if (tier == "memory") return inMemory();
  if (tier == "rawmemory" || tier == "raw") return rawMemory(level);
  if (tier == "disk") return disk(props.get(props::kPartitionDiskDir), level);
  fail(ErrorCode::kUsage, "unknown partition storage '" + tier + "' (memory, rawmemory, disk)");
}

Value StoreKind::toValue() const {
  return Value::list({Value::i64(static_cast<int64_t>(tier)), Value::i64(level), Value::str(dir)});
}

StoreKind StoreKind::fromValue(const Value& v) {
  const ValueList& f = v.asList();
  if (f.size() != 3) fail(ErrorCode::kMalformedEncoding, "store kind needs 3 fields");
  auto tier = static_cast<Tier>(f[0].asI64());
  int level = static_cast<int>(f[1].asI64());
  switch (tier) {
    case Tier::kInMemory: return inMemory();
    case Tier::kRawMemory: return rawMemory(level);
    case Tier::kDisk: return disk(f[2].asStr(), level);
  }
  fail(ErrorCode::kMalformedEncoding, "unknown storage tier");
}

std::string StoreKind::describe() const {
  switch (tier) {
    case Tier::kInMemory: return "memory";
    case Tier::kRawMemory: return "rawmemory(" + std::to_string(level) + ")";
    case Tier::kDisk: return "disk(" + std::to_string(level) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Partition

Partition::Partition() : store_(std::make_unique<InMemoryStore>()) {}
Partition::~Partition() = default;
Partition::Partition(Partition&&) noexcept = default;
Partition& Partition::operator=(Partition&&) noexcept = default;
Partition::Partition(std::unique_ptr<PartitionStore> store) : store_(std::move(store)) {}

Partition Partition::create(const StoreKind& kind, const std::string& fileName) {
  switch (kind.tier) {
    case StoreKind::Tier::kInMemory:
      return Partition(std::make_unique<InMemoryStore>());
    case StoreKind::Tier::kRawMemory:
      checkLevel(kind.level);
      return Partition(std::make_unique<RawMemoryStore>(kind));
    case StoreKind::Tier::kDisk:
      checkLevel(kind.level);
      return Partition(std::make_unique<DiskStore>(kind, fileName));
  }
  fail(ErrorCode::kInternal, "bad tier");
}

Partition Partition::fromValues(std::vector<Value> values) {
  return Partition(std::make_unique<InMemoryStore>(std::move(values)));
}

Partition Partition::openFile(const std::string& path) { return Partition(std::make_unique<DiskStore>(path)); }

void Partition::append(const Value& v) { store_->append(v); }
void Partition::append(Value&& v) { store_->append(std::move(v)); }
uint64_t Partition::size() const { return store_->size(); }
const StoreKind& Partition::kind() const { return store_->kind(); }
void Partition::forEach(const std::function<void(const Value&)>& fn) const { store_->forEach(fn); }

std::vector<Value> Partition::values() const {
  std::vector<Value> out;
  out.reserve(size());
  forEach([&](const Value& v) { out.push_back(v); });
  return out;
}

uint64_t Partition::storedBytes() const { return store_->storedBytes(); }
std::string Partition::filePath() const { return store_->filePath(); }
void Partition::keepFile(bool keep) { store_->keepFile(keep); }

uint64_t totalSize(const PartitionGroup& group) {
  uint64_t n = 0;
  for (const Partition& p : group) n += p.size();
  return n;
}

Partition spill(Partition&& p, const StoreKind& to) {
  Partition source = std::move(p);
  Partition out = Partition::create(to);
  source.forEach([&](const Value& v) { out.append(v); });
  return out;
}

std::string partitionBytes(const Partition& p, int level) {
  if (level < 0) level = p.kind().tier == StoreKind::Tier::kInMemory ? 0 : p.kind().level;
  checkLevel(level);
  std::string out = header(static_cast<uint8_t>(level), p.size());
  if (level == 0) {
    p.forEach([&](const Value& v) { appendValue(out, v); });
    return out;
  }
  Deflater deflater(level);
  std::string scratch;
  auto sink = [&](std::string_view chunk) { out.append(chunk); };
  p.forEach([&](const Value& v) {
    scratch.clear();
    appendValue(scratch, v);
    deflater.write(scratch, Z_NO_FLUSH, sink);
  });
  deflater.write({}, Z_FINISH, sink);
  return out;
}

ContainerHeader parseContainerHeader(std::string_view bytes) {
  ByteReader in(bytes, ErrorCode::kMalformedContainer);
  std::string_view magic = in.bytes(4);
  if (magic != std::string_view(kMagic, 4)) {
    fail(ErrorCode::kMalformedContainer, "bad container magic at byte offset 0");
  }
  ContainerHeader h;
  h.version = in.u8();
  if (h.version != kVersion) {
    fail(ErrorCode::kMalformedContainer, "unsupported container version " + std::to_string(h.version) +
                                             " at byte offset 4");
  }
  h.level = in.u8();
  if (h.level > 9) fail(ErrorCode::kMalformedContainer, "invalid compression level at byte offset 5");
  h.count = in.u64();
  return h;
}

std::vector<Value> containerValues(std::string_view bytes) {
  ContainerHeader h = parseContainerHeader(bytes);
  std::string_view body = bytes.substr(kContainerHeaderSize);
  std::string inflated;
  if (h.level > 0) {
    Inflater inflater;
    inflater.feed(body, inflated, kContainerHeaderSize);
    if (!inflater.finished()) {
      fail(ErrorCode::kMalformedContainer, "truncated compressed body at byte offset " + std::to_string(bytes.size()));
    }
    body = inflated;
  }
  std::vector<Value> values;
  values.reserve(h.count);
  size_t offset = 0;
  for (uint64_t i = 0; i < h.count; ++i) {
    if (offset >= body.size()) {
      fail(ErrorCode::kMalformedContainer, "container declares " + std::to_string(h.count) + " records, body ends after " +
                                               std::to_string(i) + " (body offset " + std::to_string(offset) + ")");
    }
    try {
      values.push_back(decodeValue(body, offset));
    } catch (const Error& e) {
      fail(ErrorCode::kMalformedContainer, std::string("bad record in container body: ") + e.what());
    }
  }
  if (offset != body.size()) {
    fail(ErrorCode::kMalformedContainer, "trailing bytes after record " + std::to_string(h.count) +
                                             " at body offset " + std::to_string(offset));
  }
  return values;
}

Partition partitionFromBytes(std::string_view bytes, const StoreKind& kind) {
  std::vector<Value> values = containerValues(bytes);
  if (kind.tier == StoreKind::Tier::kInMemory) return Partition::fromValues(std::move(values));
  Partition out = Partition::create(kind);
  for (Value& v : values) out.append(std::move(v));
  return out;
}

std::string zlibCompress(std::string_view data, int level) {
  checkLevel(level);
  std::string out;
  Deflater deflater(level);
  deflater.write(data, Z_FINISH, [&](std::string_view chunk) { out.append(chunk); });
  return out;
}

std::string zlibDecompress(std::string_view data) {
  std::string out;
  Inflater inflater;
  inflater.feed(data, out, 0);
  if (!inflater.finished()) fail(ErrorCode::kMalformedContainer, "truncated zlib stream");
  return out;
}

size_t tlvRecordLength(std::string_view data) { return recordLength(data, 0, 0); }

}  // namespace ignis::storage
