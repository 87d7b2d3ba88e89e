// Copyright 2026 The SVLB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "svlb/io/checkpoint.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "svlb/error.hpp"
#include "svlb/io/bytes.hpp"

namespace svlb::io {

const TensorRecord* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.raw("SVLB");
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.config.size()));
  w.raw(ckpt.config);
  for (const auto& t : ckpt.tensors) {
    std::size_t n = 1;
    for (auto d : t.shape) n *= d;
    if (n != t.values.size()) throw ContractError("checkpoint: tensor '" + t.name + "' shape does not match values");
    if (t.shape.size() > 255) throw ContractError("checkpoint: tensor '" + t.name + "' rank > 255");
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.raw(t.name);
    w.u8(0);
    w.u8(static_cast<std::uint8_t>(t.shape.size()));
    for (auto d : t.shape) w.u64(d);
    for (float v : t.values) w.f32(v);
  }
  w.u32(crc32_of(w.bytes()));
  return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 16) throw LoadError("size", "file has " + std::to_string(bytes.size()) + " bytes");
  if (bytes.substr(0, 4) != "SVLB") throw LoadError("magic", "expected 'SVLB'");
  ByteReader head(bytes.substr(4, 4), "version");
  const auto version = head.u32();
  if (version != kCheckpointVersion) {
    throw LoadError("version", "unsupported version " + std::to_string(version));
  }
  const auto body = bytes.substr(0, bytes.size() - 4);
  ByteReader tail(bytes.substr(bytes.size() - 4), "crc");
  if (tail.u32() != crc32_of(body)) throw LoadError("crc", "checksum mismatch");

  ByteReader r(body.substr(8), "config");
  Checkpoint out;
  const auto config_len = r.u32();
  out.config = std::string(r.take(config_len));
  while (!r.done()) {
    r.set_field("record");
    TensorRecord t;
    const auto name_len = r.u32();
    t.name = std::string(r.take(name_len));
    r.set_field("dtype");
    if (const auto dtype = r.u8(); dtype != 0) {
      throw LoadError("dtype", "tensor '" + t.name + "' has dtype code " + std::to_string(dtype));
    }
    r.set_field("record");
    const auto rank = r.u8();
    std::uint64_t n = 1;
    for (int i = 0; i < rank; ++i) {
      const auto d = r.u64();
      t.shape.push_back(static_cast<std::size_t>(d));
      n *= d;
    }
    if (n > r.remaining() / 4) {
      throw LoadError("payload", "tensor '" + t.name + "' declares " + std::to_string(n) + " values, " +
                                     std::to_string(r.remaining()) + " bytes remain");
    }
    r.set_field("payload");
    t.values.resize(static_cast<std::size_t>(n));
    for (auto& v : t.values) v = r.f32();
    out.tensors.push_back(std::move(t));
  }
  return out;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) { write_file(path, encode_checkpoint(ckpt)); }

Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path)); }

Checkpoint make_checkpoint(const vit::NamedTensors<float>& tensors, std::string config) {
  Checkpoint c;
  c.config = std::move(config);
  for (const auto& t : tensors) {
    c.tensors.push_back({t.name, t.tensor.shape(), {t.tensor.data().begin(), t.tensor.data().end()}});
  }
  return c;
}

LoadReport apply_checkpoint(const Checkpoint& ckpt, const vit::NamedTensors<float>& targets) {
  LoadReport report;
  std::map<std::string, const TensorRecord*> by_name;
  for (const auto& t : ckpt.tensors) by_name[t.name] = &t;
  for (const auto& target : targets) {
    auto it = by_name.find(target.name);
    if (it == by_name.end()) continue;
    if (it->second->shape != target.tensor.shape()) {
      throw LoadError("shape", "tensor '" + target.name + "' is " + to_string(it->second->shape) + " in the checkpoint, " +
                                   to_string(target.tensor.shape()) + " in the model");
    }
  }
  std::map<std::string, bool> used;
  for (const auto& target : targets) {
    auto it = by_name.find(target.name);
    if (it == by_name.end()) {
      report.initialized.push_back(target.name);
      continue;
    }
    auto dst = Tensor<float>(target.tensor).data();
    std::copy(it->second->values.begin(), it->second->values.end(), dst.begin());
    report.loaded.push_back(target.name);
    used[target.name] = true;
  }
  for (const auto& t : ckpt.tensors) {
    if (!used.count(t.name)) report.unused.push_back(t.name);
  }
  return report;
}

std::string load_report_text(const LoadReport& report) {
  std::ostringstream os;
  for (const auto& n : report.loaded) os << "loaded " << n << '\n';
  for (const auto& n : report.initialized) os << "initialized " << n << '\n';
  for (const auto& n : report.unused) os << "unused " << n << '\n';
  return os.str();
}

}  // namespace svlb::io
