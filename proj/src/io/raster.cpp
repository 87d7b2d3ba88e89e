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

#include "svlb/io/raster.hpp"

#include "svlb/error.hpp"
#include "svlb/io/bytes.hpp"

namespace svlb::io {

namespace {

struct RasterHeader {
  std::uint8_t dtype = 0;
  std::uint32_t channels = 0, height = 0, width = 0;
  bool has_ignore = false;
  std::int32_t ignore_id = 0;
};

void write_header(ByteWriter& w, const RasterHeader& h) {
  w.raw("SVLR");
  w.u32(kRasterVersion);
  w.u8(h.dtype);
  w.u32(h.channels);
  w.u32(h.height);
  w.u32(h.width);
  w.u8(h.has_ignore ? 1 : 0);
  w.i32(h.ignore_id);
}

RasterHeader read_header(ByteReader& r, std::uint8_t expected_dtype) {
  r.set_field("magic");
  if (r.take(4) != "SVLR") throw LoadError("magic", "expected 'SVLR'");
  r.set_field("version");
  if (const auto v = r.u32(); v != kRasterVersion) throw LoadError("version", "unsupported version " + std::to_string(v));
  RasterHeader h;
  r.set_field("dtype");
  h.dtype = r.u8();
  if (h.dtype != expected_dtype) {
    throw LoadError("dtype", "dtype code " + std::to_string(h.dtype) + ", expected " + std::to_string(expected_dtype));
  }
  r.set_field("header");
  h.channels = r.u32();
  h.height = r.u32();
  h.width = r.u32();
  h.has_ignore = r.u8() != 0;
  h.ignore_id = r.i32();
  const std::uint64_t n = static_cast<std::uint64_t>(h.channels) * h.height * h.width;
  if (n * 4 != r.remaining()) {
    throw LoadError("payload", "dims declare " + std::to_string(n * 4) + " bytes, file has " +
                                   std::to_string(r.remaining()));
  }
  r.set_field("payload");
  return h;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw ContractError(std::string("raster: ") + what + " exceeds 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string encode_image(const TensorF& image) {
  if (image.rank() != 3) throw DimensionError("raster: image must be [C,H,W], got " + to_string(image.shape()));
  ByteWriter w;
  write_header(w, {0, checked_u32(image.dim(0), "channels"), checked_u32(image.dim(1), "height"),
                   checked_u32(image.dim(2), "width"), false, 0});
  for (float v : image.data()) w.f32(v);
  return w.take();
}

std::string encode_labels(const metrics::SegMap& m) {
  if (m.labels.size() != m.height * m.width) throw ContractError("raster: label count does not match dims");
  ByteWriter w;
  write_header(w, {1, 1, checked_u32(m.height, "height"), checked_u32(m.width, "width"), m.ignore_id.has_value(),
                   m.ignore_id.value_or(0)});
  for (auto v : m.labels) w.i32(v);
  return w.take();
}

TensorF decode_image(std::string_view bytes) {
  ByteReader r(bytes, "magic");
  const auto h = read_header(r, 0);
  std::vector<float> values(static_cast<std::size_t>(h.channels) * h.height * h.width);
  for (auto& v : values) v = r.f32();
  return TensorF({h.channels, h.height, h.width}, std::move(values));
}

metrics::SegMap decode_labels(std::string_view bytes) {
  ByteReader r(bytes, "magic");
  const auto h = read_header(r, 1);
  if (h.channels != 1) throw LoadError("header", "label raster has " + std::to_string(h.channels) + " channels");
  metrics::SegMap m(h.height, h.width);
  for (auto& v : m.labels) v = r.i32();
  if (h.has_ignore) m.ignore_id = h.ignore_id;
  return m;
}

void write_image(const std::string& path, const TensorF& image) { write_file(path, encode_image(image)); }
void write_labels(const std::string& path, const metrics::SegMap& labels) { write_file(path, encode_labels(labels)); }
TensorF read_image(const std::string& path) { return decode_image(read_file(path)); }
metrics::SegMap read_labels(const std::string& path) { return decode_labels(read_file(path)); }

}  // namespace svlb::io
