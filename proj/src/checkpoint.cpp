// Copyright 2026 The tarfvae Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tarfvae/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace tarfvae {

namespace {

constexpr std::size_t kBlock = 512;

void write_octal(char* field, std::size_t width, std::uint64_t value) {
  std::snprintf(field, width, "%0*llo", static_cast<int>(width - 1), static_cast<unsigned long long>(value));
}

void append_member(std::string& out, const std::string& name, const std::string& body) {
  std::array<char, kBlock> header{};
  std::memcpy(header.data(), name.data(), std::min<std::size_t>(name.size(), 99));
  write_octal(header.data() + 100, 8, 0644);
  write_octal(header.data() + 108, 8, 0);
  write_octal(header.data() + 116, 8, 0);
  write_octal(header.data() + 124, 12, body.size());
  write_octal(header.data() + 136, 12, 0);
  header[156] = '0';
  std::memcpy(header.data() + 257, "ustar", 6);
  std::memcpy(header.data() + 263, "00", 2);
  std::memset(header.data() + 148, ' ', 8);
  unsigned sum = 0;
  for (char c : header) sum += static_cast<unsigned char>(c);
  std::snprintf(header.data() + 148, 8, "%06o", sum);
  header[155] = ' ';
  out.append(header.data(), kBlock);
  out.append(body);
  out.append((kBlock - body.size() % kBlock) % kBlock, '\0');
}

std::map<std::string, std::string> read_members(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path.string() + "'");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::map<std::string, std::string> members;
  std::size_t pos = 0;
  while (pos + kBlock <= data.size()) {
    const char* h = data.data() + pos;
    if (h[0] == '\0') break;
    std::string name(h, strnlen(h, 100));
    const std::size_t size = std::stoull(std::string(h + 124, 12), nullptr, 8);
    pos += kBlock;
    if (pos + size > data.size()) throw Error("truncated checkpoint member '" + name + "'");
    members.emplace(name, data.substr(pos, size));
    pos += (size + kBlock - 1) / kBlock * kBlock;
  }
  return members;
}

void put_f32_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

float get_f32_le(const std::string& blob, std::size_t offset) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[offset + i])) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const CheckpointMeta& meta) {
  std::ostringstream manifest;
  std::string blob;
  blob.reserve(params.scalar_count() * 4);
  for (const auto& [name, var] : params.entries()) {
    const auto& shape = var.value().shape();
    manifest << name << ' ';
    for (std::size_t i = 0; i < shape.size(); ++i) manifest << (i ? "x" : "") << shape[i];
    manifest << " f32 " << blob.size() << '\n';
    for (double v : var.value().data()) put_f32_le(blob, v);
  }
  nlohmann::json m = {{"config", meta.config}, {"step", meta.step}, {"val_score", meta.val_score}};

  std::string archive;
  append_member(archive, "manifest.txt", manifest.str());
  append_member(archive, "params.bin", blob);
  append_member(archive, "meta.json", m.dump(2));
  archive.append(2 * kBlock, '\0');

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint '" + path.string() + "'");
  out.write(archive.data(), static_cast<std::streamsize>(archive.size()));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const auto members = read_members(path);
  for (const char* required : {"manifest.txt", "params.bin", "meta.json"}) {
    if (!members.count(required)) throw Error("checkpoint is missing member '" + std::string(required) + "'");
  }
  const std::string& blob = members.at("params.bin");

  Checkpoint ckpt;
  std::istringstream manifest(members.at("manifest.txt"));
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name, shape_str, dtype;
    std::size_t offset = 0;
    if (!(ls >> name >> shape_str >> dtype >> offset)) throw Error("malformed manifest line: " + line);
    if (dtype != "f32") throw Error("unsupported dtype '" + dtype + "' for '" + name + "'");
    std::vector<std::size_t> shape;
    std::istringstream ss(shape_str);
    std::string dim;
    while (std::getline(ss, dim, 'x')) shape.push_back(std::stoull(dim));
    NdArray arr(shape);
    if (offset + 4 * arr.size() > blob.size()) throw Error("parameter '" + name + "' exceeds blob size");
    for (std::size_t i = 0; i < arr.size(); ++i) arr[i] = get_f32_le(blob, offset + 4 * i);
    ckpt.params.emplace_back(name, std::move(arr));
  }

  const auto m = nlohmann::json::parse(members.at("meta.json"));
  ckpt.meta.config = m.at("config");
  ckpt.meta.step = m.at("step").get<std::uint64_t>();
  ckpt.meta.val_score = m.at("val_score").is_null() ? 0.0 : m.at("val_score").get<double>();
  return ckpt;
}

void load_checkpoint_into(ParamStore& params, const Checkpoint& ckpt) {
  const auto& entries = params.entries();
  if (entries.size() != ckpt.params.size()) {
    throw Error("checkpoint has " + std::to_string(ckpt.params.size()) + " parameters, model expects " +
                std::to_string(entries.size()));
  }
  std::vector<NdArray> values;
  values.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [name, arr] = ckpt.params[i];
    if (name != entries[i].first) {
      throw Error("checkpoint parameter '" + name + "' where model expects '" + entries[i].first + "'");
    }
    if (!arr.same_shape(entries[i].second.value())) {
      throw ShapeError("checkpoint parameter '" + name + "' has shape " + arr.shape_str() + ", model expects " +
                       entries[i].second.value().shape_str());
    }
    values.push_back(arr);
  }
  params.restore(values);
}

}  // namespace tarfvae
