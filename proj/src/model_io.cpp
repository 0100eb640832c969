// Copyright 2026 The GMKL Authors. All Rights Reserved.
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

#include "gmkl/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>

#include "gmkl/errors.hpp"

namespace gmkl {
namespace {

static_assert(std::numeric_limits<float>::is_iec559, "model format needs IEEE-754 floats");

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    for (std::size_t k = 0; k < sizeof(T); ++k) {
      out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * k)));
    }
  }
  void floats(const std::vector<float>& v) {
    for (float x : v) le(std::bit_cast<std::uint32_t>(x));
  }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > in_.size() - pos_) throw FormatError("model file truncated");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  T le() {
    auto s = take(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) v |= static_cast<std::uint64_t>(s[k]) << (8 * k);
    return static_cast<T>(v);
  }
  std::vector<float> floats(std::size_t n) {
    if (n > (in_.size() - pos_) / 4) throw FormatError("model file truncated");
    std::vector<float> v(n);
    for (auto& x : v) x = std::bit_cast<float>(le<std::uint32_t>());
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint8_t> serialize_model(const ParameterBank& bank, const Vocabulary& vocab,
                                          const TrainConfig& cfg) {
  if (bank.vocab_size() != vocab.size()) throw UsageError("bank and vocabulary sizes differ");
  if (bank.components() != cfg.components || bank.dim() != cfg.dim) {
    throw UsageError("bank shape does not match config");
  }
  Writer w;
  w.bytes(kModelMagic, 4);
  w.le<std::uint32_t>(kModelVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(vocab.size()));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(bank.components()));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(bank.dim()));
  const std::string blob = nlohmann::json(cfg).dump();
  w.le<std::uint64_t>(blob.size());
  w.bytes(blob.data(), blob.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const std::string& tok = vocab.tokens()[i];
    w.le<std::uint32_t>(static_cast<std::uint32_t>(tok.size()));
    w.bytes(tok.data(), tok.size());
    w.le<std::uint64_t>(vocab.counts()[i]);
  }
  w.floats(bank.all_scores());
  w.floats(bank.all_means());
  w.floats(bank.all_log_vars());
  const std::uint64_t sum = fnv1a64(w.data());
  w.le<std::uint64_t>(sum);
  return std::move(w.data());
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw FormatError("model file truncated");
  Reader r(bytes);
  auto magic = r.take(4);
  if (std::memcmp(magic.data(), kModelMagic, 4) != 0) throw FormatError("bad magic (not a GMKL model)");
  const auto version = r.le<std::uint32_t>();
  if (version != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(version));
  }
  // Checksum first so that nothing below runs on corrupted data.
  const std::size_t body = bytes.size() - 8;
  Reader tail(bytes.subspan(body));
  if (fnv1a64(bytes.first(body)) != tail.le<std::uint64_t>()) {
    throw FormatError("checksum mismatch");
  }

  const std::size_t vocab_size = r.le<std::uint32_t>();
  const std::size_t components = r.le<std::uint32_t>();
  const std::size_t dim = r.le<std::uint32_t>();
  const auto blob_len = r.le<std::uint64_t>();
  if (blob_len > r.remaining()) throw FormatError("model file truncated");
  auto blob = r.take(static_cast<std::size_t>(blob_len));

  Model m;
  try {
    nlohmann::json j = nlohmann::json::parse(blob.begin(), blob.end());
    from_json(j, m.config);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad config blob: ") + e.what());
  } catch (const UsageError& e) {
    throw FormatError(std::string("bad config blob: ") + e.what());
  }
  if (m.config.components != components || m.config.dim != dim) {
    throw FormatError("header shape disagrees with config blob");
  }

  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  tokens.reserve(vocab_size);
  counts.reserve(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    const auto len = r.le<std::uint32_t>();
    auto s = r.take(len);
    tokens.emplace_back(s.begin(), s.end());
    counts.push_back(r.le<std::uint64_t>());
  }
  try {
    m.vocab = Vocabulary(std::move(tokens), std::move(counts));
    m.bank = ParameterBank(vocab_size, components, dim);
  } catch (const UsageError& e) {
    throw FormatError(std::string("invalid model contents: ") + e.what());
  }
  m.bank.all_scores() = r.floats(vocab_size * components);
  m.bank.all_means() = r.floats(vocab_size * components * dim);
  m.bank.all_log_vars() = r.floats(vocab_size * components * dim);
  if (r.pos() != body) throw FormatError("trailing bytes before checksum");
  return m;
}

void save_model(const ParameterBank& bank, const Vocabulary& vocab, const TrainConfig& cfg,
                const std::string& path) {
  const auto bytes = serialize_model(bank, vocab, cfg);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path);
  return deserialize_model(bytes);
}

void export_means(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write export file: " + path);
  out << std::setprecision(9);
  for (std::size_t w = 0; w < model.vocab.size(); ++w) {
    for (std::size_t c = 0; c < model.bank.components(); ++c) {
      out << model.vocab.tokens()[w] << ' ' << c;
      for (float x : model.bank.component_mean(static_cast<WordId>(w), c)) out << ' ' << x;
      out << '\n';
    }
  }
  if (!out) throw IoError("write failure on " + path);
}

}  // namespace gmkl
