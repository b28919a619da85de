// Copyright 2026 The Seq2Biseq Authors.
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


#include "s2b/serialization.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace s2b {
namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    if (s.size() > std::numeric_limits<std::uint32_t>::max()) throw FormatError("string too long");
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void strings(const std::vector<std::string>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& s : v) str(s);
  }

 private:
  void le(std::uint64_t v, int bytes) {
    std::array<char, 8> buf{};
    for (int i = 0; i < bytes; ++i) buf[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf.data(), bytes);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw FormatError(std::string("model file truncated while reading ") + what);
    }
  }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(le(4, what)); }
  std::uint64_t u64(const char* what) { return le(8, what); }
  std::int64_t i64(const char* what) { return static_cast<std::int64_t>(le(8, what)); }
  double f64(const char* what) { return std::bit_cast<double>(le(8, what)); }
  std::string str(const char* what) {
    const std::uint32_t n = u32(what);
    std::string s;
    // Grow as data arrives so a corrupt length cannot force a huge allocation.
    constexpr std::size_t kChunk = 1 << 16;
    for (std::size_t done = 0; done < n;) {
      const std::size_t take = std::min<std::size_t>(kChunk, n - done);
      s.resize(done + take);
      bytes(s.data() + done, take, what);
      done += take;
    }
    return s;
  }
  std::vector<std::string> strings(const char* what) {
    const std::uint32_t n = u32(what);
    std::vector<std::string> out;
    for (std::uint32_t i = 0; i < n; ++i) out.push_back(str(what));
    return out;
  }

 private:
  std::uint64_t le(int n, const char* what) {
    std::array<char, 8> buf{};
    bytes(buf.data(), static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[static_cast<std::size_t>(i)])) << (8 * i);
    }
    return v;
  }
  std::istream& in_;
};

std::vector<std::pair<std::string, std::int64_t>> architecture_entries(const Architecture& a) {
  return {{"word_embedding", a.word_embedding}, {"char_embedding", a.char_embedding},
          {"label_embedding", a.label_embedding}, {"char_hidden", a.char_hidden},
          {"word_hidden", a.word_hidden},         {"decoder_hidden", a.decoder_hidden},
          {"fw_only", a.fw_only ? 1 : 0}};
}

Architecture architecture_from(const std::map<std::string, std::int64_t>& kv) {
  Architecture a;
  auto get = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(std::string("model file lacks architecture key ") + key);
    return it->second;
  };
  a.word_embedding = get("word_embedding");
  a.char_embedding = get("char_embedding");
  a.label_embedding = get("label_embedding");
  a.char_hidden = get("char_hidden");
  a.word_hidden = get("word_hidden");
  a.decoder_hidden = get("decoder_hidden");
  a.fw_only = get("fw_only") != 0;
  if (kv.size() != 7) throw FormatError("model file has unknown architecture keys");
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  return a;
}

}  // namespace

void write_model(std::ostream& out, const Model<double>& model) {
  Writer w(out);
  out.write(kModelMagic, 4);
  w.u32(kModelFormatVersion);
  auto arch = architecture_entries(model.arch());
  w.u32(static_cast<std::uint32_t>(arch.size()));
  for (const auto& [k, v] : arch) {
    w.str(k);
    w.i64(v);
  }
  w.strings(model.vocab().word_table());
  w.strings(model.vocab().char_table());
  w.strings(model.vocab().label_table());
  auto params = model.params().all();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const Parameter<double>* p : params) {
    w.str(p->name);
    w.u32(2);
    w.u64(static_cast<std::uint64_t>(p->value.rows()));
    w.u64(static_cast<std::uint64_t>(p->value.cols()));
    for (Index r = 0; r < p->value.rows(); ++r) {
      for (Index c = 0; c < p->value.cols(); ++c) w.f64(p->value(r, c));
    }
  }
  if (!out) throw std::runtime_error("failed writing model");
}

Model<double> read_model(std::istream& in) {
  Reader r(in);
  std::array<char, 4> magic{};
  r.bytes(magic.data(), 4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kModelMagic)) throw FormatError("not a model file (bad magic)");
  const std::uint32_t version = r.u32("version");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  std::map<std::string, std::int64_t> kv;
  const std::uint32_t n_arch = r.u32("architecture");
  for (std::uint32_t i = 0; i < n_arch; ++i) {
    std::string key = r.str("architecture key");
    const std::int64_t value = r.i64("architecture value");
    if (!kv.emplace(std::move(key), value).second) throw FormatError("duplicate architecture key");
  }
  const Architecture arch = architecture_from(kv);
  auto words = r.strings("word table");
  auto chars = r.strings("char table");
  auto labels = r.strings("label table");
  Vocabulary vocab;
  try {
    vocab = Vocabulary::from_tables(std::move(words), std::move(chars), std::move(labels));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model file vocabulary: ") + e.what());
  }

  Model<double> model(std::move(vocab), arch, 0);
  const std::uint32_t n_tensors = r.u32("tensor count");
  if (n_tensors != model.params().count()) throw FormatError("model file tensor count does not match its architecture");
  std::vector<char> seen(model.params().count(), 0);
  auto all = model.params().all();
  for (std::uint32_t t = 0; t < n_tensors; ++t) {
    const std::string name = r.str("tensor name");
    Parameter<double>* p = model.params().find(name);
    if (p == nullptr) throw FormatError("model file has unknown tensor " + name);
    const auto slot = static_cast<std::size_t>(std::find(all.begin(), all.end(), p) - all.begin());
    if (seen[slot]) throw FormatError("model file repeats tensor " + name);
    seen[slot] = 1;
    const std::uint32_t rank = r.u32("tensor rank");
    if (rank != 2) throw FormatError("tensor " + name + " has rank " + std::to_string(rank));
    const std::uint64_t rows = r.u64("tensor extent");
    const std::uint64_t cols = r.u64("tensor extent");
    if (rows != static_cast<std::uint64_t>(p->value.rows()) ||
        cols != static_cast<std::uint64_t>(p->value.cols())) {
      throw FormatError("tensor " + name + " shape does not match the architecture");
    }
    for (Index i = 0; i < p->value.rows(); ++i) {
      for (Index j = 0; j < p->value.cols(); ++j) p->value(i, j) = r.f64("tensor values");
    }
  }
  return model;
}

void save_model(const Model<double>& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_model(out, model);
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Model<double> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_model(in);
}

}  // namespace s2b
