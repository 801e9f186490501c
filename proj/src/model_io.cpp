#include "conflate/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace conflate {
namespace {

constexpr char kMagic[8] = {'C', 'O', 'N', 'F', 'L', 'A', 'T', 'E'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }

  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& b, std::size_t end) : buf(b), limit(end) {}

  void need(std::size_t n) const {
    if (n > limit - pos) throw ModelFormatError("model file is truncated");
  }
  template <typename U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[pos + i]) << (8 * i);
    pos += sizeof(U);
    return v;
  }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
    pos += n;
    return s;
  }

  const std::vector<std::uint8_t>& buf;
  std::size_t limit;
  std::size_t pos = 0;
};

nlohmann::json dims_to_json(const EncoderDims& d) {
  return {{"embedding", d.embedding},
          {"lstm_hidden", d.lstm_hidden},
          {"feature_maps", d.feature_maps},
          {"boc_hidden", d.boc_hidden}};
}

EncoderDims dims_from_json(const nlohmann::json& j) {
  EncoderDims d;
  d.embedding = j.at("embedding").get<std::size_t>();
  d.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
  d.feature_maps = j.at("feature_maps").get<std::size_t>();
  d.boc_hidden = j.at("boc_hidden").get<std::size_t>();
  return d;
}

}  // namespace

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint8_t> serialize_model(const ModelArtifact& a) {
  nlohmann::json meta;
  meta["model_kind"] = std::string(to_string(a.params.kind()));
  meta["dims"] = dims_to_json(a.params.dims());
  meta["vocabulary"] = a.vocabulary;
  meta["hyperparameters"] = a.hyperparameters;
  meta["run_config"] = a.run_config;
  meta["training"] = {{"seed", a.training.seed},
                      {"fold", a.training.fold},
                      {"epochs_run", a.training.epochs_run},
                      {"best_epoch", a.training.best_epoch},
                      {"best_validation_recall1", a.training.best_validation_recall1}};
  const std::string meta_text = meta.dump();

  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.uint<std::uint32_t>(ModelArtifact::kFormatVersion);
  w.uint<std::uint64_t>(meta_text.size());
  w.bytes(meta_text.data(), meta_text.size());
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(a.params.count()));
  for (std::size_t i = 0; i < a.params.count(); ++i) {
    const std::string& name = a.params.name(i);
    const Tensor2<float>& t = a.params.value(i);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.uint<std::uint64_t>(t.rows());
    w.uint<std::uint64_t>(t.cols());
    for (float v : t.flat()) w.f32(v);
  }
  w.uint<std::uint64_t>(fnv1a64(w.out.data(), w.out.size()));
  return std::move(w.out);
}

ModelArtifact deserialize_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof kMagic + 4 + 8 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw ModelFormatError("not a conflate model file (bad magic)");
  }
  const std::size_t body = bytes.size() - 8;
  {
    Reader tail(bytes, bytes.size());
    tail.pos = body;
    const auto stored = tail.uint<std::uint64_t>();
    if (stored != fnv1a64(bytes.data(), body)) throw ModelFormatError("model file checksum mismatch");
  }
  Reader r(bytes, body);
  r.pos = sizeof kMagic;
  const auto version = r.uint<std::uint32_t>();
  if (version != ModelArtifact::kFormatVersion) {
    throw ModelFormatError("unsupported model format version " + std::to_string(version));
  }
  const auto meta_len = r.uint<std::uint64_t>();
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(r.str(static_cast<std::size_t>(meta_len)));
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("invalid model metadata: ") + e.what());
  }

  ModelArtifact a;
  try {
    const ModelKind kind = parse_model_kind(meta.at("model_kind").get<std::string>());
    a.params = EncoderParams<float>(kind, dims_from_json(meta.at("dims")));
    a.vocabulary = meta.at("vocabulary").get<std::string>();
    a.hyperparameters = meta.value("hyperparameters", nlohmann::json::object());
    a.run_config = meta.value("run_config", nlohmann::json::object());
    const auto& t = meta.at("training");
    a.training.seed = t.at("seed").get<std::uint64_t>();
    a.training.fold = t.at("fold").get<std::size_t>();
    a.training.epochs_run = t.at("epochs_run").get<std::size_t>();
    a.training.best_epoch = t.at("best_epoch").get<std::size_t>();
    a.training.best_validation_recall1 = t.at("best_validation_recall1").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("invalid model metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("invalid model metadata: ") + e.what());
  }

  const auto count = r.uint<std::uint32_t>();
  if (count != a.params.count()) {
    throw ModelFormatError("model holds " + std::to_string(count) + " tensors, expected " +
                           std::to_string(a.params.count()));
  }
  for (std::size_t i = 0; i < count; ++i) {
    const auto name = r.str(r.uint<std::uint32_t>());
    const auto rows = r.uint<std::uint64_t>();
    const auto cols = r.uint<std::uint64_t>();
    Tensor2<float>& t = a.params[i].value;
    if (name != a.params.name(i)) {
      throw ModelFormatError("tensor " + std::to_string(i) + " is named '" + name + "', expected '" +
                             a.params.name(i) + "'");
    }
    if (rows != t.rows() || cols != t.cols()) {
      throw ModelFormatError("tensor '" + name + "' has shape " + Tensor2<float>::shape_string(rows, cols) +
                             ", expected " + t.shape());
    }
    for (float& v : t.flat()) v = r.f32();
  }
  if (r.pos != body) throw ModelFormatError("trailing bytes after tensor payload");
  return a;
}

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
  const auto bytes = serialize_model(artifact);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace conflate
