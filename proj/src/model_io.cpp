#include <cstring>
#include <sstream>

#include <json.hpp>

#include "hypermaps/svm.hpp"
#include "hypermaps/tensor_file.hpp"

namespace hypermaps {
namespace {

using nlohmann::json;

constexpr char kModelMagic[4] = {'H', 'M', 'S', 'V'};
constexpr std::uint32_t kModelVersion = 1;

std::uint64_t fnv1a(std::span<const std::byte> bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (auto b : bytes) h = (h ^ std::to_integer<std::uint64_t>(b)) * 1099511628211ULL;
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::byte>((v >> shift) & 0xFFu));
}

std::uint32_t get_u32(std::span<const std::byte> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::to_integer<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

}  // namespace

void save_models(const std::filesystem::path& path, const ClassifierSet& set) {
  if (set.models.empty()) throw ValidationError("no models to save");
  std::vector<std::byte> payload;
  json models = json::array();
  for (const auto& e : set.models) {
    const SvmModel& m = e.model;
    const std::uint32_t wdims[] = {1, static_cast<std::uint32_t>(m.classes), static_cast<std::uint32_t>(m.dim)};
    const std::uint32_t bdims[] = {static_cast<std::uint32_t>(m.classes)};
    const auto w = encode_tensor(wdims, m.weights);
    const auto b = encode_tensor(bdims, m.biases);
    payload.insert(payload.end(), w.begin(), w.end());
    payload.insert(payload.end(), b.begin(), b.end());
    models.push_back({{"scale", e.scale},
                      {"classes", m.classes},
                      {"dim", m.dim},
                      {"hyperparams", {{"c", m.hyperparams.c}, {"epochs", m.hyperparams.epochs}, {"seed", m.hyperparams.seed}}},
                      {"scaler", {{"mean", m.scaler.mean}, {"scale", m.scaler.scale}}},
                      {"checkpoint_objective", m.checkpoint_objective},
                      {"epoch_objective", m.epoch_objective},
                      {"blobs", {{{"name", "weights"}, {"bytes", w.size()}}, {{"name", "biases"}, {"bytes", b.size()}}}}});
  }
  const json header = {{"format", "hypermaps-svm"},
                       {"version", kModelVersion},
                       {"payload_bytes", payload.size()},
                       {"payload_fnv1a", hex64(fnv1a(payload))},
                       {"models", models}};
  const std::string text = header.dump();
  std::vector<std::byte> out;
  for (char c : kModelMagic) out.push_back(static_cast<std::byte>(c));
  put_u32(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  for (char c : text) out.push_back(static_cast<std::byte>(c));
  out.insert(out.end(), payload.begin(), payload.end());
  write_file_atomic(path, out);
}

ClassifierSet load_models(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  const std::string where = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
    throw ModelFileError(where + ": not a model file (bad magic or truncated)");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kModelVersion) {
    throw ModelFileError(where + ": model version " + std::to_string(version) + " is not supported");
  }
  const std::size_t header_len = get_u32(bytes, 8);
  if (bytes.size() < 12 + header_len) throw ModelFileError(where + ": header truncated");
  json header;
  try {
    header = json::parse(std::string(reinterpret_cast<const char*>(bytes.data()) + 12, header_len));
  } catch (const json::parse_error& ex) {
    throw ModelFileError(where + ": corrupted header: " + ex.what());
  }
  const auto payload = std::span<const std::byte>(bytes).subspan(12 + header_len);
  try {
    if (header.at("version").get<std::uint32_t>() != kModelVersion) {
      throw ModelFileError(where + ": header version mismatch");
    }
    if (payload.size() != header.at("payload_bytes").get<std::size_t>()) {
      throw ModelFileError(where + ": payload is " + std::to_string(payload.size()) + " bytes, header declares " +
                           std::to_string(header.at("payload_bytes").get<std::size_t>()) + " (truncated or corrupted)");
    }
    if (hex64(fnv1a(payload)) != header.at("payload_fnv1a").get<std::string>()) {
      throw ModelFileError(where + ": payload checksum mismatch (corrupted)");
    }
    ClassifierSet set;
    std::size_t offset = 0;
    for (const auto& jm : header.at("models")) {
      ClassifierSet::Entry e;
      e.scale = jm.at("scale").get<int>();
      SvmModel& m = e.model;
      m.classes = jm.at("classes").get<int>();
      m.dim = jm.at("dim").get<int>();
      const auto& hp = jm.at("hyperparams");
      m.hyperparams = {hp.at("c").get<double>(), hp.at("epochs").get<int>(), hp.at("seed").get<std::uint64_t>()};
      m.scaler.mean = jm.at("scaler").at("mean").get<std::vector<double>>();
      m.scaler.scale = jm.at("scaler").at("scale").get<std::vector<double>>();
      m.checkpoint_objective = jm.value("checkpoint_objective", std::vector<std::vector<double>>{});
      m.epoch_objective = jm.value("epoch_objective", std::vector<std::vector<double>>{});
      std::vector<Tensor> blobs;
      for (const auto& jb : jm.at("blobs")) {
        const auto n = jb.at("bytes").get<std::size_t>();
        if (offset + n > payload.size()) throw ModelFileError(where + ": blob extends past the payload");
        blobs.push_back(decode_tensor(payload.subspan(offset, n), where + ":" + jb.at("name").get<std::string>()));
        offset += n;
      }
      if (blobs.size() != 2) throw ModelFileError(where + ": expected weights and biases blobs");
      m.weights = std::move(blobs[0].values);
      m.biases = std::move(blobs[1].values);
      const auto k = static_cast<std::size_t>(m.classes);
      const auto d = static_cast<std::size_t>(m.dim);
      if (m.classes < 2 || m.weights.size() != k * d || m.biases.size() != k || m.scaler.mean.size() != d ||
          m.scaler.scale.size() != d) {
        throw ModelFileError(where + ": model shapes are inconsistent");
      }
      set.models.push_back(std::move(e));
    }
    if (set.models.empty()) throw ModelFileError(where + ": file holds no models");
    return set;
  } catch (const json::exception& ex) {
    throw ModelFileError(where + ": corrupted header: " + ex.what());
  } catch (const TensorFileError& ex) {
    throw ModelFileError(where + ": corrupted blob: " + ex.what());
  }
}

void save_model(const std::filesystem::path& path, const SvmModel& model) {
  ClassifierSet set;
  set.models.push_back({0, model});
  save_models(path, set);
}

SvmModel load_model(const std::filesystem::path& path) {
  auto set = load_models(path);
  if (set.models.size() != 1) throw ModelFileError(path.string() + ": expected a single model");
  return std::move(set.models.front().model);
}

}  // namespace hypermaps
