#include "dermabench/modelzoo/checkpoint.hpp"

#include <cstring>
#include <map>

#include "dermabench/error.hpp"
#include "dermabench/util/files.hpp"

namespace dermabench::modelzoo {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace container {

namespace {

template <typename T>
void append_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <typename T>
T read_le(const std::string& bytes, std::size_t offset) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return static_cast<T>(value);
}

std::string dtype_name(const torch::Tensor& t) {
  if (t.scalar_type() == torch::kFloat32) return "f32";
  if (t.scalar_type() == torch::kInt64) return "i64";
  throw CheckpointError(std::string("unsupported tensor dtype ") +
                        std::string(c10::toString(t.scalar_type())));
}

torch::ScalarType dtype_from(const std::string& name) {
  if (name == "f32") return torch::kFloat32;
  if (name == "i64") return torch::kInt64;
  throw CheckpointIntegrityError("unknown tensor dtype '" + name + "'");
}

constexpr std::size_t kPreambleSize = 8 + 4 + 8;

}  // namespace

void write(const fs::path& path, ordered_json metadata, const NamedTensors& tensors) {
  std::string payload;
  auto table = ordered_json::array();
  for (const auto& [name, tensor] : tensors) {
    const torch::Tensor t = tensor.detach().to(torch::kCPU).contiguous();
    const std::size_t nbytes = static_cast<std::size_t>(t.numel()) * t.element_size();
    table.push_back({{"name", name},
                     {"dtype", dtype_name(t)},
                     {"shape", t.sizes().vec()},
                     {"offset", payload.size()},
                     {"nbytes", nbytes}});
    payload.append(static_cast<const char*>(t.data_ptr()), nbytes);
  }
  metadata["format_version"] = kFormatVersion;
  metadata["payload_bytes"] = payload.size();
  metadata["tensors"] = std::move(table);
  const std::string header = metadata.dump();

  std::string file;
  file.reserve(kPreambleSize + header.size() + payload.size() + 8);
  file.append(kMagic, sizeof kMagic);
  append_le<std::uint32_t>(file, kFormatVersion);
  append_le<std::uint64_t>(file, header.size());
  file += header;
  file += payload;
  append_le<std::uint64_t>(file, util::fnv1a64(std::string_view(file).substr(kPreambleSize)));
  util::write_file_atomic(path, file);
}

Contents read(const fs::path& path) {
  std::string bytes;
  try {
    bytes = util::read_file(path);
  } catch (const FilesystemError& e) {
    throw CheckpointError(e.what());
  }
  if (bytes.size() < kPreambleSize || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw CheckpointIntegrityError("not a dermabench checkpoint: " + path.string());
  const auto version = read_le<std::uint32_t>(bytes, kVersionOffset);
  if (version != kFormatVersion)
    throw IncompatibleCheckpointError("checkpoint format version " + std::to_string(version) +
                                      " is incompatible with supported version " +
                                      std::to_string(kFormatVersion) + ": " + path.string());
  const auto header_size = read_le<std::uint64_t>(bytes, 12);
  if (header_size > bytes.size() - kPreambleSize)
    throw CheckpointIntegrityError("truncated checkpoint header: " + path.string());

  Contents out;
  try {
    out.metadata = ordered_json::parse(bytes.substr(kPreambleSize, header_size));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointIntegrityError("corrupt checkpoint header: " + path.string());
  }
  try {
    const std::size_t payload_bytes = out.metadata.at("payload_bytes").get<std::size_t>();
    const std::size_t payload_start = kPreambleSize + header_size;
    if (bytes.size() != payload_start + payload_bytes + 8)
      throw CheckpointIntegrityError("truncated or padded checkpoint: " + path.string());
    const auto stored_hash = read_le<std::uint64_t>(bytes, payload_start + payload_bytes);
    const auto actual_hash = util::fnv1a64(
        std::string_view(bytes).substr(kPreambleSize, header_size + payload_bytes));
    if (stored_hash != actual_hash)
      throw CheckpointIntegrityError("checkpoint checksum mismatch: " + path.string());

    for (const auto& entry : out.metadata.at("tensors")) {
      const auto shape = entry.at("shape").get<std::vector<int64_t>>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto nbytes = entry.at("nbytes").get<std::size_t>();
      torch::Tensor t = torch::empty(shape, torch::TensorOptions().dtype(
                                                dtype_from(entry.at("dtype").get<std::string>())));
      if (static_cast<std::size_t>(t.numel()) * t.element_size() != nbytes ||
          offset + nbytes > payload_bytes)
        throw CheckpointIntegrityError("tensor table does not match payload: " + path.string());
      std::memcpy(t.data_ptr(), bytes.data() + payload_start + offset, nbytes);
      out.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointIntegrityError(std::string("malformed checkpoint header: ") + e.what());
  }
  return out;
}

}  // namespace container

void load_named_state(torch::nn::Module& module, const container::NamedTensors& tensors,
                      const std::string& what) {
  std::map<std::string, torch::Tensor> targets;
  for (auto& [name, t] : named_state(module)) targets.emplace(name, t);
  if (targets.size() != tensors.size())
    throw CheckpointError(what + ": expected " + std::to_string(targets.size()) +
                          " tensors, file has " + std::to_string(tensors.size()));
  torch::NoGradGuard no_grad;
  for (const auto& [name, source] : tensors) {
    auto it = targets.find(name);
    if (it == targets.end()) throw CheckpointError(what + ": unexpected tensor '" + name + "'");
    if (it->second.sizes() != source.sizes())
      throw CheckpointError(what + ": shape mismatch for '" + name + "'");
    it->second.copy_(source);
  }
}

void save_checkpoint(ClassifierModelImpl& model, const fs::path& path,
                     const std::string& train_config_fingerprint) {
  ordered_json meta;
  meta["kind"] = "checkpoint";
  meta["backbone_id"] = std::string(backbone_key(model.backbone_id()));
  meta["head_seed"] = model.head_seed();
  meta["freeze_policy"] = std::string(freeze_policy_name(model.freeze_policy()));
  meta["weight_source"] = std::string(weight_source_name(model.weight_source()));
  meta["preprocessing_descriptor"] = model.preprocessing().to_json();
  meta["created_at"] = util::iso_utc_timestamp();
  meta["train_config_fingerprint"] = train_config_fingerprint;
  container::write(path, std::move(meta), named_state(model));
}

namespace {

CheckpointMetadata metadata_from(const ordered_json& meta, const fs::path& path) {
  try {
    if (meta.value("kind", std::string()) != "checkpoint")
      throw CheckpointError("not a model checkpoint (kind '" +
                            meta.value("kind", std::string()) + "'): " + path.string());
    CheckpointMetadata m;
    m.format_version = meta.at("format_version").get<int>();
    m.backbone_id = parse_backbone(meta.at("backbone_id").get<std::string>());
    m.head_seed = meta.at("head_seed").get<std::uint64_t>();
    m.freeze_policy = parse_freeze_policy(meta.at("freeze_policy").get<std::string>());
    m.weight_source = parse_weight_source(meta.at("weight_source").get<std::string>());
    m.preprocessing = PreprocessDescriptor::from_json(meta.at("preprocessing_descriptor"));
    m.created_at = meta.value("created_at", std::string());
    m.train_config_fingerprint = meta.value("train_config_fingerprint", std::string());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointIntegrityError(std::string("incomplete checkpoint metadata: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointIntegrityError(std::string("invalid checkpoint metadata: ") + e.what());
  }
}

}  // namespace

CheckpointMetadata read_checkpoint_metadata(const fs::path& path) {
  return metadata_from(container::read(path).metadata, path);
}

ClassifierModel load_checkpoint(const fs::path& path) {
  container::Contents contents = container::read(path);
  const CheckpointMetadata meta = metadata_from(contents.metadata, path);
  ClassifierModel model(meta.backbone_id, meta.freeze_policy, meta.head_seed,
                        meta.weight_source);
  load_named_state(*model, contents.tensors, "checkpoint " + path.string());
  model->eval();
  return model;
}

void save_backbone_weights(BackboneNet& backbone, BackboneId id, const fs::path& path) {
  ordered_json meta;
  meta["kind"] = "backbone_weights";
  meta["backbone_id"] = std::string(backbone_key(id));
  meta["preprocessing_descriptor"] = preprocessing_for(id).to_json();
  meta["created_at"] = util::iso_utc_timestamp();
  container::write(path, std::move(meta), named_state(backbone));
}

}  // namespace dermabench::modelzoo
