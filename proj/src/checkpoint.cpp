#include "gtp/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "gtp/errors.hpp"
#include "gtp/feature_io.hpp"

namespace gtp {
namespace {

constexpr char kMagic[4] = {'G', 'T', 'P', 'C'};

std::uint32_t flags_of(const ModelConfig& c) {
  std::uint32_t f = 0;
  f |= c.fuse_activation == Activation::tanh ? 1u : 0u;
  f |= c.graph_activation == Activation::tanh ? 2u : 0u;
  f |= c.per_layer_adjacency ? 4u : 0u;
  f |= c.raw_pointer_features ? 8u : 0u;
  return f;
}

CheckpointHeader read_header(std::istream& in, const std::string& where) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("", "not a checkpoint (bad magic): " + where);
  }
  CheckpointHeader h;
  h.version = io::read_u32(in);
  if (h.version != kCheckpointVersion) {
    throw DataError("", "unsupported checkpoint version " + std::to_string(h.version) + ": " + where);
  }
  ModelDims& d = h.config.dims;
  d.clip_dim = io::read_u32(in);
  d.word_dim = io::read_u32(in);
  d.hidden = io::read_u32(in);
  d.fused = io::read_u32(in);
  d.pointer_hidden = io::read_u32(in);
  d.graph_layers = io::read_u32(in);
  d.max_clips = io::read_u32(in);
  const std::uint32_t variant = io::read_u32(in);
  if (variant > static_cast<std::uint32_t>(Variant::no_mask)) {
    throw DataError("", "unknown variant code " + std::to_string(variant) + ": " + where);
  }
  h.config.variant = static_cast<Variant>(variant);
  h.config.lambda = io::read_f64(in);
  const std::uint32_t flags = io::read_u32(in);
  h.config.fuse_activation = (flags & 1u) != 0 ? Activation::tanh : Activation::relu;
  h.config.graph_activation = (flags & 2u) != 0 ? Activation::tanh : Activation::relu;
  h.config.per_layer_adjacency = (flags & 4u) != 0;
  h.config.raw_pointer_features = (flags & 8u) != 0;
  h.config.ln_eps = io::read_f64(in);
  h.tensor_count = io::read_u32(in);
  h.value_count = io::read_u32(in);
  return h;
}

}  // namespace

std::string CheckpointHeader::describe() const {
  const ModelDims& d = config.dims;
  std::ostringstream os;
  os << "variant=" << variant_name(config.variant) << " d_v=" << d.clip_dim << " d_w=" << d.word_dim
     << " H=" << d.hidden << " d_f=" << d.fused << " H_P=" << d.pointer_hidden << " layers=" << d.graph_layers
     << " K=" << d.max_clips << " lambda=" << config.lambda;
  return os.str();
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  Model copy = model;
  const auto tensors = copy.named_tensors();
  const ModelConfig& c = model.config();
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("", "cannot write checkpoint " + path.string());
  }
  out.write(kMagic, 4);
  io::write_u32(out, kCheckpointVersion);
  for (std::size_t v : {c.dims.clip_dim, c.dims.word_dim, c.dims.hidden, c.dims.fused, c.dims.pointer_hidden,
                        c.dims.graph_layers, c.dims.max_clips}) {
    io::write_u32(out, static_cast<std::uint32_t>(v));
  }
  io::write_u32(out, static_cast<std::uint32_t>(c.variant));
  io::write_f64(out, c.lambda);
  io::write_u32(out, flags_of(c));
  io::write_f64(out, c.ln_eps);
  std::size_t values = 0;
  for (const auto& t : tensors) {
    values += t.tensor->size();
  }
  io::write_u32(out, static_cast<std::uint32_t>(tensors.size()));
  io::write_u32(out, static_cast<std::uint32_t>(values));
  for (const auto& t : tensors) {
    for (double v : t.tensor->values()) {
      io::write_f32(out, static_cast<float>(v));
    }
  }
  if (!out) {
    throw DataError("", "write failed for checkpoint " + path.string());
  }
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("", "cannot open checkpoint " + path.string());
  }
  return read_header(in, path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("", "cannot open checkpoint " + path.string());
  }
  const CheckpointHeader h = read_header(in, path.string());
  Model model = [&] {
    try {
      return Model::build(h.config, 0);
    } catch (const InvalidInput& e) {
      throw DataError("", std::string("invalid checkpoint header: ") + e.what());
    }
  }();
  auto tensors = model.named_tensors();
  std::size_t values = 0;
  for (const auto& t : tensors) {
    values += t.tensor->size();
  }
  if (tensors.size() != h.tensor_count || values != h.value_count) {
    throw DataError("", "checkpoint declares " + std::to_string(h.tensor_count) + " tensors / " +
                            std::to_string(h.value_count) + " values, header dims imply " +
                            std::to_string(tensors.size()) + " / " + std::to_string(values));
  }
  for (auto& t : tensors) {
    for (double& v : t.tensor->values()) {
      v = io::read_f32(in);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError("", "trailing bytes in checkpoint " + path.string());
  }
  return model;
}

}  // namespace gtp

namespace gtp {

void check_compatible(const CheckpointHeader& header, std::span<const VideoSample> samples) {
  const ModelDims& d = header.config.dims;
  for (const VideoSample& s : samples) {
    const std::size_t dv = s.clips.features.cols();
    const std::size_t dw = s.sentence.embeddings.cols();
    if (dv != d.clip_dim || dw != d.word_dim) {
      throw DataError(s.id, "dimension mismatch\n  checkpoint: " + header.describe() + "\n  manifest:   d_v=" +
                                std::to_string(dv) + " d_w=" + std::to_string(dw));
    }
  }
}

}  // namespace gtp
