#include "abode/io/model_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "abode/error.hpp"

namespace abode::io {

using nlohmann::json;

namespace {

constexpr std::size_t kMagicSize = sizeof(kModelMagic) - 1;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

}  // namespace

json to_json(const model::ModelConfig& c) {
  return {{"widths", c.widths},
          {"heads", c.heads},
          {"cond_dim", c.cond_dim},
          {"encoder_widths", c.encoder_widths},
          {"framework_conditioning", c.framework_conditioning}};
}

model::ModelConfig model_config_from_json(const json& j) {
  model::ModelConfig c;
  try {
    c.widths = j.at("widths").get<std::array<std::size_t, 3>>();
    c.heads = j.at("heads").get<std::size_t>();
    c.cond_dim = j.at("cond_dim").get<std::size_t>();
    c.encoder_widths = j.at("encoder_widths").get<std::array<std::size_t, 2>>();
    c.framework_conditioning = j.at("framework_conditioning").get<bool>();
  } catch (const json::exception& e) {
    throw IoError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string encode_model(const ModelFile& file) {
  file.params.validate();
  const auto layout = model::param_layout(file.params.config);
  json header;
  header["format"] = kModelMagic;
  header["config"] = to_json(file.params.config);
  header["seed"] = file.seed;
  header["extra"] = file.extra;
  json tensors = json::array();
  for (const auto& spec : layout) tensors.push_back({{"name", spec.name}, {"shape", {spec.rows, spec.cols}}});
  header["tensors"] = std::move(tensors);
  const std::string text = header.dump();

  std::string out(kModelMagic, kMagicSize);
  put_u64(out, text.size());
  out += text;
  for (const auto& t : file.params.tensors) {
    for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

ModelFile decode_model(const std::string& bytes) {
  if (bytes.size() < kMagicSize || bytes.compare(0, kMagicSize, kModelMagic) != 0) {
    throw IoError("not a model container (magic mismatch)");
  }
  if (bytes.size() < kMagicSize + 8) throw IoError("model container truncated inside the header length");
  const std::uint64_t header_size = get_u64(bytes.data() + kMagicSize);
  const std::size_t body = kMagicSize + 8;
  if (header_size > bytes.size() - body) throw IoError("model container truncated inside the JSON header");
  json header;
  try {
    header = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(body),
                         bytes.begin() + static_cast<std::ptrdiff_t>(body + header_size));
  } catch (const json::exception& e) {
    throw IoError(std::string("model header: ") + e.what());
  }
  ModelFile file;
  file.params.config = model_config_from_json(header.at("config"));
  file.seed = header.value("seed", std::uint64_t{0});
  file.extra = header.value("extra", json::object());
  const auto layout = model::param_layout(file.params.config);
  const json& declared = header.at("tensors");
  if (!declared.is_array() || declared.size() != layout.size()) {
    throw ShapeError("model header declares " + std::to_string(declared.size()) + " tensors, config implies " +
                     std::to_string(layout.size()));
  }
  std::size_t offset = body + header_size;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const auto shape = declared[k].at("shape").get<std::array<std::size_t, 2>>();
    if (shape[0] != layout[k].rows || shape[1] != layout[k].cols) {
      throw ShapeError("tensor " + layout[k].name + " declared " + std::to_string(shape[0]) + "x" +
                       std::to_string(shape[1]) + ", config implies " + std::to_string(layout[k].rows) + "x" +
                       std::to_string(layout[k].cols));
    }
    ad::Array t(shape[0], shape[1]);
    if (bytes.size() - offset < 8 * t.size()) {
      throw IoError("model container truncated in tensor " + layout[k].name);
    }
    for (std::size_t i = 0; i < t.size(); ++i, offset += 8) t[i] = std::bit_cast<double>(get_u64(bytes.data() + offset));
    file.params.tensors.push_back(std::move(t));
  }
  if (offset != bytes.size()) {
    throw ShapeError("model container has " + std::to_string(bytes.size() - offset) + " bytes beyond the declared tensors");
  }
  return file;
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  const std::string bytes = encode_model(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_model(buf.str());
}

}  // namespace abode::io
