#pragma once

#include <cstring>
#include <json.hpp>
#include <string>
#include <vector>

#include "gistill/error.hpp"
#include "gistill/nn.hpp"
#include "gistill/trace.hpp"
#include "gistill/vocab.hpp"

namespace gistill {

// File layout: 8-byte magic "GISTCKP1", one JSON header line carrying the
// model kind, config echo, vocabulary and per-tensor shapes in declared
// order, then concatenated f32le tensors.
inline constexpr char kCheckpointMagic[] = "GISTCKP1";

struct Checkpoint {
  std::string kind;
  nlohmann::json config;
  std::vector<std::string> vocab_tokens;
  ParamStore<float> params;
};

inline void save_checkpoint(const std::string& path, const std::string& kind,
                            const nlohmann::json& config,
                            const std::vector<std::string>& vocab_tokens,
                            const ParamStore<float>& params) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, m] : params.entries())
    tensors.push_back({{"name", name}, {"rows", m.rows}, {"cols", m.cols}});
  nlohmann::json header = {{"kind", kind},
                           {"config", config},
                           {"vocab", vocab_tokens},
                           {"tensors", tensors},
                           {"dtype", "f32le"}};
  std::string bytes(kCheckpointMagic, 8);
  bytes += header.dump();
  bytes += '\n';
  for (const auto& [name, m] : params.entries())
    for (float v : m.a) binio::put_f32le(bytes, v);
  binio::write_file(path, bytes);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  const std::string bytes = binio::read_file(path);
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0)
    raise(ErrorKind::BadMagic, path + ": not a checkpoint file");
  const std::size_t nl = bytes.find('\n', 8);
  if (nl == std::string::npos)
    raise(ErrorKind::MalformedHeader, path + ": missing header line");
  nlohmann::json header =
      nlohmann::json::parse(bytes.substr(8, nl - 8), nullptr, false);
  if (header.is_discarded() || !header.contains("kind") ||
      !header.contains("tensors") || header.value("dtype", "") != "f32le")
    raise(ErrorKind::MalformedHeader, path + ": bad header");

  Checkpoint ckpt;
  ckpt.kind = header.at("kind").get<std::string>();
  ckpt.config = header.value("config", nlohmann::json::object());
  if (header.contains("vocab"))
    ckpt.vocab_tokens = header.at("vocab").get<std::vector<std::string>>();

  std::size_t expected = 0;
  for (const auto& t : header.at("tensors"))
    expected += static_cast<std::size_t>(t.at("rows").get<long>()) *
                t.at("cols").get<long>() * 4;
  const std::size_t payload = bytes.size() - nl - 1;
  if (payload < expected)
    raise(ErrorKind::TruncatedPayload,
          path + ": payload ends after " + std::to_string(payload) + " of " +
              std::to_string(expected) + " bytes");
  if (payload > expected)
    raise(ErrorKind::ShapeMismatch,
          path + ": payload holds " + std::to_string(payload - expected) +
              " bytes beyond declared tensors");

  const unsigned char* p =
      reinterpret_cast<const unsigned char*>(bytes.data()) + nl + 1;
  for (const auto& t : header.at("tensors")) {
    const int rows = t.at("rows").get<int>();
    const int cols = t.at("cols").get<int>();
    Mat<float> m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.a[i] = binio::get_f32le(p + i * 4);
    p += m.size() * 4;
    ckpt.params.add(t.at("name").get<std::string>(), std::move(m));
  }
  return ckpt;
}

}  // namespace gistill
