#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "gistill/error.hpp"
#include "gistill/mat.hpp"

namespace gistill {

namespace binio {

// Explicit little-endian float32 codec so files are bit-exact across hosts.
inline void put_f32le(std::string& out, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  out.push_back(static_cast<char>(u & 0xff));
  out.push_back(static_cast<char>((u >> 8) & 0xff));
  out.push_back(static_cast<char>((u >> 16) & 0xff));
  out.push_back(static_cast<char>((u >> 24) & 0xff));
}

inline float get_f32le(const unsigned char* p) {
  std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                    (static_cast<std::uint32_t>(p[1]) << 8) |
                    (static_cast<std::uint32_t>(p[2]) << 16) |
                    (static_cast<std::uint32_t>(p[3]) << 24);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::MissingPath, path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::IoError, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorKind::IoError, "short write to " + path);
}

}  // namespace binio

// T x N decoder cross-attention matrix for one document: rows are decoding
// steps, columns source positions. Every row is a distribution.
struct AttentionTrace {
  std::string doc_id;
  Mat<float> matrix;  // t_steps x n

  int t_steps() const { return matrix.rows; }
  int n() const { return matrix.cols; }
};

constexpr double kRowSumTolerance = 1e-5;

inline void validate_trace(const AttentionTrace& trace) {
  if (trace.matrix.rows < 1 || trace.matrix.cols < 1)
    raise(ErrorKind::EmptyTrace, "trace " + trace.doc_id + " has empty shape");
  for (int r = 0; r < trace.matrix.rows; ++r) {
    double sum = 0;
    for (int c = 0; c < trace.matrix.cols; ++c) {
      const double v = trace.matrix.at(r, c);
      if (!(v >= -1e-7 && v <= 1.0 + 1e-7))
        raise(ErrorKind::RowNotStochastic,
              "trace " + trace.doc_id + " row " + std::to_string(r) +
                  " has entry outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      raise(ErrorKind::RowNotStochastic,
            "trace " + trace.doc_id + " row " + std::to_string(r) + " sums to " +
                std::to_string(sum));
  }
}

// File layout: 8-byte magic "GISTTRC1", one JSON header line
// {"doc_id","T","N","dtype":"f32le"}, then T*N*4 bytes row-major payload.
inline constexpr char kTraceMagic[] = "GISTTRC1";

inline void write_trace(const AttentionTrace& trace, const std::string& path) {
  validate_trace(trace);
  nlohmann::json header = {{"doc_id", trace.doc_id},
                           {"T", trace.t_steps()},
                           {"N", trace.n()},
                           {"dtype", "f32le"}};
  std::string bytes(kTraceMagic, 8);
  bytes += header.dump();
  bytes += '\n';
  bytes.reserve(bytes.size() + trace.matrix.size() * 4);
  for (float v : trace.matrix.a) binio::put_f32le(bytes, v);
  binio::write_file(path, bytes);
}

inline AttentionTrace read_trace(const std::string& path) {
  const std::string bytes = binio::read_file(path);
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kTraceMagic, 8) != 0)
    raise(ErrorKind::BadMagic, path + ": not a trace file");
  const std::size_t nl = bytes.find('\n', 8);
  if (nl == std::string::npos)
    raise(ErrorKind::MalformedHeader, path + ": missing header line");
  nlohmann::json header =
      nlohmann::json::parse(bytes.substr(8, nl - 8), nullptr, false);
  if (header.is_discarded() || !header.contains("doc_id") ||
      !header.contains("T") || !header.contains("N") ||
      header.value("dtype", "") != "f32le")
    raise(ErrorKind::MalformedHeader, path + ": bad header");
  const long t = header.at("T").get<long>();
  const long n = header.at("N").get<long>();
  if (t < 1 || n < 1) raise(ErrorKind::MalformedHeader, path + ": bad shape");

  const std::size_t payload = bytes.size() - nl - 1;
  const std::size_t expected = static_cast<std::size_t>(t) * n * 4;
  if (payload != expected) {
    // A clean float grid with a different column count is a shape error;
    // anything short of that is a truncated payload.
    const bool grid = payload % 4 == 0 && (payload / 4) % t == 0;
    if (grid || payload > expected)
      raise(ErrorKind::ShapeMismatch,
            path + ": header declares " + std::to_string(expected) +
                " payload bytes, file holds " + std::to_string(payload));
    raise(ErrorKind::TruncatedPayload,
          path + ": payload ends after " + std::to_string(payload) + " of " +
              std::to_string(expected) + " bytes");
  }

  AttentionTrace trace;
  trace.doc_id = header.at("doc_id").get<std::string>();
  trace.matrix = Mat<float>(static_cast<int>(t), static_cast<int>(n));
  const unsigned char* p =
      reinterpret_cast<const unsigned char*>(bytes.data()) + nl + 1;
  for (std::size_t i = 0; i < trace.matrix.size(); ++i)
    trace.matrix.a[i] = binio::get_f32le(p + i * 4);
  validate_trace(trace);
  return trace;
}

}  // namespace gistill
