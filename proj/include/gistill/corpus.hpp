#pragma once

#include <fstream>
#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "gistill/error.hpp"

namespace gistill {

struct ClassificationRecord {
  std::string id;
  std::string text;
  int label = 0;
};

struct SummarizationRecord {
  std::string id;
  std::string article;
  std::string summary;
};

struct QaPassageRecord {
  std::string text;
  bool has_answer = false;
  std::vector<std::pair<int, int>> answer_spans;  // inclusive token ranges
};

struct QaRecord {
  std::string id;
  std::string question;
  std::vector<QaPassageRecord> passages;
};

namespace detail {

inline std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::MissingPath, path);
  std::vector<nlohmann::json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      raise(ErrorKind::InvalidArgument,
            path + ":" + std::to_string(lineno) + ": not valid JSON");
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace detail

inline std::vector<ClassificationRecord> read_classification_jsonl(
    const std::string& path) {
  std::vector<ClassificationRecord> out;
  for (const auto& j : detail::read_jsonl(path)) {
    ClassificationRecord r;
    r.id = j.at("id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.label = j.at("label").get<int>();
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<SummarizationRecord> read_summarization_jsonl(
    const std::string& path) {
  std::vector<SummarizationRecord> out;
  for (const auto& j : detail::read_jsonl(path)) {
    SummarizationRecord r;
    r.id = j.at("id").get<std::string>();
    r.article = j.at("article").get<std::string>();
    r.summary = j.at("summary").get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<QaRecord> read_qa_jsonl(const std::string& path) {
  std::vector<QaRecord> out;
  for (const auto& j : detail::read_jsonl(path)) {
    QaRecord r;
    r.id = j.at("id").get<std::string>();
    r.question = j.at("question").get<std::string>();
    for (const auto& p : j.at("passages")) {
      QaPassageRecord pr;
      pr.text = p.at("text").get<std::string>();
      pr.has_answer = p.at("has_answer").get<bool>();
      if (p.contains("answer_spans"))
        for (const auto& s : p.at("answer_spans"))
          pr.answer_spans.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
      r.passages.push_back(std::move(pr));
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_jsonl(const std::string& path,
                        const std::vector<nlohmann::json>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::IoError, "cannot open " + path + " for writing");
  for (const auto& j : records) out << j.dump() << "\n";
}

inline void write_summarization_jsonl(const std::string& path,
                                      const std::vector<SummarizationRecord>& rs) {
  std::vector<nlohmann::json> js;
  js.reserve(rs.size());
  for (const auto& r : rs)
    js.push_back({{"id", r.id}, {"article", r.article}, {"summary", r.summary}});
  write_jsonl(path, js);
}

inline void write_classification_jsonl(const std::string& path,
                                       const std::vector<ClassificationRecord>& rs) {
  std::vector<nlohmann::json> js;
  js.reserve(rs.size());
  for (const auto& r : rs)
    js.push_back({{"id", r.id}, {"text", r.text}, {"label", r.label}});
  write_jsonl(path, js);
}

inline void write_qa_jsonl(const std::string& path, const std::vector<QaRecord>& rs) {
  std::vector<nlohmann::json> js;
  js.reserve(rs.size());
  for (const auto& r : rs) {
    nlohmann::json passages = nlohmann::json::array();
    for (const auto& p : r.passages) {
      nlohmann::json spans = nlohmann::json::array();
      for (const auto& [s, e] : p.answer_spans) spans.push_back({s, e});
      passages.push_back(
          {{"text", p.text}, {"has_answer", p.has_answer}, {"answer_spans", spans}});
    }
    js.push_back({{"id", r.id}, {"question", r.question}, {"passages", passages}});
  }
  write_jsonl(path, js);
}

}  // namespace gistill
