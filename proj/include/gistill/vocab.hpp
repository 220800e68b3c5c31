#pragma once

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "gistill/error.hpp"

namespace gistill {

constexpr int kPadId = 0;
constexpr int kUnkId = 1;

// Dense token <-> id mapping. Id 0 is padding, id 1 is unknown; both always
// present. Bijective over non-reserved entries.
class Vocabulary {
 public:
  Vocabulary() {
    add("<pad>");
    add("<unk>");
  }

  int add(const std::string& token) {
    auto it = token_to_id_.find(token);
    if (it != token_to_id_.end()) return it->second;
    const int id = static_cast<int>(id_to_token_.size());
    token_to_id_[token] = id;
    id_to_token_.push_back(token);
    return id;
  }

  int id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnkId : it->second;
  }

  bool contains(const std::string& token) const {
    return token_to_id_.count(token) > 0;
  }

  const std::string& token(int id) const {
    if (id < 0 || id >= size()) raise(ErrorKind::OutOfRange, "vocabulary id");
    return id_to_token_[id];
  }

  int size() const { return static_cast<int>(id_to_token_.size()); }

  const std::vector<std::string>& tokens() const { return id_to_token_; }

  static Vocabulary from_tokens(const std::vector<std::string>& tokens) {
    Vocabulary v;
    for (const auto& t : tokens) v.add(t);
    return v;
  }

 private:
  std::map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// One tokenized input text of length N (n_tokens). ids[i] indexes the
// vocabulary that produced the document.
struct TokenizedDocument {
  std::string doc_id;
  std::vector<std::string> tokens;
  std::vector<int> ids;

  int n_tokens() const { return static_cast<int>(ids.size()); }
};

// Lowercase + whitespace split, with each punctuation character emitted as
// its own token. Pure function of (text, vocab).
inline std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      out.push_back(std::string(1, static_cast<char>(c)));
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

inline TokenizedDocument tokenize(const std::string& text, const Vocabulary& vocab,
                                  const std::string& doc_id = "") {
  TokenizedDocument doc;
  doc.doc_id = doc_id;
  doc.tokens = split_tokens(text);
  if (doc.tokens.empty())
    raise(ErrorKind::EmptyInput, "tokenize: text empty after normalization");
  doc.ids.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) doc.ids.push_back(vocab.id(t));
  return doc;
}

}  // namespace gistill
