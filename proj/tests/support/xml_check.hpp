#pragma once

// Minimal well-formedness check: balanced tags, quoted attributes, no stray '<'.

#include <cctype>
#include <string>
#include <vector>

namespace oakit::fixtures {

inline bool well_formed_xml(const std::string& s, std::string* why = nullptr) {
  auto fail = [&](const std::string& w) {
    if (why) *why = w;
    return false;
  };
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool seen_root = false;
  while (i < s.size()) {
    if (s[i] != '<') {
      if (s[i] == '&') {
        const std::size_t semi = s.find(';', i);
        if (semi == std::string::npos || semi - i > 8) return fail("bad entity");
      }
      ++i;
      continue;
    }
    if (s.compare(i, 5, "<?xml") == 0) {
      const std::size_t e = s.find("?>", i);
      if (e == std::string::npos) return fail("unterminated declaration");
      i = e + 2;
      continue;
    }
    if (s.compare(i, 4, "<!--") == 0) {
      const std::size_t e = s.find("-->", i);
      if (e == std::string::npos) return fail("unterminated comment");
      i = e + 3;
      continue;
    }
    const bool closing = i + 1 < s.size() && s[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    std::string name;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '-' || s[j] == ':'))
      name += s[j++];
    if (name.empty()) return fail("empty tag name");
    bool self_closing = false;
    char quote = 0;
    for (; j < s.size(); ++j) {
      const char c = s[j];
      if (quote) {
        if (c == quote) quote = 0;
        else if (c == '<') return fail("'<' inside attribute");
        continue;
      }
      if (c == '"' || c == '\'') quote = c;
      else if (c == '<') return fail("'<' inside tag");
      else if (c == '>') break;
    }
    if (j >= s.size()) return fail("unterminated tag " + name);
    if (s[j - 1] == '/') self_closing = true;
    if (closing) {
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
      stack.pop_back();
    } else if (!self_closing) {
      if (stack.empty() && seen_root) return fail("second root element");
      stack.push_back(name);
      seen_root = true;
    } else {
      seen_root = true;
    }
    i = j + 1;
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
  return seen_root || fail("no root element");
}

}  // namespace oakit::fixtures
