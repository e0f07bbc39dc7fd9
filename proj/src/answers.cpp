#include "rgate/answers.hpp"

#include <algorithm>
#include <cctype>

namespace rgate {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lower_copy(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<std::string> last_tag_span(const std::string& text) {
  static const std::string open = "<answer>";
  static const std::string close = "</answer>";
  std::optional<std::string> found;
  size_t pos = 0;
  while (true) {
    size_t start = text.find(open, pos);
    if (start == std::string::npos) break;
    size_t end = text.find(close, start + open.size());
    if (end == std::string::npos) break;
    found = text.substr(start + open.size(), end - start - open.size());
    pos = end + close.size();
  }
  return found;
}

std::optional<std::string> last_boxed_span(const std::string& text) {
  static const std::string marker = "\\boxed{";
  std::optional<std::string> found;
  size_t pos = 0;
  while (true) {
    size_t start = text.find(marker, pos);
    if (start == std::string::npos) break;
    size_t i = start + marker.size();
    int depth = 1;
    while (i < text.size() && depth > 0) {
      if (text[i] == '{') ++depth;
      if (text[i] == '}') --depth;
      ++i;
    }
    if (depth == 0) found = text.substr(start + marker.size(), i - 1 - start - marker.size());
    pos = start + marker.size();
  }
  return found;
}

}  // namespace

std::string trim_copy(const std::string& s) {
  size_t begin = 0;
  while (begin < s.size() && is_space(s[begin])) ++begin;
  size_t end = s.size();
  while (end > begin && is_space(s[end - 1])) --end;
  return s.substr(begin, end - begin);
}

std::optional<std::string> extract_answer(const std::string& text) {
  if (auto span = last_tag_span(text)) return trim_copy(*span);
  if (auto span = last_boxed_span(text)) return trim_copy(*span);
  return std::nullopt;
}

std::optional<std::string> normalize_integer_text(const std::string& text) {
  std::string digits;
  bool negative = false;
  bool seen_sign = false;
  for (char c : text) {
    if (is_space(c) || c == ',') continue;
    if ((c == '-' || c == '+') && !seen_sign && digits.empty()) {
      negative = (c == '-');
      seen_sign = true;
      continue;
    }
    if (c < '0' || c > '9') return std::nullopt;
    digits.push_back(c);
  }
  if (digits.empty()) return std::nullopt;
  size_t first = digits.find_first_not_of('0');
  if (first == std::string::npos) return std::string("0");
  digits = digits.substr(first);
  return negative ? "-" + digits : digits;
}

bool grade(const std::optional<std::string>& extracted, const std::string& gold,
           AnswerKind kind) {
  if (!extracted) return false;
  switch (kind) {
    case AnswerKind::integer: {
      auto a = normalize_integer_text(*extracted);
      auto g = normalize_integer_text(gold);
      return a && g && *a == *g;
    }
    case AnswerKind::string:
    case AnswerKind::multiple_choice:
      return lower_copy(trim_copy(*extracted)) == lower_copy(trim_copy(gold));
    case AnswerKind::free_form:
      return trim_copy(*extracted) == trim_copy(gold);
  }
  return false;
}

}  // namespace rgate
