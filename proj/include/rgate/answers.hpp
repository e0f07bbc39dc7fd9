#pragma once

#include <optional>
#include <string>

#include "rgate/config.hpp"

namespace rgate {

std::string trim_copy(const std::string& s);

// Pulls the model's final answer out of a completion: the content of the last
// complete <answer>...</answer> span, else the content of the last
// brace-balanced \boxed{...} span, else nothing.
std::optional<std::string> extract_answer(const std::string& text);

// Canonical form of an integer literal: whitespace and thousands separators
// stripped, sign normalized, leading zeros removed. Empty optional when the
// text is not an integer.
std::optional<std::string> normalize_integer_text(const std::string& text);

// Missing extraction grades false. integer compares normalized values;
// string/multiple_choice compare case-insensitively after trimming; free_form
// requires exact trimmed equality.
bool grade(const std::optional<std::string>& extracted, const std::string& gold,
           AnswerKind kind);

}  // namespace rgate
