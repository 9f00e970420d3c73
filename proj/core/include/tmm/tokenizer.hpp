#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tmm {

/// Lowercases ASCII letters, splits on whitespace, and splits every ASCII
/// punctuation character off as its own token.
std::vector<std::string> tokenize(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end);

}  // namespace tmm
