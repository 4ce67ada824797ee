#include "l1prune/sparsity.hpp"

#include <charconv>

namespace l1prune {

void validate(const SparsityPattern& pattern) {
  if (const auto* un = std::get_if<Unstructured>(&pattern)) {
    if (!(un->rate > 0.0 && un->rate < 1.0)) {
      throw ParameterError("unstructured rate must lie in (0, 1), got " +
                           std::to_string(un->rate));
    }
    return;
  }
  const auto& semi = std::get<SemiStructured>(pattern);
  if (semi.n == 0 || semi.n >= semi.m) {
    throw ParameterError("semi-structured pattern requires 0 < n < m, got " +
                         std::to_string(semi.n) + ":" + std::to_string(semi.m));
  }
}

namespace {

template <typename T>
T parse_number(std::string_view text, std::string_view whole) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw ParameterError("malformed sparsity pattern '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

SparsityPattern parse_pattern(std::string_view text) {
  constexpr std::string_view kUnstructured = "unstructured:";
  constexpr std::string_view kSemi = "semi:";
  SparsityPattern out;
  if (text.starts_with(kUnstructured)) {
    out = Unstructured{parse_number<double>(text.substr(kUnstructured.size()), text)};
  } else if (text.starts_with(kSemi)) {
    const auto rest = text.substr(kSemi.size());
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
      throw ParameterError("malformed sparsity pattern '" + std::string(text) + "'");
    }
    out = SemiStructured{parse_number<std::size_t>(rest.substr(0, colon), text),
                         parse_number<std::size_t>(rest.substr(colon + 1), text)};
  } else {
    throw ParameterError("unknown sparsity pattern '" + std::string(text) +
                         "' (expected unstructured:<rate> or semi:<n>:<m>)");
  }
  validate(out);
  return out;
}

std::string to_string(const SparsityPattern& pattern) {
  if (const auto* un = std::get_if<Unstructured>(&pattern)) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), un->rate);
    return "unstructured:" + std::string(buf, res.ptr);
  }
  const auto& semi = std::get<SemiStructured>(pattern);
  return "semi:" + std::to_string(semi.n) + ":" + std::to_string(semi.m);
}

}  // namespace l1prune
