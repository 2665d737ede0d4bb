#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace imgquiz {

// "https://host:port/path?query" split into the origin httplib wants and the rest.
struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/', includes any query string
};

UrlParts split_url(std::string_view url);

std::string percent_encode(std::string_view s);

using QueryParams = std::vector<std::pair<std::string, std::string>>;

// Parameters in the order given, each key and value percent-encoded.
std::string build_query(const QueryParams& params);

// Inverse of percent_encode; '+' decodes to a space.
std::string percent_decode(std::string_view s);

QueryParams parse_query(std::string_view query);

// scheme://host/path?k=v&... with parameters decoded, sorted and re-encoded,
// so equivalent requests compare equal regardless of parameter order.
std::string canonical_url(std::string_view url);

}  // namespace imgquiz
