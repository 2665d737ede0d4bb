#pragma once

#include <string>
#include <string_view>

namespace imgquiz {

// Lowercase hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view bytes);

// Incremental digest over length-prefixed fields, so ("ab","c") != ("a","bc").
class FieldHasher {
 public:
  FieldHasher& add(std::string_view field);
  FieldHasher& add_null();
  std::string hex() const;

 private:
  std::string buffer_;
};

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view encoded);

}  // namespace imgquiz
