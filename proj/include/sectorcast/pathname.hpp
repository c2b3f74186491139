#pragma once

#include <string>

namespace sectorcast {

// File-name-safe encoding of a document key. Injective: every byte outside
// [A-Za-z0-9_-] (including '%') becomes %XX, so distinct keys never collide.
inline std::string sanitize_component(const std::string& name) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(name.size());
  for (unsigned char c : name) {
    bool safe = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (safe) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

}  // namespace sectorcast
