#include "splitree/error.hpp"

namespace splitree {

const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::config: return "config";
    case Errc::domain: return "domain";
    case Errc::out_of_table: return "out_of_table";
    case Errc::unsupported: return "unsupported";
    case Errc::integrity: return "integrity";
    case Errc::not_identifiable: return "not_identifiable";
    case Errc::empty: return "empty";
    case Errc::io: return "io";
    case Errc::ambiguity: return "ambiguity";
  }
  return "unknown";
}

}  // namespace splitree
