#include "spellkit/types.hpp"

#include <stdexcept>

namespace spellkit {

const char* variable_name(Variable v) {
  switch (v) {
    case Variable::it: return "it";
    case Variable::ws: return "ws";
    case Variable::ds: return "ds";
    case Variable::wch: return "wch";
    case Variable::dch: return "dch";
  }
  throw std::invalid_argument("unknown variable");
}

Variable variable_from_name(std::string_view name) {
  if (name == "it") return Variable::it;
  if (name == "ws") return Variable::ws;
  if (name == "ds") return Variable::ds;
  if (name == "wch") return Variable::wch;
  if (name == "dch") return Variable::dch;
  throw std::invalid_argument("unknown variable name: " + std::string(name));
}

}  // namespace spellkit
