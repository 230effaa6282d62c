#include "beamrl/errors.hpp"

namespace beamrl::detail {

void throw_contract(const std::string& what) { throw ContractViolation(what); }
void throw_config(const std::string& what) { throw ConfigError(what); }

}  // namespace beamrl::detail
