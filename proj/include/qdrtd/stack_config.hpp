#ifndef QDRTD_STACK_CONFIG_HPP
#define QDRTD_STACK_CONFIG_HPP

#include "qdrtd/structure.hpp"

#include <string>

namespace qdrtd {

/// Line-oriented stack description. One layer per line:
///   material thickness_nm doping_start[:doping_end] [role]
/// plus header directives @area_um2, @temperature_K and
///   @qd density_cm2 after_layer_index electrons_max well_nm area_fraction
/// where after_layer_index is the 0-based layer the sheet sits below.
/// '#' starts a comment. Throws config_error with the offending line number.
DeviceStack parse_stack_config(const std::string& text);

/// Canonical form: directives first, then one line per layer, shortest
/// round-trip number formatting. write(parse(write(s))) == write(s).
std::string write_stack_config(const DeviceStack& stack);

DeviceStack load_stack(const std::string& path_or_builtin);  // "reference" = built-in

} // namespace qdrtd

#endif
