#pragma once

#include <iosfwd>
#include <string>

#include "planecontrol/grid.hpp"

namespace planecontrol {

/// Round-trippable decimal text for a double (17 significant digits, `.`
/// separator, independent of the global locale).
std::string csv_number(double v);

/// Writes `t,x,<name>` rows for a node field, row-major in t then x.
void write_field_csv(std::ostream& out, const Field2D& field, const std::string& name);

}  // namespace planecontrol
