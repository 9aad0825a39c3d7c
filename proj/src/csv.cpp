#include "planecontrol/csv.hpp"

#include <cmath>
#include <locale>
#include <ostream>
#include <sstream>

namespace planecontrol {

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(17);
  s << v;
  return s.str();
}

void write_field_csv(std::ostream& out, const Field2D& field, const std::string& name) {
  const GridSpec& g = field.grid();
  out << "t,x," << name << '\n';
  for (int i = 0; i < field.rows(); ++i) {
    for (int j = 0; j < field.cols(); ++j) {
      out << csv_number(g.t(i)) << ',' << csv_number(g.x(j)) << ',' << csv_number(field(i, j))
          << '\n';
    }
  }
}

}  // namespace planecontrol
