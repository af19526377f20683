#ifndef TOHM_FIELD_IO_HPP
#define TOHM_FIELD_IO_HPP

#include <string>

#include "tohm/lattice.hpp"

namespace tohm {

/// Plain-text field format, self-describing (the lattice travels with the
/// values):
///
///   # tohm-field v1 dims=D
///   # axis 1 <coordinates, strictly increasing>
///   ...                                 (one line per axis)
///   # axis D <coordinates>
///   # mask                              (optional)
///   <R_1*...*R_D 0/1 tokens, row-major> (only when # mask is present)
///   <value>                             (R values, row-major over included
///   ...                                  points; decimal or scientific)
///
/// Values are written with enough digits to round-trip doubles bit-exactly.
FieldSample load_field(const std::string& path);
void save_field(const FieldSample& field, const std::string& path);

/// Formats one double with round-trip precision (%.17g); shared by every
/// writer so identical numbers always produce identical bytes.
std::string format_double(double x);

}  // namespace tohm

#endif
