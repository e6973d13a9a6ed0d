#pragma once

#include <iosfwd>
#include <string>

#include "fractalscape/policies.hpp"

namespace fractalscape {

/// Text format: one header line
///
///   # fractalscape-theta p=<count> policy=<kind> n=<state dim> m=<action dim> r=<hidden> beta=<beta>
///
/// followed by one comma-separated row of p values printed with 17
/// significant digits, so write -> read reproduces every bit.
void write_theta(std::ostream& out, const ParamVector& theta);
void write_theta(const std::string& path, const ParamVector& theta);

/// Throws Error(layout_mismatch) on an empty file, a missing or malformed
/// header, or a value count that disagrees with the header.
ParamVector read_theta(std::istream& in);
ParamVector read_theta(const std::string& path);

/// Comma-separated list of numbers ("1.5" or "0.1,-2,3").
std::vector<double> parse_number_list(const std::string& text);

}  // namespace fractalscape
