#pragma once

// Frequency expressions such as "8pi", "1024pi+pi", "8pi+pi/64" or "25.1327".
// A term is [number]["pi"]["/" number]; terms are joined by + or -. Multiples
// of pi are summed before multiplying by pi.

#include <string>
#include <vector>

namespace samdde {

double parse_omega(const std::string& text);

/// Comma-separated expressions, or the name of a built-in list.
std::vector<double> parse_omega_list(const std::string& text);

/// tab4: 25..3200; tab2, tab3, gene: 8pi..1024pi; h2: 8pi..512pi;
/// noh2: 8pi+pi/64, 16pi+pi/32, ..., 512pi+pi.
bool is_builtin_omega_list(const std::string& name);
std::vector<double> builtin_omega_list(const std::string& name);
std::vector<std::string> builtin_omega_list_names();

}  // namespace samdde
