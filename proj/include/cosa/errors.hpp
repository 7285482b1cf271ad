#ifndef COSA_ERRORS_HPP
#define COSA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cosa {

// Dimension mismatch between operands; message names both shapes.
class shape_error : public std::invalid_argument {
public:
  explicit shape_error(const std::string& what) : std::invalid_argument(what) {}
};

// Iterative routine failed to converge or produced an ill-conditioned system.
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed adapter/report file (bad magic, version, or checksum).
class format_error : public std::runtime_error {
public:
  explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cosa

#endif
