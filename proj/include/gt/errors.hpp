#pragma once

#include <stdexcept>
#include <string>

namespace gt {

// Bad inputs / contract violations: wrong shapes, invalid profiles,
// malformed files. CLI maps these to exit code 2.
class validation_error : public std::runtime_error {
  public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures on well-formed inputs: rank deficiency, degeneracy,
// ambiguity, indeterminacy, base-locus hits. CLI maps these to exit code 3.
class numeric_error : public std::runtime_error {
  public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace gt
