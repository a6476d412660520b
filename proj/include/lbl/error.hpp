#ifndef LBL_ERROR_HPP
#define LBL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lbl {

/// Invalid argument or configuration (CLI exit code 1).
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a function.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Root bracketing, iteration or quadrature failure (CLI exit code 2).
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lbl

#endif
