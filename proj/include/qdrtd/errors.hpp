#ifndef QDRTD_ERRORS_HPP
#define QDRTD_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace qdrtd {

// bad input: unknown material, malformed config, out-of-range argument
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// iterative solver failed to converge; carries the residual history
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, std::vector<double> residuals)
        : std::runtime_error(what), residual_history(std::move(residuals)) {}
    std::vector<double> residual_history;
};

// energy grid does not cover the supply-function support
class coverage_error : public std::runtime_error {
public:
    coverage_error(const std::string& what, double missing_from_eV, double missing_to_eV)
        : std::runtime_error(what), missing_from(missing_from_eV), missing_to(missing_to_eV) {}
    double missing_from;
    double missing_to;
};

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qdrtd

#endif
