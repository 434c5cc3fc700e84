#ifndef ETBO_ERRORS_HPP
#define ETBO_ERRORS_HPP
#pragma once

#include <stdexcept>
#include <string>

namespace etbo {

    /// Bad configuration or parameter outside its admissible domain.
    class ConfigError : public std::invalid_argument {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// A factorization or sampling step that could not be completed.
    class NumericalError : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    /// File could not be read, parsed or written.
    class IoError : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

} // namespace etbo

#endif // ETBO_ERRORS_HPP
