#pragma once

#include <stdexcept>
#include <string>

namespace sensi {

/// Base for all toolkit errors. Maps to exit code 1 unless a subclass says otherwise.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad command line or config usage. Exit code 4.
struct UsageError : Error {
    using Error::Error;
};

/// A referenced input file does not exist or cannot be opened. Exit code 2.
struct MissingInputError : Error {
    using Error::Error;
};

/// Schema violations, malformed rows, range/shape/consistency failures. Exit code 3.
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace sensi
