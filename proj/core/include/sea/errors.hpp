#pragma once

#include <stdexcept>
#include <string>

namespace sea {

// Error taxonomy shared by the whole library. The CLI maps ConfigError to
// exit code 2 and every other failure to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };    // bad config key/value
struct LoadError : Error { using Error::Error; };      // dataset root unusable
struct SchemaError : Error { using Error::Error; };    // a record violates the schema
struct ShapeError : Error { using Error::Error; };     // tensor dimension mismatch
struct InputError : Error { using Error::Error; };     // degenerate operation input
struct DataError : Error { using Error::Error; };      // dataset content problem
struct MetricError : Error { using Error::Error; };    // undefined metric case
struct TemplateError : Error { using Error::Error; };  // caption template invalid
struct TrainError : Error { using Error::Error; };     // training aborted
struct IoError : Error { using Error::Error; };        // file read/write failure

}  // namespace sea
