#pragma once

#include <stdexcept>
#include <string>

namespace rydar {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument value (negative amplitude, mismatched lengths, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Internally inconsistent configuration or generation parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Config file or serialized container violates the expected schema.
class SchemaError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Sample rate too low for the requested bandwidth.
class SamplingError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// RF drive pushes the readout outside its linear range.
class SaturationError : public Error {
 public:
  using Error::Error;
};

// LO and RF carriers are not at the same frequency.
class HomodyneError : public Error {
 public:
  using Error::Error;
};

// LO amplitude too small relative to the RF signal for linear mixing.
class LoRatioError : public Error {
 public:
  using Error::Error;
};

// Waveform exceeds the receiver's instantaneous bandwidth limit.
class BandwidthError : public Error {
 public:
  using Error::Error;
};

// Signal content falls outside the current tuning window.
class ResonanceError : public Error {
 public:
  using Error::Error;
};

// Readout parameters outside the supported accuracy envelope.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

// Trace too short for the requested framing unit.
class FramingError : public Error {
 public:
  using Error::Error;
};

}  // namespace rydar
