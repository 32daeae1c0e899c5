//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_ERROR_H_
#define SCAFFKIT_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scaffkit {

class Error: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError: public Error {
public:
  ParseError(const std::string &what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) { }

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class SerializationError: public Error {
public:
  using Error::Error;
};

class WidthMismatch: public Error {
public:
  using Error::Error;
};

class DegenerateInput: public Error {
public:
  using Error::Error;
};

class ShapeMismatch: public Error {
public:
  using Error::Error;
};

class ProtocolError: public Error {
public:
  using Error::Error;
};

class DegenerateData: public Error {
public:
  using Error::Error;
};

class DegenerateLabels: public Error {
public:
  using Error::Error;
};

class EmptyCandidates: public Error {
public:
  using Error::Error;
};

class IoError: public Error {
public:
  using Error::Error;
};

class HeaderError: public Error {
public:
  using Error::Error;
};

class TooFewScaffolds: public Error {
public:
  using Error::Error;
};

class ConfigError: public Error {
public:
  using Error::Error;
};

}  // namespace scaffkit

#endif  // SCAFFKIT_ERROR_H_
