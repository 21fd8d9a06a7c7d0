#pragma once

#include <stdexcept>
#include <string>

namespace wfc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document: bad JSON, missing field, wrong type.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed document that breaks a cross-reference or structural rule.
class IntegrityError : public Error {
 public:
  IntegrityError(std::string entity, const std::string& message)
      : Error(message), entity_(std::move(entity)) {}
  const std::string& entity() const noexcept { return entity_; }

 private:
  std::string entity_;
};

class UnknownNameError : public Error {
 public:
  explicit UnknownNameError(std::string name)
      : Error("unknown name: " + name), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class NoPlanError : public Error {
 public:
  using Error::Error;
};

class InstantiationError : public Error {
 public:
  using Error::Error;
};

class ContradictionError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace wfc
