#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wcea {

// Base class for everything the analyzer can report to a caller. The
// driver maps subclasses to exit codes (config errors vs. analysis
// errors vs. exceeded solver budget).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class LoadError : public Error {
public:
  using Error::Error;
};

// Undefined or truncated encoding. Carries the raw halfword(s).
class DecodeError : public Error {
public:
  DecodeError(const std::string& msg, uint32_t addr, uint16_t hw1, uint16_t hw2 = 0)
      : Error(msg), addr(addr), hw1(hw1), hw2(hw2) {}
  uint32_t addr;
  uint16_t hw1;
  uint16_t hw2;
};

// Unaligned or unmapped instruction address.
class AddressError : public Error {
public:
  AddressError(const std::string& msg, uint32_t addr) : Error(msg), addr(addr) {}
  uint32_t addr;
};

class AnnotationError : public Error {
public:
  AnnotationError(const std::string& msg, int line = 0, int column = 0)
      : Error(msg), line(line), column(column) {}
  int line;
  int column;
};

class CfgError : public Error {
public:
  using Error::Error;
};

class UnboundedLoopError : public Error {
public:
  UnboundedLoopError(const std::string& msg, uint32_t head_addr)
      : Error(msg), head_addr(head_addr) {}
  uint32_t head_addr;
};

class ModelError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class AnalysisError : public Error {
public:
  using Error::Error;
};

}  // namespace wcea
