#pragma once

#include <stdexcept>
#include <string>

namespace uavmg {

// Data-level failures. The CLI maps anything derived from Error to exit
// code 2; std::invalid_argument from argument validation also lands there.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

// A footprint corner ray never reaches the elevation plane.
class HorizonClip : public DegenerateGeometry {
 public:
  using DegenerateGeometry::DegenerateGeometry;
};

class NoNeighborhood : public Error {
 public:
  using Error::Error;
};

class BehindCamera : public Error {
 public:
  BehindCamera(const std::string& what, int camera, int point)
      : Error(what), camera_(camera), point_(point) {}
  int camera() const { return camera_; }
  int point() const { return point_; }

 private:
  int camera_;
  int point_;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class UnderConstrained : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, std::size_t column,
             const std::string& msg)
      : Error(file + ":" + std::to_string(line) + ":" + std::to_string(column) +
              ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class DuplicateKey : public Error {
 public:
  using Error::Error;
};

}  // namespace uavmg
