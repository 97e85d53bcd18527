#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oltae {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Fewer than three correspondences: the attitude system is underdetermined.
class TooFewCorrespondences : public Error {
public:
    explicit TooFewCorrespondences(std::size_t n)
        : Error("need at least 3 correspondences, got " + std::to_string(n)), count(n) {}
    std::size_t count;
};

/// Normal matrix singular or condition number beyond the trust gate
/// (collinear or otherwise degenerate point geometry).
class DegenerateGeometry : public Error {
public:
    explicit DegenerateGeometry(const std::string& msg) : Error(msg) {}
};

class SingularMatrix : public Error {
public:
    SingularMatrix(const std::string& msg, double det)
        : Error(msg + " (det = " + std::to_string(det) + ")"), determinant(det) {}
    double determinant;
};

/// 180-degree rotation: I + R is singular, the Gibbs vector is unbounded.
class SingularRotation : public Error {
public:
    explicit SingularRotation(const std::string& msg) : Error(msg) {}
};

class NotARotation : public Error {
public:
    explicit NotARotation(const std::string& msg) : Error(msg) {}
};

class DivideByZero : public Error {
public:
    explicit DivideByZero(const std::string& msg) : Error(msg) {}
};

class DegenerateInput : public Error {
public:
    explicit DegenerateInput(const std::string& msg) : Error(msg) {}
};

class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line_no, std::size_t column_no = 0)
        : Error(msg + " (line " + std::to_string(line_no) +
                (column_no ? ", column " + std::to_string(column_no) : std::string()) + ")"),
          line(line_no),
          column(column_no) {}
    std::size_t line;
    std::size_t column;
};

class ValidationError : public Error {
public:
    ValidationError(const std::string& msg, std::size_t record_no)
        : Error(msg + " (record " + std::to_string(record_no) + ")"), record(record_no) {}
    std::size_t record;
};

/// Register/state-machine contract broken (start outside IDLE, read before DONE).
class ProtocolViolation : public Error {
public:
    explicit ProtocolViolation(const std::string& msg) : Error(msg) {}
};

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace oltae
