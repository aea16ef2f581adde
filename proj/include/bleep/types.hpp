#ifndef BLEEP_TYPES_HPP
#define BLEEP_TYPES_HPP

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

/**
 * @file types.hpp
 *
 * @brief Dense matrix aliases and the error hierarchy shared by every module.
 */

namespace bleep {

/**
 * Row-major dense matrix, templated on the scalar.
 * All storage in the library is `Matrix<float>`; `Matrix<double>` is used for gradient checks.
 */
template<typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template<typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template<typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using DenseMatrix = Matrix<float>;
using Index = Eigen::Index;

/**
 * Category of a failure, mapped one-to-one onto CLI exit codes.
 */
enum class ErrorKind {
    usage = 2,
    io = 3,
    validation = 4,
    numerical = 5
};

inline const char* kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::usage: return "usage";
        case ErrorKind::io: return "io";
        case ErrorKind::validation: return "validation";
        case ErrorKind::numerical: return "numerical";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), my_kind(kind) {}
    ErrorKind kind() const { return my_kind; }
private:
    ErrorKind my_kind;
};

/**
 * Operand dimensions do not fit together. Reported as a validation failure.
 */
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& message) : Error(ErrorKind::validation, message) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error(ErrorKind::validation, message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(ErrorKind::io, message) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& message) : Error(ErrorKind::numerical, message) {}
};

template<class Derived>
std::string shape_string(const Eigen::EigenBase<Derived>& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

template<class Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
    return m.allFinite();
}

}

#endif
