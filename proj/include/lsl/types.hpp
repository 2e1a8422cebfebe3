#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace lsl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Base of every error the library throws. `stage` names the pipeline step
// that failed so the CLI can report it without parsing the message.
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Shifted operator is singular or too badly conditioned to trust.
class ShiftTooCloseToSpectrum : public Error {
public:
    ShiftTooCloseToSpectrum(double lambda, double cond_estimate);

    double lambda() const noexcept { return lambda_; }
    double condition_estimate() const noexcept { return cond_; }

private:
    double lambda_;
    double cond_;
};

class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, std::string field, const std::string& what);

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

inline double relative_frobenius(const Matrix& a, const Matrix& reference) {
    const double denom = reference.norm();
    const double diff = (a - reference).norm();
    return denom > 0.0 ? diff / denom : diff;
}

}  // namespace lsl
