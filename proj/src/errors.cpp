#include "lsl/types.hpp"

#include <sstream>

namespace lsl {

namespace {

std::string shift_message(double lambda, double cond) {
    std::ostringstream os;
    os.precision(6);
    os << "shift too close to spectrum: lambda = " << lambda << ", condition estimate = " << cond;
    return os.str();
}

std::string parse_message(const std::string& file, std::size_t line, const std::string& field,
                          const std::string& what) {
    std::ostringstream os;
    os << file << ":" << line;
    if (!field.empty()) os << " [" << field << "]";
    os << ": " << what;
    return os.str();
}

}  // namespace

ShiftTooCloseToSpectrum::ShiftTooCloseToSpectrum(double lambda, double cond_estimate)
    : Error("forward_solver", shift_message(lambda, cond_estimate)),
      lambda_(lambda),
      cond_(cond_estimate) {}

ParseError::ParseError(std::string file, std::size_t line, std::string field,
                       const std::string& what)
    : Error("parse", parse_message(file, line, field, what)), line_(line), field_(std::move(field)) {}

}  // namespace lsl
