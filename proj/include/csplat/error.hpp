#pragma once

#include <stdexcept>
#include <string>

namespace csplat {

enum class ErrorKind {
    InvalidParameter,
    BehindCamera,
    DegenerateSplat,
    CameraInside,
    NonEllipseConic,
    IllConditioned,
    RenderNonFinite,
    OracleBracketing,
    DimensionMismatch,
    Divergence,
    ParseError,
    IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace csplat
