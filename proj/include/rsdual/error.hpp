#ifndef RSDUAL_ERROR_HPP
#define RSDUAL_ERROR_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace rsdual
{

enum class ErrorKind {
    InvalidParams,
    NonConvergent,
    PoleHit,
    ShapeMismatch,
    DegenerateInput,
    UnsupportedKind,
    IllConditioned,
    ProbeInconsistent,
    QuadratureDiverged,
};

const char *to_string(ErrorKind kind);

/// Indices of the two coordinates whose difference triggered an error.
/// Coordinates are numbered q_0..q_{N-1} followed by mu_0..mu_{M-1}.
using PairIndex = std::pair<std::size_t, std::size_t>;

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string &what, std::optional<PairIndex> pair = std::nullopt)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), m_kind(kind), m_pair(pair)
    {
    }

    ErrorKind kind() const noexcept { return m_kind; }
    const std::optional<PairIndex> &pair() const noexcept { return m_pair; }

private:
    ErrorKind m_kind;
    std::optional<PairIndex> m_pair;
};

inline const char *to_string(ErrorKind kind)
{
    switch (kind) {
        case ErrorKind::InvalidParams: return "InvalidParams";
        case ErrorKind::NonConvergent: return "NonConvergent";
        case ErrorKind::PoleHit: return "PoleHit";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::UnsupportedKind: return "UnsupportedKind";
        case ErrorKind::IllConditioned: return "IllConditioned";
        case ErrorKind::ProbeInconsistent: return "ProbeInconsistent";
        case ErrorKind::QuadratureDiverged: return "QuadratureDiverged";
    }
    return "Unknown";
}

} // namespace rsdual

#endif
