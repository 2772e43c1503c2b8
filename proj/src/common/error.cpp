#include "facial/common/error.hpp"

namespace facial {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::bad_magic: return "bad_magic";
    case ErrorKind::bad_header: return "bad_header";
    case ErrorKind::truncated: return "truncated";
    case ErrorKind::dim_mismatch: return "dim_mismatch";
    case ErrorKind::shape_mismatch: return "shape_mismatch";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::empty_selection: return "empty_selection";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::config: return "config";
    case ErrorKind::stage_order: return "stage_order";
    }
    return "unknown";
}

} // namespace facial
