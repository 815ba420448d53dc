#include "ssvd/errors.hpp"

namespace ssvd {

FormatError::FormatError(const std::string& what, std::uint64_t offset)
    : DataError(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

}  // namespace ssvd
