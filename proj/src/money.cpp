#include "citysim/money.hpp"

#include <cstdio>
#include <cstdlib>

namespace citysim {

std::string Money::str() const {
    const std::int64_t whole = std::llabs(cents_) / 100;
    const std::int64_t frac = std::llabs(cents_) % 100;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", cents_ < 0 ? "-" : "", static_cast<long long>(whole),
                  static_cast<long long>(frac));
    return buf;
}

} // namespace citysim
