#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace carlab {

/// %.17g, with "inf", "-inf" and "nan" spelled out.
std::string fmt17(double v);

/// 64-bit FNV-1a
std::uint64_t fnv1a(std::string_view bytes);

std::string hex64(std::uint64_t v);

// Minimal CSV table: header plus rows of preformatted cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string str() const;
};

}  // namespace carlab
