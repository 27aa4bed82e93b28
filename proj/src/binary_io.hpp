// SPDX-License-Identifier: Apache-2.0
//
// beamscan: directional 60 GHz channel-sounder simulation and analysis
// Copyright (C) 2026 The beamscan authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef BEAMSCAN_SRC_BINARY_IO_HPP
#define BEAMSCAN_SRC_BINARY_IO_HPP

// Little-endian primitive I/O shared by the pattern and tensor file formats.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace beamscan::detail
{

template <typename T>
void put_le(std::ostream &out, T value)
{
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get_le(std::istream &in, const char *what)
{
    std::array<char, sizeof(T)> bytes{};
    if (!in.read(bytes.data(), sizeof(T)))
        throw std::runtime_error(std::string("truncated file while reading ") + what);
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

inline void put_magic(std::ostream &out, const char (&magic)[5]) { out.write(magic, 4); }

inline void expect_magic(std::istream &in, const char (&magic)[5], const char *what)
{
    std::array<char, 4> got{};
    if (!in.read(got.data(), 4) || std::memcmp(got.data(), magic, 4) != 0)
        throw std::runtime_error(std::string("not a ") + what + " file (bad magic)");
}

} // namespace beamscan::detail

#endif
