// Copyright 2026 The nasklab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nask/npy.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace nask {

void save_npy(const std::string& path, const Tensor& t) {
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(t.h) + ", " + std::to_string(t.w) +
                       ", " + std::to_string(t.c) + "), }";
  // pad so magic + header is a multiple of 64 bytes
  const size_t base = 10 + header.size() + 1;
  header.append((64 - base % 64) % 64, ' ');
  header.push_back('\n');

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_npy: cannot open " + path);
  f.write("\x93NUMPY\x01\x00", 8);
  const uint16_t hlen = static_cast<uint16_t>(header.size());
  f.put(static_cast<char>(hlen & 0xff));
  f.put(static_cast<char>(hlen >> 8));
  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  f.write(reinterpret_cast<const char*>(t.v.data()),
          static_cast<std::streamsize>(t.v.size() * sizeof(double)));
}

}  // namespace nask
