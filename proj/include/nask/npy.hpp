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

#ifndef NASK_NPY_HPP_
#define NASK_NPY_HPP_

#include <string>

#include "nask/tensor.hpp"

namespace nask {

/// Writes a (h, w, c) tensor as a float64 .npy (format version 1.0), the
/// portable array dump used for AffineField and attention-map debugging.
void save_npy(const std::string& path, const Tensor& t);

}  // namespace nask

#endif  // NASK_NPY_HPP_
