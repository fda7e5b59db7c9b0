// Copyright 2026 The ScrewSplat Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <string>

#include "screwsplat/render.hpp"

namespace screwsplat {

/// 8-bit RGB PNG; channels written as round(255 * clamp(v, 0, 1)).
void write_png(const std::string& path, const Image& image);
Image read_png(const std::string& path);

/// The 8-bit round trip applied to an in-memory image.
Image quantize8(const Image& image);

}  // namespace screwsplat
