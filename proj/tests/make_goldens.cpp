// Copyright 2026 The facesweep Authors
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

// Regenerates tests/golden/*.ppm. Run only when a rendering change is intended.

#include <cstdio>
#include <filesystem>

#include "scenes.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_goldens <dir>\n");
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  for (const auto& scene : facesweep::testing::golden_scenes()) {
    const auto image = facesweep::render_mesh(scene.mesh, scene.camera, scene.light);
    facesweep::write_pnm(facesweep::to_rgb(image), dir / (scene.name + ".ppm"));
    std::printf("%s\n", (dir / (scene.name + ".ppm")).c_str());
  }
  return 0;
}
