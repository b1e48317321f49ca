// Copyright 2026 The Lewis Authors. All Rights Reserved.
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

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lewis/toy.hpp"

int main(int argc, char** argv) {
  CLI::App app{"lewis-toy: writes the synthetic two-style review corpus"};
  std::string out_dir;
  std::uint64_t seed = 7;
  lewis::toy::ToySizes sizes;
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--train", sizes.train, "train sentences per style");
  app.add_option("--valid", sizes.valid, "validation sentences per style");
  app.add_option("--test", sizes.test, "test sentences per style");
  app.add_option("--evalcls", sizes.evalcls, "evaluation-classifier sentences per style");
  CLI11_PARSE(app, argc, argv);
  try {
    lewis::toy::write_corpus(out_dir, seed, sizes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
