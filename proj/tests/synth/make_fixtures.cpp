// Writes every named fixture as DataMart-style CSV files under <out>/<NAME>/.

#include <filesystem>
#include <iostream>
#include <string>

#include "fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-directory>\n";
    return 2;
  }
  const std::filesystem::path root(argv[1]);
  for (auto name : timberline::synth::kFixtureNames) {
    const auto dir = root / std::string(name);
    std::filesystem::create_directories(dir);
    timberline::writeDatabase(timberline::synth::buildFixture(name), dir);
    std::cout << dir.string() << "\n";
  }
  return 0;
}
