// Writes the built-in fixtures as framework JSON files into a directory.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rigidity/rigidity.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path dir = argc > 1 ? argv[1] : "data";
  fs::create_directories(dir);
  const std::pair<const char*, rigidity::Framework> fixtures[] = {
      {"triangle.json", rigidity::make_triangle()},
      {"collinear_chain.json", rigidity::make_collinear_chain()},
      {"fourbar.json", rigidity::make_fourbar()},
      {"double_watt.json", rigidity::make_double_watt()},
      {"double_watt_unit.json", rigidity::make_double_watt(1.0)},
  };
  for (const auto& [name, f] : fixtures) {
    std::ofstream out(dir / name);
    out << rigidity::dump_json(rigidity::framework_to_json(f)) << '\n';
    if (!out) {
      std::cerr << "cannot write " << (dir / name) << '\n';
      return 1;
    }
  }
  return 0;
}
