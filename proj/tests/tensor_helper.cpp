// Separate process for tensor round trips.
//   tensor_helper copy IN OUT        decode IN, re-encode to OUT
//   tensor_helper gen SEED N DIR     write N seeded tensors as DIR/gen_<i>.hmtf
//   tensor_helper expect SEED N DIR  check DIR/gen_<i>.hmtf against the seeded stream

#include <iostream>
#include <string>

#include "seeded_tensor.hpp"

using namespace hypermaps;

int main(int argc, char** argv) {
  try {
    const std::string mode = argc > 1 ? argv[1] : "";
    if (mode == "copy" && argc == 4) {
      const Tensor t = read_tensor(argv[2]);
      write_tensor(argv[3], t.dims, t.values);
      return 0;
    }
    if (mode == "gen" && argc == 5) {
      const auto seed = std::stoull(argv[2]);
      const int n = std::stoi(argv[3]);
      for (int i = 0; i < n; ++i) {
        const Tensor t = testing::seeded_tensor(seed, i);
        write_tensor(std::filesystem::path(argv[4]) / ("gen_" + std::to_string(i) + ".hmtf"), t.dims, t.values);
      }
      return 0;
    }
    if (mode == "expect" && argc == 5) {
      const auto seed = std::stoull(argv[2]);
      const int n = std::stoi(argv[3]);
      for (int i = 0; i < n; ++i) {
        const Tensor want = testing::seeded_tensor(seed, i);
        const auto got = read_file_bytes(std::filesystem::path(argv[4]) / ("gen_" + std::to_string(i) + ".hmtf"));
        if (got != encode_tensor(want.dims, want.values)) {
          std::cerr << "mismatch at tensor " << i << '\n';
          return 1;
        }
      }
      return 0;
    }
    std::cerr << "usage: tensor_helper copy IN OUT | gen SEED N DIR | expect SEED N DIR\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
