#pragma once

#include <map>
#include <string>
#include <vector>

namespace irsim {

// Flat tensor container: a text header listing tensor names and shapes,
// followed by the raw little-endian float64 payload in header order.
//
//   irsim-tensors v1
//   tensor <name> <rank> <d0> <d1> ...
//   ...
//   data
//   <raw bytes>
struct NamedTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<double> values;
};

void write_tensor_file(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensor_file(const std::string& path);

} // namespace irsim
