#include "irsim/tensorio.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace irsim {

namespace {

constexpr const char* kMagic = "irsim-tensors v1";

std::uint64_t to_le(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof(u));
    if constexpr (std::endian::native == std::endian::big) {
        u = __builtin_bswap64(u);
    }
    return u;
}

double from_le(std::uint64_t u) {
    if constexpr (std::endian::native == std::endian::big) {
        u = __builtin_bswap64(u);
    }
    double v;
    std::memcpy(&v, &u, sizeof(v));
    return v;
}

} // namespace

void write_tensor_file(const std::string& path, const std::vector<NamedTensor>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_tensor_file: cannot open " + path);
    out << kMagic << "\n";
    for (const auto& t : tensors) {
        if (t.name.empty() || t.name.find_first_of(" \n\r\t") != std::string::npos)
            throw std::invalid_argument("write_tensor_file: tensor name must be non-empty, no whitespace");
        size_t n = 1;
        out << "tensor " << t.name << " " << t.shape.size();
        for (int d : t.shape) {
            if (d <= 0) throw std::invalid_argument("write_tensor_file: dims must be positive");
            out << " " << d;
            n *= static_cast<size_t>(d);
        }
        out << "\n";
        if (n != t.values.size())
            throw std::invalid_argument("write_tensor_file: shape does not match value count for " + t.name);
    }
    out << "data\n";
    for (const auto& t : tensors)
        for (double v : t.values) {
            const std::uint64_t u = to_le(v);
            out.write(reinterpret_cast<const char*>(&u), sizeof(u));
        }
    if (!out) throw std::runtime_error("write_tensor_file: write failed for " + path);
}

std::vector<NamedTensor> read_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_tensor_file: cannot open " + path);

    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw std::runtime_error("read_tensor_file: bad magic in " + path);

    std::vector<NamedTensor> tensors;
    while (std::getline(in, line)) {
        if (line == "data") break;
        std::istringstream ss(line);
        std::string kw;
        NamedTensor t;
        size_t rank = 0;
        if (!(ss >> kw >> t.name >> rank) || kw != "tensor")
            throw std::runtime_error("read_tensor_file: malformed header line: " + line);
        t.shape.resize(rank);
        size_t n = 1;
        for (size_t i = 0; i < rank; ++i) {
            if (!(ss >> t.shape[i]) || t.shape[i] <= 0)
                throw std::runtime_error("read_tensor_file: malformed shape in: " + line);
            n *= static_cast<size_t>(t.shape[i]);
        }
        t.values.resize(n);
        tensors.push_back(std::move(t));
    }
    for (auto& t : tensors) {
        for (auto& v : t.values) {
            std::uint64_t u;
            in.read(reinterpret_cast<char*>(&u), sizeof(u));
            if (!in) throw std::runtime_error("read_tensor_file: truncated payload in " + path);
            v = from_le(u);
        }
    }
    return tensors;
}

} // namespace irsim
