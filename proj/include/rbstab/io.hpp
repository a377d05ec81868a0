#pragma once

#include "rbstab/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rbstab
{

/// Dense float64 array of up to a few dimensions, column-major.
///
/// File layout: "RBA1", uint32 ndim, ndim x uint64 extents, then the data.
/// Little-endian, as written by the host.
struct Array
{
  std::vector<std::uint64_t> dims;
  std::vector<double> data;

  std::size_t size() const;
};

void write_array(const std::filesystem::path &path, const Array &a);
Array read_array(const std::filesystem::path &path);

void write_matrix(const std::filesystem::path &path, const Mat &m);
Mat read_matrix(const std::filesystem::path &path);
void write_vector(const std::filesystem::path &path, const Vec &v);
Vec read_vector(const std::filesystem::path &path);

/// Plain "key = value" lines. '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;

void write_key_values(const std::filesystem::path &path, const KeyValues &kv);
KeyValues read_key_values(const std::filesystem::path &path);
KeyValues parse_key_values(const std::string &text);

} // namespace rbstab
