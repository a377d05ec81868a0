#include "rbstab/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace rbstab
{

namespace
{

constexpr char kMagic[4] = {'R', 'B', 'A', '1'};

std::string trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

} // namespace

std::size_t Array::size() const
{
  std::size_t n = 1;
  for (auto d : dims)
    n *= d;
  return n;
}

void write_array(const std::filesystem::path &path, const Array &a)
{
  if (a.size() != a.data.size())
    throw UsageError("write_array: extents do not match data length");
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::uint32_t ndim = static_cast<std::uint32_t>(a.dims.size());
  os.write(kMagic, 4);
  os.write(reinterpret_cast<const char *>(&ndim), sizeof ndim);
  os.write(reinterpret_cast<const char *>(a.dims.data()), ndim * sizeof(std::uint64_t));
  os.write(reinterpret_cast<const char *>(a.data.data()), a.data.size() * sizeof(double));
  if (!os)
    throw std::runtime_error("write failed: " + path.string());
}

Array read_array(const std::filesystem::path &path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  std::uint32_t ndim = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char *>(&ndim), sizeof ndim);
  if (!is || std::memcmp(magic, kMagic, 4) != 0 || ndim > 8)
    throw std::runtime_error("not an array file: " + path.string());
  Array a;
  a.dims.resize(ndim);
  is.read(reinterpret_cast<char *>(a.dims.data()), ndim * sizeof(std::uint64_t));
  a.data.resize(a.size());
  is.read(reinterpret_cast<char *>(a.data.data()), a.data.size() * sizeof(double));
  if (!is)
    throw std::runtime_error("truncated array file: " + path.string());
  return a;
}

void write_matrix(const std::filesystem::path &path, const Mat &m)
{
  Array a;
  a.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  a.data.assign(m.data(), m.data() + m.size());
  write_array(path, a);
}

Mat read_matrix(const std::filesystem::path &path)
{
  const Array a = read_array(path);
  if (a.dims.size() != 2)
    throw std::runtime_error("expected a 2-d array in " + path.string());
  return Eigen::Map<const Mat>(a.data.data(), static_cast<Eigen::Index>(a.dims[0]),
                               static_cast<Eigen::Index>(a.dims[1]));
}

void write_vector(const std::filesystem::path &path, const Vec &v)
{
  Array a;
  a.dims = {static_cast<std::uint64_t>(v.size())};
  a.data.assign(v.data(), v.data() + v.size());
  write_array(path, a);
}

Vec read_vector(const std::filesystem::path &path)
{
  const Array a = read_array(path);
  if (a.dims.size() != 1)
    throw std::runtime_error("expected a 1-d array in " + path.string());
  return Eigen::Map<const Vec>(a.data.data(), static_cast<Eigen::Index>(a.dims[0]));
}

void write_key_values(const std::filesystem::path &path, const KeyValues &kv)
{
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto &[k, v] : kv)
    os << k << " = " << v << '\n';
}

KeyValues parse_key_values(const std::string &text)
{
  KeyValues kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line))
  {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw UsageError("line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path &path)
{
  std::ifstream is(path);
  if (!is)
    throw UsageError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_key_values(ss.str());
}

} // namespace rbstab
