#include "sea/nn/param.hpp"

#include <cstring>
#include <fstream>

#include "sea/errors.hpp"
#include "sea/hash.hpp"

namespace sea::nn {

ParamPtr ParamStore::create(const std::string& name, Matrix init) {
  if (find(name)) throw Error("duplicate parameter name: " + name);
  auto p = std::make_shared<Param>(name, std::move(init));
  params_.push_back(p);
  return p;
}

ParamPtr ParamStore::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p;
  return nullptr;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

std::uint64_t ParamStore::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : params_) {
    h = fnv1a(p->name, h);
    h = fnv1a(p->value.data(),
              static_cast<std::size_t>(p->value.size()) * sizeof(double), h);
  }
  return h;
}

namespace {

template <typename T>
void write_pod(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void ParamStore::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for write: " + path.string());
  os.write("SEAP", 4);
  write_pod<std::uint32_t>(os, 1);  // format version
  write_pod<std::uint64_t>(os, params_.size());
  for (const auto& p : params_) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(p->value.rows()));
    write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(p->value.cols()));
    os.write(reinterpret_cast<const char*>(p->value.data()),
             static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!os) throw IoError("write failed: " + path.string());
}

void ParamStore::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for read: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SEAP", 4) != 0)
    throw IoError("not a parameter blob: " + path.string());
  if (read_pod<std::uint32_t>(is) != 1)
    throw IoError("unsupported parameter blob version");
  const auto count = read_pod<std::uint64_t>(is);
  if (count != params_.size())
    throw Error("parameter count mismatch: blob has " + std::to_string(count) +
                ", model has " + std::to_string(params_.size()));
  for (auto& p : params_) {
    const auto name_len = read_pod<std::uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (name != p->name)
      throw Error("parameter name mismatch: expected '" + p->name +
                  "', blob has '" + name + "'");
    const auto rows = read_pod<std::uint64_t>(is);
    const auto cols = read_pod<std::uint64_t>(is);
    if (rows != static_cast<std::uint64_t>(p->value.rows()) ||
        cols != static_cast<std::uint64_t>(p->value.cols()))
      throw Error("parameter shape mismatch for '" + p->name + "'");
    is.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    p->velocity.setZero();
  }
  if (!is) throw IoError("truncated parameter blob: " + path.string());
}

}  // namespace sea::nn
