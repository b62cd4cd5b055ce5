#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddpgd/offline.hpp"

namespace ddpgd {

struct ArchiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace archive {

inline constexpr char kMagic[8] = {'D', 'D', 'P', 'G', 'D', 'A', 'R', 'C'};
inline constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "archive writer assumes a little-endian host");

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

/// Flat f64 payload plus a JSON index of named arrays.
class Writer {
public:
  std::size_t put(const double* v, std::size_t n) {
    std::size_t off = data_.size();
    data_.insert(data_.end(), v, v + n);
    return off;
  }
  nlohmann::json array(const Vec& v) {
    auto off = put(v.data(), static_cast<std::size_t>(v.size()));
    return {{"offset", off}, {"count", v.size()}};
  }
  nlohmann::json tensor(const SepVector& t) {
    nlohmann::json j;
    j["space_size"] = t.rank() ? t[0].space.size() : 0;
    j["axis_sizes"] = t.param_sizes();
    j["rank"] = t.rank();
    auto& terms = j["terms"] = nlohmann::json::array();
    for (const auto& term : t.terms()) {
      nlohmann::json tj;
      tj["space"] = array(term.space);
      auto& ps = tj["params"] = nlohmann::json::array();
      for (const auto& p : term.params) ps.push_back(array(p));
      terms.push_back(std::move(tj));
    }
    return j;
  }
  const std::vector<double>& data() const { return data_; }

private:
  std::vector<double> data_;
};

class Reader {
public:
  explicit Reader(std::vector<double> d) : data_(std::move(d)) {}
  Vec array(const nlohmann::json& j) const {
    auto off = j.at("offset").get<std::size_t>();
    auto n = j.at("count").get<std::size_t>();
    if (off > data_.size() || n > data_.size() - off) throw ArchiveError("archive: array out of payload bounds");
    Vec v(static_cast<Eigen::Index>(n));
    if (n) std::memcpy(v.data(), data_.data() + off, n * sizeof(double));
    return v;
  }
  SepVector tensor(const nlohmann::json& j) const {
    SepVector t(j.at("axis_sizes").get<std::vector<std::size_t>>());
    const auto& terms = j.at("terms");
    if (terms.size() != j.at("rank").get<std::size_t>()) throw ArchiveError("archive: rank does not match term list");
    for (const auto& tj : terms) {
      std::vector<Vec> ps;
      for (const auto& p : tj.at("params")) ps.push_back(array(p));
      try {
        t.push(array(tj.at("space")), std::move(ps));
      } catch (const std::invalid_argument& e) {
        throw ArchiveError(std::string("archive: ") + e.what());
      }
    }
    return t;
  }

private:
  std::vector<double> data_;
};

}  // namespace archive

/// Writes a surrogate as: magic, version, header length, JSON header, header checksum, f64 payload.
inline void save_surrogate(const SubdomainSurrogate& s, const std::string& path) {
  archive::Writer w;
  nlohmann::json h;
  h["format"] = "ddpgd-surrogate";
  h["name"] = s.name;
  h["physics"] = to_string(s.physics);
  h["ndofs"] = s.ndofs;
  h["free"] = s.free;
  h["trace"] = s.trace;
  h["global_axes"] = s.global_axes;
  auto& axes = h["params"] = nlohmann::json::array();
  for (const auto& a : s.params.axes) {
    Vec pts = Eigen::Map<const Vec>(a.points.data(), static_cast<Eigen::Index>(a.points.size()));
    axes.push_back({{"name", a.name}, {"points", w.array(pts)}});
  }
  h["data"] = w.tensor(s.data);
  h["lifting"] = w.tensor(s.lifting);
  auto& tr = h["traces"] = nlohmann::json::array();
  for (const auto& t : s.traces) tr.push_back(w.tensor(t));
  h["stats"] = {{"modes_raw", s.modes_raw},
                {"modes_compressed", s.modes_compressed},
                {"data_modes_raw", s.data_modes_raw},
                {"data_modes_compressed", s.data_modes_compressed},
                {"unconverged", s.unconverged},
                {"seconds", s.seconds}};
  const auto& d = w.data();
  h["payload_count"] = d.size();
  h["payload_fnv1a"] = archive::fnv1a(d.data(), d.size() * sizeof(double));

  const std::string header = h.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ArchiveError("cannot write archive '" + path + "'");
  const std::uint32_t ver = archive::kVersion;
  const std::uint64_t len = header.size();
  const std::uint64_t hsum = archive::fnv1a(header.data(), header.size());
  f.write(archive::kMagic, sizeof archive::kMagic);
  f.write(reinterpret_cast<const char*>(&ver), sizeof ver);
  f.write(reinterpret_cast<const char*>(&len), sizeof len);
  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  f.write(reinterpret_cast<const char*>(&hsum), sizeof hsum);
  f.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(double)));
  if (!f) throw ArchiveError("write failed for archive '" + path + "'");
}

inline SubdomainSurrogate load_surrogate(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ArchiveError("cannot open archive '" + path + "'");
  char magic[8];
  std::uint32_t ver = 0;
  std::uint64_t len = 0, hsum = 0;
  f.read(magic, sizeof magic);
  f.read(reinterpret_cast<char*>(&ver), sizeof ver);
  f.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!f || std::memcmp(magic, archive::kMagic, sizeof magic) != 0) throw ArchiveError("'" + path + "' is not a surrogate archive");
  if (ver != archive::kVersion)
    throw ArchiveError("archive '" + path + "' has version " + std::to_string(ver) + ", expected " +
                       std::to_string(archive::kVersion));
  if (len > (std::uint64_t{1} << 32)) throw ArchiveError("archive '" + path + "': implausible header length");
  std::string header(len, '\0');
  f.read(header.data(), static_cast<std::streamsize>(len));
  f.read(reinterpret_cast<char*>(&hsum), sizeof hsum);
  if (!f) throw ArchiveError("archive '" + path + "' is truncated");
  if (archive::fnv1a(header.data(), header.size()) != hsum) throw ArchiveError("archive '" + path + "': header checksum mismatch");

  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError("archive '" + path + "': bad header: " + e.what());
  }
  try {
    auto n = h.at("payload_count").get<std::size_t>();
    std::vector<double> d(n);
    f.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!f) throw ArchiveError("archive '" + path + "': payload truncated");
    if (archive::fnv1a(d.data(), n * sizeof(double)) != h.at("payload_fnv1a").get<std::uint64_t>())
      throw ArchiveError("archive '" + path + "': payload checksum mismatch");
    archive::Reader r(std::move(d));

    SubdomainSurrogate s;
    s.name = h.at("name").get<std::string>();
    s.physics = h.at("physics").get<std::string>() == "darcy" ? Physics::Darcy : Physics::Stokes;
    s.ndofs = h.at("ndofs").get<int>();
    s.free = h.at("free").get<std::vector<int>>();
    s.trace = h.at("trace").get<std::vector<int>>();
    s.global_axes = h.at("global_axes").get<std::vector<int>>();
    for (const auto& a : h.at("params")) {
      Vec pts = r.array(a.at("points"));
      s.params.axes.push_back({a.at("name").get<std::string>(), std::vector<double>(pts.begin(), pts.end())});
    }
    s.data = r.tensor(h.at("data"));
    s.lifting = r.tensor(h.at("lifting"));
    for (const auto& t : h.at("traces")) s.traces.push_back(r.tensor(t));
    const auto& st = h.at("stats");
    s.modes_raw = st.at("modes_raw").get<int>();
    s.modes_compressed = st.at("modes_compressed").get<int>();
    s.data_modes_raw = st.at("data_modes_raw").get<int>();
    s.data_modes_compressed = st.at("data_modes_compressed").get<int>();
    s.unconverged = st.at("unconverged").get<int>();
    s.seconds = st.at("seconds").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError("archive '" + path + "': malformed header: " + e.what());
  }
}

}  // namespace ddpgd
