#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "chebex/error.hpp"
#include "chebex/moments.hpp"
#include "json.hpp"

namespace chebex {

namespace {

constexpr char kMagic[8] = {'C', 'H', 'X', 'G', 'A', 'M', '0', '1'};

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("moment cache: truncated file");
    return v;
}

void write_key(std::ostream& os, const MomentCacheKey& key) {
    put(os, key.model_hash);
    put(os, key.lo);
    put(os, key.hi);
    put(os, static_cast<std::uint64_t>(key.degree));
    put(os, key.dt);
    put(os, static_cast<std::uint32_t>(key.backend));
    put(os, static_cast<std::uint64_t>(key.m_pre));
    put(os, key.seed);
}

MomentCacheKey read_key(std::istream& is) {
    MomentCacheKey key;
    key.model_hash = get<std::uint64_t>(is);
    key.lo = get<double>(is);
    key.hi = get<double>(is);
    key.degree = get<std::uint64_t>(is);
    key.dt = get<double>(is);
    key.backend = static_cast<MomentBackend>(get<std::uint32_t>(is));
    key.m_pre = get<std::uint64_t>(is);
    key.seed = get<std::uint64_t>(is);
    return key;
}

nlohmann::json key_json(const MomentCacheKey& key) {
    return {{"model_hash", key.model_hash}, {"lo", key.lo},         {"hi", key.hi},
            {"degree", key.degree},         {"dt", key.dt},         {"backend", std::string(to_string(key.backend))},
            {"m_pre", key.m_pre},           {"seed", key.seed}};
}

void check_open(const std::ios& s, const std::filesystem::path& file) {
    if (!s) throw std::runtime_error("cannot open " + file.string());
}

}  // namespace

std::string cache_file_stem(const MomentCacheKey& key) {
    std::ostringstream os;
    os << "gamma_" << to_string(key.backend) << "_N" << key.degree << std::hex << std::setfill('0') << "_m"
       << std::setw(16) << key.model_hash << "_d" << std::setw(16) << std::bit_cast<std::uint64_t>(key.lo) << "_"
       << std::setw(16) << std::bit_cast<std::uint64_t>(key.hi) << "_t" << std::setw(16)
       << std::bit_cast<std::uint64_t>(key.dt) << std::dec << "_p" << key.m_pre << "_s" << key.seed;
    return os.str();
}

void save_moment_matrix(const std::filesystem::path& file, const MomentCacheKey& key, const MomentMatrix& m) {
    std::ofstream os(file, std::ios::binary);
    check_open(os, file);
    os.write(kMagic, sizeof kMagic);
    write_key(os, key);
    put(os, static_cast<std::uint64_t>(m.degree()));
    put(os, m.domain().lo());
    put(os, m.domain().hi());
    put(os, m.dt());
    put(os, static_cast<std::uint32_t>(m.backend()));
    const auto data = m.data();
    os.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
    if (!os) throw std::runtime_error("failed writing " + file.string());
}

std::optional<MomentMatrix> load_moment_matrix(const std::filesystem::path& file, const MomentCacheKey& key) {
    std::ifstream is(file, std::ios::binary);
    if (!is) return std::nullopt;
    char magic[sizeof kMagic];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) return std::nullopt;
    if (!(read_key(is) == key)) return std::nullopt;
    const auto degree = get<std::uint64_t>(is);
    const double lo = get<double>(is);
    const double hi = get<double>(is);
    const double dt = get<double>(is);
    const auto backend = static_cast<MomentBackend>(get<std::uint32_t>(is));
    std::vector<double> g((degree + 1) * (degree + 1));
    is.read(reinterpret_cast<char*>(g.data()), static_cast<std::streamsize>(g.size() * sizeof(double)));
    if (!is) throw std::runtime_error("moment cache: truncated file " + file.string());
    return MomentMatrix(ChebDomain(lo, hi), degree, dt, backend, std::move(g));
}

void save_moment_matrix_json(const std::filesystem::path& file, const MomentCacheKey& key, const MomentMatrix& m) {
    nlohmann::json j;
    j["key"] = key_json(key);
    j["degree"] = m.degree();
    j["domain"] = {m.domain().lo(), m.domain().hi()};
    j["dt"] = m.dt();
    j["backend"] = std::string(to_string(m.backend()));
    j["gamma"] = std::vector<double>(m.data().begin(), m.data().end());
    std::ofstream os(file);
    check_open(os, file);
    os << j.dump();
    if (!os) throw std::runtime_error("failed writing " + file.string());
}

std::optional<MomentMatrix> load_moment_matrix_json(const std::filesystem::path& file,
                                                    const MomentCacheKey& key) {
    std::ifstream is(file);
    if (!is) return std::nullopt;
    const auto j = nlohmann::json::parse(is);
    if (j.at("key") != key_json(key)) return std::nullopt;
    return MomentMatrix(ChebDomain(j.at("domain").at(0).get<double>(), j.at("domain").at(1).get<double>()),
                        j.at("degree").get<std::size_t>(), j.at("dt").get<double>(),
                        parse_moment_backend(j.at("backend").get<std::string>()),
                        j.at("gamma").get<std::vector<double>>());
}

}  // namespace chebex
