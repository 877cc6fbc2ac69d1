#ifndef PFTG_SNAPSHOT_HPP
#define PFTG_SNAPSHOT_HPP

// Binary state snapshot.  Layout, all little-endian:
//   "PFTG"  4 ASCII bytes
//   version u16, dim u16, n_x u32, n_y u32
//   h_x f64, h_y f64, t f64, epsilon f64
//   then three row-major f64 blocks: φ, σ, μ
// 48-byte header + 3·8·n_x·n_y payload; round-trips bit-exactly.

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pftg/state.hpp"

namespace pftg {

class SnapshotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Snapshot {
    std::uint16_t version = 1;
    Grid grid;
    double t = 0.0;
    double epsilon = 0.0;
    std::vector<double> phi, sigma, mu;
};

namespace detail {

template <typename T>
inline void put_le(std::string& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
    put_le(out, std::bit_cast<std::uint64_t>(v));
}

template <typename T>
inline T get_le(const unsigned char* p) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
    return v;
}

inline double get_f64(const unsigned char* p) {
    return std::bit_cast<double>(get_le<std::uint64_t>(p));
}

} // namespace detail

inline std::string serialize_snapshot(const Snapshot& snap) {
    const Grid& g = snap.grid;
    const std::size_t n = g.size();
    if (snap.phi.size() != n || snap.sigma.size() != n || snap.mu.size() != n)
        throw SnapshotError("snapshot: field sizes disagree with the grid");
    std::string out;
    out.reserve(48 + 3 * 8 * n);
    out += "PFTG";
    detail::put_le<std::uint16_t>(out, snap.version);
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(g.dim));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.n_x));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.n_y));
    detail::put_f64(out, g.h_x);
    detail::put_f64(out, g.h_y);
    detail::put_f64(out, snap.t);
    detail::put_f64(out, snap.epsilon);
    for (const auto* block : {&snap.phi, &snap.sigma, &snap.mu})
        for (double v : *block) detail::put_f64(out, v);
    return out;
}

inline Snapshot deserialize_snapshot(const std::string& bytes) {
    if (bytes.size() < 48 || bytes.compare(0, 4, "PFTG") != 0)
        throw SnapshotError("snapshot: bad magic or truncated header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    Snapshot snap;
    snap.version = detail::get_le<std::uint16_t>(p + 4);
    if (snap.version != 1)
        throw SnapshotError("snapshot: unsupported version " + std::to_string(snap.version));
    const int dim = detail::get_le<std::uint16_t>(p + 6);
    const auto n_x = detail::get_le<std::uint32_t>(p + 8);
    const auto n_y = detail::get_le<std::uint32_t>(p + 12);
    if ((dim != 1 && dim != 2) || n_x == 0 || n_y == 0)
        throw SnapshotError("snapshot: invalid grid header");
    snap.grid.dim = dim;
    snap.grid.n_x = static_cast<int>(n_x);
    snap.grid.n_y = static_cast<int>(n_y);
    snap.grid.h_x = detail::get_f64(p + 16);
    snap.grid.h_y = detail::get_f64(p + 24);
    snap.t = detail::get_f64(p + 32);
    snap.epsilon = detail::get_f64(p + 40);
    if (!(snap.grid.h_x > 0.0) || !(snap.grid.h_y > 0.0))
        throw SnapshotError("snapshot: invalid cell sizes");

    const std::size_t n = static_cast<std::size_t>(n_x) * n_y;
    if (bytes.size() != 48 + 3 * 8 * n)
        throw SnapshotError("snapshot: payload size mismatch");
    const auto read_block = [&](std::size_t block) {
        std::vector<double> out(n);
        const unsigned char* base = p + 48 + block * 8 * n;
        for (std::size_t i = 0; i < n; ++i) out[i] = detail::get_f64(base + 8 * i);
        return out;
    };
    snap.phi = read_block(0);
    snap.sigma = read_block(1);
    snap.mu = read_block(2);
    return snap;
}

inline void write_snapshot(const std::string& path, const Snapshot& snap) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError("snapshot: cannot open '" + path + "' for writing");
    const std::string bytes = serialize_snapshot(snap);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw SnapshotError("snapshot: short write to '" + path + "'");
}

inline void write_snapshot(const std::string& path, const State& state, const ModelSpec& spec) {
    Snapshot snap;
    snap.grid = state.phi.grid;
    snap.t = state.t;
    snap.epsilon = spec.epsilon;
    snap.phi = state.phi.values;
    snap.sigma = state.sigma.values;
    snap.mu = state.mu.values;
    write_snapshot(path, snap);
}

inline Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("snapshot: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_snapshot(buf.str());
}

inline State to_state(const Snapshot& snap) {
    State state;
    state.t = snap.t;
    state.phi = Field{snap.grid, snap.phi};
    state.sigma = Field{snap.grid, snap.sigma};
    state.mu = Field{snap.grid, snap.mu};
    return state;
}

} // namespace pftg

#endif
