#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpnf/roomsim/dataset.hpp"
#include "vpnf/store/binary.hpp"
#include "vpnf/store/json_codec.hpp"

namespace vpnf::store {

inline constexpr std::uint32_t kDatasetVersion = 1;

// Layout: "FOAD", u32 version, u64 length + JSON header (fs, duration, L, N, medium, room,
// grid, seed), float32 N x 4 x L responses, float64 N x 3 positions. All little-endian.
inline std::vector<unsigned char> encode_dataset(const roomsim::FoaDataset& ds) {
    ByteWriter w;
    w.bytes("FOAD", 4);
    w.u32(kDatasetVersion);
    const json header = {{"fs", ds.fs},
                         {"duration", ds.duration},
                         {"samples", ds.samples},
                         {"positions", ds.size()},
                         {"medium", to_json(ds.medium)},
                         {"room", to_json(ds.room)},
                         {"grid", to_json(ds.grid)},
                         {"seed", ds.seed}};
    w.text(header.dump());
    for (float v : ds.rirs) w.f32(v);
    for (Eigen::Index i = 0; i < ds.positions.rows(); ++i)
        for (int a = 0; a < 3; ++a) w.f64(ds.positions(i, a));
    return w.buffer();
}

inline roomsim::FoaDataset decode_dataset(std::vector<unsigned char> bytes, const std::string& what = "dataset") {
    ByteReader r(std::move(bytes), what);
    r.magic("FOAD");
    const std::uint32_t version = r.u32();
    if (version != kDatasetVersion) throw FormatError(what + ": unsupported version " + std::to_string(version));
    const json h = parse_json(r.text(), what + " header");
    roomsim::FoaDataset ds;
    std::size_t n = 0;
    try {
        ds.fs = h.at("fs").get<double>();
        ds.duration = h.at("duration").get<double>();
        ds.samples = h.at("samples").get<int>();
        n = h.at("positions").get<std::size_t>();
        ds.medium = medium_from_json(h.at("medium"));
        ds.room = room_from_json(h.at("room"));
        ds.grid = grid_from_json(h.at("grid"));
        ds.seed = h.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw FormatError(what + ": bad header: " + e.what());
    }
    if (ds.samples < 1) throw FormatError(what + ": sample count must be positive");
    ds.rirs.resize(n * 4 * static_cast<std::size_t>(ds.samples));
    for (auto& v : ds.rirs) v = r.f32();
    ds.positions.resize(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index i = 0; i < ds.positions.rows(); ++i)
        for (int a = 0; a < 3; ++a) ds.positions(i, a) = r.f64();
    r.expect_end();
    return ds;
}

inline void save_dataset(const std::string& path, const roomsim::FoaDataset& ds) { write_file(path, encode_dataset(ds)); }

inline roomsim::FoaDataset load_dataset(const std::string& path) { return decode_dataset(read_file(path), path); }

inline void save_split(const std::string& path, const training::Split& s) { write_file(path, to_json(s).dump(1) + "\n"); }

inline training::Split load_split(const std::string& path) {
    try {
        return split_from_json(parse_json(read_text(path), path));
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

}  // namespace vpnf::store
