#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpnf/fields/field_model.hpp"
#include "vpnf/store/binary.hpp"
#include "vpnf/store/json_codec.hpp"

namespace vpnf::store {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Model plus the training facts worth keeping next to it.
struct Checkpoint {
    fields::FieldModel model;
    std::string variant;  // DANF, PI-DANF, VPNF, VPNF-Wave or VPNF+
    std::uint64_t seed = 0;
    json extra = json::object();  // free-form (selected iteration, validation NMSE, ...)
};

// Layout: "VPNF", u32 version, u32 record count, per record u32 (role, rows, cols),
// float32 parameters in manifest order, then u64 length + JSON metadata.
// Parameters are stored in single precision; the double values are rounded on save.
inline std::vector<unsigned char> encode_checkpoint(const Checkpoint& c) {
    const auto& p = c.model.params;
    ByteWriter w;
    w.bytes("VPNF", 4);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(p.manifest().size()));
    for (const auto& r : p.manifest()) {
        w.u32(static_cast<std::uint32_t>(r.role));
        w.u32(static_cast<std::uint32_t>(r.rows));
        w.u32(static_cast<std::uint32_t>(r.cols));
    }
    for (Eigen::Index i = 0; i < p.size(); ++i) w.f32(static_cast<float>(p.values()[i]));
    const auto& s = p.shape();
    const json meta = {{"omega0", p.omega0()},
                       {"depth", s.depth},
                       {"width", s.width},
                       {"input_dim", s.input_dim},
                       {"output_dim", s.output_dim},
                       {"head", fields::head_name(c.model.head)},
                       {"variant", c.variant},
                       {"vpnf_plus_multiplier", "normalized (x, y, z, tau)"},
                       {"normalization", to_json(c.model.norm)},
                       {"medium", to_json(c.model.medium)},
                       {"seed", c.seed},
                       {"extra", c.extra}};
    w.text(meta.dump());
    return w.buffer();
}

inline Checkpoint decode_checkpoint(std::vector<unsigned char> bytes, const std::string& what = "checkpoint") {
    ByteReader r(std::move(bytes), what);
    r.magic("VPNF");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw FormatError(what + ": unsupported version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    std::vector<diffcore::LayerRecord> manifest;
    Eigen::Index offset = 0;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t role = r.u32();
        if (role > static_cast<std::uint32_t>(diffcore::LayerRole::HeadBias))
            throw FormatError(what + ": unknown layer role " + std::to_string(role));
        const Eigen::Index rows = r.u32(), cols = r.u32();
        manifest.push_back({static_cast<diffcore::LayerRole>(role), rows, cols, offset});
        offset += rows * cols;
    }
    Eigen::VectorXd values(offset);
    for (Eigen::Index i = 0; i < offset; ++i) values[i] = static_cast<double>(r.f32());
    const json meta = parse_json(r.text(), what + " metadata");
    r.expect_end();

    Checkpoint c;
    try {
        const diffcore::MlpShape shape{meta.at("input_dim").get<int>(), meta.at("width").get<int>(),
                                       meta.at("depth").get<int>(), meta.at("output_dim").get<int>()};
        c.model.params = diffcore::ParamStore(shape, meta.at("omega0").get<double>(), manifest, std::move(values));
        c.model.head = fields::head_from_name(meta.at("head").get<std::string>());
        c.model.norm = normalization_from_json(meta.at("normalization"));
        c.model.medium = medium_from_json(meta.at("medium"));
        c.variant = meta.at("variant").get<std::string>();
        c.seed = meta.at("seed").get<std::uint64_t>();
        c.extra = meta.at("extra");
    } catch (const json::exception& e) {
        throw FormatError(what + ": bad metadata: " + e.what());
    }
    if (c.model.params.shape().output_dim != fields::head_output_dim(c.model.head))
        throw FormatError(what + ": output dimension does not match head");
    return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) { write_file(path, encode_checkpoint(c)); }

inline Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path), path); }

}  // namespace vpnf::store
