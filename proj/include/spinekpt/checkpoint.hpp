#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spinekpt/adam.hpp"
#include "spinekpt/codec.hpp"
#include "spinekpt/model.hpp"

namespace spinekpt {

struct CheckpointError : std::runtime_error {
    enum class Kind { io, version_mismatch, truncated, inconsistent };
    Kind kind;
    CheckpointError(Kind k, const std::string& msg)
        : std::runtime_error("checkpoint: " + msg), kind(k) {}
};

/// Serializable training state: architecture, parameters, optional optimizer
/// moments and the codec geometry the model was trained with.
struct ModelCheckpoint {
    int version = 1;
    std::vector<LayerSpec> layers;
    ModelParams params;
    std::optional<AdamState> adam;
    CodecConfig codec;
};

namespace detail {

// 17 significant digits round-trip a double exactly through text
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
    os << name << "\n";
    os << t.shape.size();
    for (std::size_t d : t.shape) os << " " << d;
    os << "\n";
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::big) {
        for (double v : t.data) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            char le[8];
            for (int i = 0; i < 8; ++i) le[i] = static_cast<char>(bits >> (8 * i));
            os.write(le, 8);
        }
    } else {
        os.write(reinterpret_cast<const char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * 8));
    }
    os << "\n";
}

inline std::string read_line(std::istream& is, const char* what) {
    std::string line;
    if (!std::getline(is, line))
        throw CheckpointError(CheckpointError::Kind::truncated,
                              std::string("unexpected end of file reading ") + what);
    return line;
}

inline Tensor read_tensor(std::istream& is, std::string& name_out) {
    name_out = read_line(is, "tensor name");
    std::istringstream shape_line(read_line(is, "tensor shape"));
    std::size_t ndims = 0;
    if (!(shape_line >> ndims) || ndims > 8)
        throw CheckpointError(CheckpointError::Kind::inconsistent, "bad tensor shape line");
    std::vector<std::size_t> shape(ndims);
    for (std::size_t& d : shape)
        if (!(shape_line >> d))
            throw CheckpointError(CheckpointError::Kind::inconsistent, "bad tensor shape line");
    if (Tensor::count(shape) > (std::size_t{1} << 26))
        throw CheckpointError(CheckpointError::Kind::inconsistent, "tensor too large");
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * 8));
    if (static_cast<std::size_t>(is.gcount()) != t.data.size() * 8)
        throw CheckpointError(CheckpointError::Kind::truncated,
                              "tensor blob shorter than stated length for " + name_out);
    if constexpr (std::endian::native == std::endian::big) {
        for (double& v : t.data) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            std::uint64_t sw = 0;
            for (int i = 0; i < 8; ++i)
                sw |= ((bits >> (8 * i)) & 0xffull) << (8 * (7 - i));
            std::memcpy(&v, &sw, 8);
        }
    }
    if (is.get() != '\n')
        throw CheckpointError(CheckpointError::Kind::truncated,
                              "missing terminator after tensor blob");
    return t;
}

} // namespace detail

inline void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw CheckpointError(CheckpointError::Kind::io, "cannot open for writing: " + path);
    using detail::fmt_double;

    os << "SPINEKPT-CKPT " << ckpt.version << "\n";
    os << "codec " << ckpt.codec.n << " " << ckpt.codec.out_height << " "
       << ckpt.codec.out_width << " " << fmt_double(ckpt.codec.min_overlap) << " "
       << fmt_double(ckpt.codec.sigma_floor) << " " << ckpt.codec.topk << " "
       << fmt_double(ckpt.codec.score_threshold) << "\n";
    os << "layers " << ckpt.layers.size() << "\n";
    for (const LayerSpec& l : ckpt.layers)
        os << layer_kind_name(l.kind) << " " << l.in_channels << " " << l.out_channels
           << " " << l.stride << "\n";
    os << "params " << ckpt.params.size() << "\n";
    for (const auto& [name, tensor] : ckpt.params.items)
        detail::write_tensor(os, name, tensor);
    if (ckpt.adam) {
        const AdamState& a = *ckpt.adam;
        os << "adam " << a.t << " " << fmt_double(a.lr) << " " << fmt_double(a.beta1)
           << " " << fmt_double(a.beta2) << " " << fmt_double(a.eps) << "\n";
        for (const auto& [name, tensor] : a.m.items)
            detail::write_tensor(os, "m:" + name, tensor);
        for (const auto& [name, tensor] : a.v.items)
            detail::write_tensor(os, "v:" + name, tensor);
    } else {
        os << "adam none\n";
    }
    if (!os)
        throw CheckpointError(CheckpointError::Kind::io, "write failed: " + path);
}

inline ModelCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw CheckpointError(CheckpointError::Kind::io, "cannot open for reading: " + path);
    using detail::read_line;

    ModelCheckpoint ckpt;
    {
        std::istringstream head(read_line(is, "header"));
        std::string magic;
        int version = 0;
        head >> magic >> version;
        if (magic != "SPINEKPT-CKPT")
            throw CheckpointError(CheckpointError::Kind::version_mismatch,
                                  "not a checkpoint file: " + path);
        if (version != 1)
            throw CheckpointError(CheckpointError::Kind::version_mismatch,
                                  "unsupported version " + std::to_string(version));
        ckpt.version = version;
    }
    {
        std::istringstream line(read_line(is, "codec"));
        std::string tag;
        line >> tag >> ckpt.codec.n >> ckpt.codec.out_height >> ckpt.codec.out_width >>
            ckpt.codec.min_overlap >> ckpt.codec.sigma_floor >> ckpt.codec.topk >>
            ckpt.codec.score_threshold;
        if (tag != "codec" || !line)
            throw CheckpointError(CheckpointError::Kind::inconsistent, "bad codec line");
    }
    {
        std::istringstream line(read_line(is, "layer count"));
        std::string tag;
        std::size_t count = 0;
        line >> tag >> count;
        if (tag != "layers" || !line || count > 256)
            throw CheckpointError(CheckpointError::Kind::inconsistent, "bad layers line");
        for (std::size_t i = 0; i < count; ++i) {
            std::istringstream ll(read_line(is, "layer"));
            std::string kind;
            LayerSpec spec;
            ll >> kind >> spec.in_channels >> spec.out_channels >> spec.stride;
            if (!ll)
                throw CheckpointError(CheckpointError::Kind::inconsistent, "bad layer line");
            spec.kind = layer_kind_from_name(kind);
            ckpt.layers.push_back(spec);
        }
    }
    std::size_t param_count = 0;
    {
        std::istringstream line(read_line(is, "param count"));
        std::string tag;
        line >> tag >> param_count;
        if (tag != "params" || !line || param_count > 4096)
            throw CheckpointError(CheckpointError::Kind::inconsistent, "bad params line");
    }
    for (std::size_t i = 0; i < param_count; ++i) {
        std::string name;
        Tensor t = detail::read_tensor(is, name);
        if (ckpt.params.contains(name))
            throw CheckpointError(CheckpointError::Kind::inconsistent,
                                  "duplicate parameter " + name);
        ckpt.params[name] = std::move(t);
    }
    {
        std::istringstream line(read_line(is, "adam"));
        std::string tag, first;
        line >> tag >> first;
        if (tag != "adam")
            throw CheckpointError(CheckpointError::Kind::inconsistent, "bad adam line");
        if (first != "none") {
            AdamState a;
            a.t = std::stol(first);
            line >> a.lr >> a.beta1 >> a.beta2 >> a.eps;
            if (!line)
                throw CheckpointError(CheckpointError::Kind::inconsistent, "bad adam line");
            for (std::size_t i = 0; i < 2 * param_count; ++i) {
                std::string name;
                Tensor t = detail::read_tensor(is, name);
                if (name.size() < 3 || name[1] != ':')
                    throw CheckpointError(CheckpointError::Kind::inconsistent,
                                          "bad moment tensor name " + name);
                const std::string pname = name.substr(2);
                if (!ckpt.params.contains(pname) ||
                    !ckpt.params.at(pname).same_shape(t))
                    throw CheckpointError(CheckpointError::Kind::inconsistent,
                                          "moment tensor does not match parameter " + pname);
                if (name[0] == 'm') a.m[pname] = std::move(t);
                else if (name[0] == 'v') a.v[pname] = std::move(t);
                else
                    throw CheckpointError(CheckpointError::Kind::inconsistent,
                                          "bad moment tensor name " + name);
            }
            ckpt.adam = std::move(a);
        }
    }

    try {
        validate_model_params(ckpt.params);
    } catch (const std::invalid_argument& e) {
        throw CheckpointError(CheckpointError::Kind::inconsistent, e.what());
    }
    if (ckpt.layers != default_layer_specs())
        throw CheckpointError(CheckpointError::Kind::inconsistent,
                              "layer list does not match the supported graph");
    return ckpt;
}

} // namespace spinekpt
