#include "akgc/checkpoint.hpp"

#include "akgc/version.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <variant>

namespace akgc {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; this build targets little-endian hosts");

void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_bytes(std::ostream& out, const std::string& s) {
    put_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::uint64_t get_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::string get_bytes(std::istream& in) {
    std::string s(get_u64(in), '\0');
    in.read(s.data(), static_cast<std::streamsize>(s.size()));
    return s;
}

using Target = std::variant<Mat*, Vec*, double*>;

Target resolve(Model& m, std::string_view name) {
    if (name == "anchors.A") return &m.anchors.A;
    if (name == "anchors.T") return &m.anchors.T;
    if (name == "anchors.R") return &m.anchors.R;
    if (name == "encoder.token_table") return &m.enc.token_table;
    if (name == "encoder.sep") return &m.enc.sep_vector;
    if (name == "encoder.position_table") return &m.enc.position_table;
    if (name == "encoder.W1") return &m.enc.W1;
    if (name == "encoder.b1") return &m.enc.b1;
    if (name == "encoder.W2") return &m.enc.W2;
    if (name == "encoder.b2") return &m.enc.b2;
    if (name == "encoder.anchor_proj") return &m.enc.anchor_proj;
    if (name == "encoder.anchor_table") return &m.enc.anchor_table;
    if (name == "projection.G") return &m.proj.G;
    if (name == "projection.b") return &m.proj.b;
    if (name == "temperature.log_tau") return &m.temperature.log_tau;
    throw std::out_of_range("no model tensor named '" + std::string(name) + "'");
}

void assign(const NamedTensor& t, Target target) {
    if (auto** mat = std::get_if<Mat*>(&target)) {
        if (t.dims.size() != 2) {
            throw std::runtime_error("tensor '" + t.name + "' should be 2-D, file has " +
                                     std::to_string(t.dims.size()) + " dims");
        }
        (*mat)->resize(static_cast<Eigen::Index>(t.dims[0]), static_cast<Eigen::Index>(t.dims[1]));
        std::memcpy((*mat)->data(), t.values.data(), t.values.size() * sizeof(double));
    } else if (auto** vec = std::get_if<Vec*>(&target)) {
        if (t.dims.size() != 1) {
            throw std::runtime_error("tensor '" + t.name + "' should be 1-D");
        }
        (*vec)->resize(static_cast<Eigen::Index>(t.dims[0]));
        std::memcpy((*vec)->data(), t.values.data(), t.values.size() * sizeof(double));
    } else {
        if (t.values.size() != 1) {
            throw std::runtime_error("tensor '" + t.name + "' should be a scalar");
        }
        *std::get<double*>(target) = t.values[0];
    }
}

} // namespace

const NamedTensor* Checkpoint::find(std::string_view name) const {
    for (const auto& t : tensors) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + file.string());
    out.write("AKGC", 4);
    put_u32(out, kCheckpointFormatVersion);
    put_u64(out, ckpt.step);
    put_bytes(out, ckpt.config_text);
    put_bytes(out, ckpt.rng_state);
    put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) {
        put_u32(out, static_cast<std::uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
        std::uint64_t expect = 1;
        for (const auto d : t.dims) {
            put_u64(out, d);
            expect *= d;
        }
        if (expect != t.values.size()) {
            throw std::logic_error("tensor '" + t.name + "' dims disagree with its data size");
        }
        out.write(reinterpret_cast<const char*>(t.values.data()),
                  static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("write failed for checkpoint " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + file.string());
    char magic[4] = {};
    in.read(magic, 4);
    if (std::string_view(magic, 4) != "AKGC") {
        throw std::runtime_error(file.string() + " is not a checkpoint (bad magic)");
    }
    const std::uint32_t version = get_u32(in);
    if (version != kCheckpointFormatVersion) {
        throw std::runtime_error("checkpoint format version " + std::to_string(version) +
                                 " unsupported (expected " +
                                 std::to_string(kCheckpointFormatVersion) + ")");
    }
    Checkpoint ckpt;
    ckpt.step = get_u64(in);
    ckpt.config_text = get_bytes(in);
    ckpt.rng_state = get_bytes(in);
    const std::uint32_t count = get_u32(in);
    ckpt.tensors.resize(count);
    for (auto& t : ckpt.tensors) {
        t.name.resize(get_u32(in));
        in.read(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        t.dims.resize(get_u32(in));
        std::uint64_t total = 1;
        for (auto& d : t.dims) {
            d = get_u64(in);
            total *= d;
        }
        t.values.resize(total);
        in.read(reinterpret_cast<char*>(t.values.data()),
                static_cast<std::streamsize>(total * sizeof(double)));
    }
    if (!in) throw std::runtime_error("truncated checkpoint " + file.string());
    return ckpt;
}

Checkpoint snapshot_model(Model& model, std::uint64_t step, const std::string& config_text,
                          const std::string& rng_state) {
    Checkpoint ckpt;
    ckpt.step = step;
    ckpt.config_text = config_text;
    ckpt.rng_state = rng_state;
    for (const TensorView& v : tensor_views(model)) {
        ckpt.tensors.push_back(
            NamedTensor{v.name, v.dims, std::vector<double>(v.data, v.data + v.size())});
    }
    return ckpt;
}

void append_tensors(Checkpoint& ckpt, ModelGrads& grads, const std::string& prefix) {
    for (const TensorView& v : tensor_views(grads)) {
        ckpt.tensors.push_back(
            NamedTensor{prefix + v.name, v.dims, std::vector<double>(v.data, v.data + v.size())});
    }
}

void restore_model(const Checkpoint& ckpt, Model& model, bool require_all,
                   bool drop_entity_weights) {
    for (const auto& t : ckpt.tensors) {
        if (t.name.rfind("adam.", 0) == 0) continue;
        if (drop_entity_weights && t.name == "anchors.T") continue;
        assign(t, resolve(model, t.name));
    }
    if (require_all) {
        for (const TensorView& v : tensor_views(model)) {
            if (drop_entity_weights && v.name == "anchors.T") continue;
            if (!ckpt.find(v.name)) {
                throw std::runtime_error("checkpoint is missing tensor '" + v.name + "'");
            }
        }
    }
    if (drop_entity_weights) model.anchors.drop_entity_weights();
}

bool restore_moments(const Checkpoint& ckpt, ModelGrads& m, ModelGrads& v) {
    bool any = false;
    for (ModelGrads* grads : {&m, &v}) {
        const std::string prefix = grads == &m ? "adam.m." : "adam.v.";
        for (const TensorView& view : tensor_views(*grads)) {
            const NamedTensor* t = ckpt.find(prefix + view.name);
            if (!t) continue;
            any = true;
            if (t->values.size() != view.size()) {
                throw std::runtime_error("moment tensor '" + t->name + "' has " +
                                         std::to_string(t->values.size()) + " values, expected " +
                                         std::to_string(view.size()));
            }
            std::memcpy(view.data, t->values.data(), t->values.size() * sizeof(double));
        }
    }
    return any;
}

} // namespace akgc
