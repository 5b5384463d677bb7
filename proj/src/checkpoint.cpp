#include "edp/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace edp {

namespace {

constexpr char kMagic[8] = {'E', 'D', 'P', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

// This format is little-endian on disk; written via memcpy on LE hosts.
template <typename T>
void put(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

void put_entry(std::ofstream& f, const std::string& name, const Shape& shape,
               const std::vector<double>& vals) {
    put<std::uint32_t>(f, static_cast<std::uint32_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(f, static_cast<std::uint32_t>(shape.size()));
    for (int d : shape) put<std::uint64_t>(f, static_cast<std::uint64_t>(d));
    f.write(reinterpret_cast<const char*>(vals.data()),
            static_cast<std::streamsize>(vals.size() * sizeof(double)));
}

struct Entry {
    Shape shape;
    std::vector<double> vals;
};

}  // namespace

void save_checkpoint(const std::string& path, const ParamSet& params, const Adam* adam) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("save_checkpoint: cannot open " + path);
    f.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(f, kVersion);

    std::uint32_t count = static_cast<std::uint32_t>(params.items.size());
    if (adam) count += 2 * static_cast<std::uint32_t>(params.items.size()) + 1;
    put<std::uint32_t>(f, count);

    for (const auto& [name, t] : params.items) put_entry(f, name, t.shape(), t.values());
    if (adam) {
        Adam& a = const_cast<Adam&>(*adam);
        for (size_t i = 0; i < params.items.size(); ++i) {
            const auto& [name, t] = params.items[i];
            const auto& m = i < a.moment1().size() ? a.moment1()[i]
                                                   : std::vector<double>(static_cast<size_t>(t.size()), 0.0);
            const auto& v = i < a.moment2().size() ? a.moment2()[i]
                                                   : std::vector<double>(static_cast<size_t>(t.size()), 0.0);
            put_entry(f, name + ".adam.m", t.shape(), m);
            put_entry(f, name + ".adam.v", t.shape(), v);
        }
        put_entry(f, "adam.t", Shape{1}, {static_cast<double>(a.t())});
    }
    if (!f) throw DataError("save_checkpoint: write failed for " + path);
}

void load_checkpoint(const std::string& path, ParamSet& params, Adam* adam) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("load_checkpoint: cannot open " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("load_checkpoint: bad magic in " + path);
    if (get<std::uint32_t>(f) != kVersion) throw DataError("load_checkpoint: unsupported version");

    std::uint32_t count = get<std::uint32_t>(f);
    std::map<std::string, Entry> entries;
    for (std::uint32_t e = 0; e < count; ++e) {
        std::uint32_t nlen = get<std::uint32_t>(f);
        std::string name(nlen, '\0');
        f.read(name.data(), nlen);
        std::uint32_t rank = get<std::uint32_t>(f);
        Entry ent;
        for (std::uint32_t r = 0; r < rank; ++r)
            ent.shape.push_back(static_cast<int>(get<std::uint64_t>(f)));
        ent.vals.resize(static_cast<size_t>(shape_numel(ent.shape)));
        f.read(reinterpret_cast<char*>(ent.vals.data()),
               static_cast<std::streamsize>(ent.vals.size() * sizeof(double)));
        if (!f) throw DataError("load_checkpoint: truncated file " + path);
        entries[name] = std::move(ent);
    }

    for (auto& [name, t] : params.items) {
        auto it = entries.find(name);
        if (it == entries.end()) throw DataError("load_checkpoint: missing parameter " + name);
        if (it->second.shape != t.shape())
            throw DataError("load_checkpoint: shape mismatch for " + name);
        t.values() = it->second.vals;
    }
    if (adam) {
        auto it = entries.find("adam.t");
        if (it != entries.end()) {
            adam->set_t(static_cast<long>(it->second.vals[0]));
            adam->moment1().clear();
            adam->moment2().clear();
            for (auto& [name, t] : params.items) {
                adam->moment1().push_back(entries.at(name + ".adam.m").vals);
                adam->moment2().push_back(entries.at(name + ".adam.v").vals);
            }
        }
    }
}

}  // namespace edp
