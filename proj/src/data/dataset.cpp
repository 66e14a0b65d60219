#include "msr/data/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"
#include "msr/data/phantom.hpp"
#include "msr/data/tensor_io.hpp"
#include "msr/error.hpp"

namespace msr::data {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<const char*, 3> kSplits{"train", "val", "test"};

ManifestEntry entry_for(std::size_t index) {
    const std::string id = sample_id(index);
    return {id, "samples/" + id + "_aux.msrt", "samples/" + id + "_tar.msrt",
            "samples/" + id + "_lr.msrt"};
}

}  // namespace

SplitSizes split_sizes(std::size_t count, const SplitRatios& r) {
    const std::size_t total = r.train + r.val + r.test;
    if (total == 0) throw ConfigError("split ratios must not all be zero");
    SplitSizes s;
    s.train = count * r.train / total;
    s.val = count * r.val / total;
    s.test = count - s.train - s.val;
    return s;
}

void validate(const DatasetSpec& spec) {
    if (spec.count < 10) throw ConfigError("dataset count must be >= 10");
    if (spec.height < 16 || spec.width < 16) throw ConfigError("image size must be >= 16");
    if (spec.n_shapes < 1) throw ConfigError("n_shapes must be >= 1");
    fourier::ScaleFactor(static_cast<int>(spec.scale)).require_divides(spec.height, spec.width);
}

std::string sample_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sample_%05zu", index);
    return buf;
}

SamplePair make_sample(const DatasetSpec& spec, std::size_t index) {
    std::optional<std::uint64_t> aux;
    if (spec.aux_seed) aux = mix_seed(*spec.aux_seed, index);
    PhantomPair p = generate_phantom(mix_seed(spec.seed, index), spec.height, spec.width,
                                     spec.n_shapes, aux);
    const fourier::ScaleFactor s(static_cast<int>(spec.scale));
    // Stored values are float32; round before degrading so that re-running
    // degrade on a loaded x_tar reproduces the stored y_tar bit for bit.
    auto to_f32 = [](fourier::Image& img) {
        for (double& v : img.data) v = static_cast<double>(static_cast<float>(v));
    };
    SamplePair out;
    out.id = sample_id(index);
    out.x_aux = std::move(p.aux);
    out.x_tar = std::move(p.tar);
    to_f32(out.x_aux);
    to_f32(out.x_tar);
    out.y_tar = fourier::degrade(out.x_tar, s);
    to_f32(out.y_tar);
    out.scale = spec.scale;
    return out;
}

std::array<DatasetManifest, 3> build_dataset(const DatasetSpec& spec) {
    validate(spec);
    const SplitSizes sizes = split_sizes(spec.count, spec.ratios);
    const std::array<std::size_t, 3> counts{sizes.train, sizes.val, sizes.test};
    std::array<DatasetManifest, 3> out;
    std::size_t next = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        out[k].split = kSplits[k];
        out[k].seed = spec.seed;
        out[k].scale = spec.scale;
        for (std::size_t i = 0; i < counts[k]; ++i) out[k].entries.push_back(entry_for(next++));
    }
    return out;
}

InMemoryDataset generate_dataset(const DatasetSpec& spec) {
    const auto manifests = build_dataset(spec);
    InMemoryDataset ds;
    std::array<std::vector<SamplePair>*, 3> dst{&ds.train, &ds.val, &ds.test};
    std::size_t index = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t i = 0; i < manifests[k].entries.size(); ++i) {
            dst[k]->push_back(make_sample(spec, index++));
        }
    }
    return ds;
}

void write_dataset(const DatasetSpec& spec, const fs::path& root) {
    const auto manifests = build_dataset(spec);
    std::error_code ec;
    fs::create_directories(root / "samples", ec);
    if (ec) throw IoError("cannot create dataset directory " + root.string() + ": " + ec.message());
    std::size_t index = 0;
    for (const auto& m : manifests) {
        for (const auto& e : m.entries) {
            const SamplePair s = make_sample(spec, index++);
            save_image(root / e.aux, s.x_aux);
            save_image(root / e.tar, s.x_tar);
            save_image(root / e.lr, s.y_tar);
        }
        save_manifest(root / (m.split + ".json"), m);
    }
}

void save_manifest(const fs::path& path, const DatasetManifest& m) {
    json j;
    j["seed"] = m.seed;
    j["scale"] = m.scale;
    j["split"] = m.split;
    j["entries"] = json::array();
    for (const auto& e : m.entries) {
        j["entries"].push_back({{"id", e.id}, {"aux", e.aux}, {"tar", e.tar}, {"lr", e.lr}});
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write manifest " + path.string());
    f << j.dump(2) << '\n';
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read manifest " + path.string());
    DatasetManifest m;
    try {
        const json j = json::parse(f);
        m.seed = j.at("seed").get<std::uint64_t>();
        m.scale = j.at("scale").get<std::size_t>();
        m.split = j.at("split").get<std::string>();
        for (const auto& e : j.at("entries")) {
            m.entries.push_back({e.at("id").get<std::string>(), e.at("aux").get<std::string>(),
                                 e.at("tar").get<std::string>(), e.at("lr").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw ParseError(ParseErrorKind::kBadJson, "manifest " + path.string() + ": " + e.what());
    }
    std::set<std::string> ids;
    for (const auto& e : m.entries) {
        if (!ids.insert(e.id).second) {
            throw ParseError(ParseErrorKind::kBadJson, "duplicate sample id " + e.id);
        }
    }
    return m;
}

std::vector<SamplePair> load_samples(const fs::path& root, const DatasetManifest& m) {
    std::vector<SamplePair> out;
    out.reserve(m.entries.size());
    for (const auto& e : m.entries) {
        SamplePair s;
        s.id = e.id;
        s.x_aux = load_image(root / e.aux);
        s.x_tar = load_image(root / e.tar);
        s.y_tar = load_image(root / e.lr);
        s.scale = m.scale;
        if (s.x_aux.height != s.x_tar.height || s.x_aux.width != s.x_tar.width ||
            s.y_tar.height * m.scale != s.x_tar.height || s.y_tar.width * m.scale != s.x_tar.width) {
            throw ShapeError("sample " + e.id + " has inconsistent shapes");
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace msr::data
