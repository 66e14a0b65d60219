#include "msr/train/loader.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>

namespace msr::train {

std::size_t loader_threads() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MSR_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
    }
    return n;
}

std::vector<data::SamplePair> load_split(const std::filesystem::path& root, const std::string& split,
                                         std::size_t threads) {
    const data::DatasetManifest manifest = data::load_manifest(root / (split + ".json"));
    const std::size_t n = manifest.entries.size();
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) return data::load_samples(root, manifest);

    // Each worker loads a contiguous slice into its own buffer.
    std::vector<std::vector<data::SamplePair>> parts(workers);
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    data::DatasetManifest slice = manifest;
                    slice.entries.assign(manifest.entries.begin() + static_cast<std::ptrdiff_t>(w * n / workers),
                                         manifest.entries.begin() + static_cast<std::ptrdiff_t>((w + 1) * n / workers));
                    parts[w] = data::load_samples(root, slice);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<data::SamplePair> out;
    out.reserve(n);
    for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
    // Shapes must agree across slices too.
    for (const auto& s : out) {
        if (s.x_tar.height != out.front().x_tar.height || s.x_tar.width != out.front().x_tar.width) {
            throw ShapeError("split " + split + " mixes image sizes");
        }
    }
    return out;
}

}  // namespace msr::train
