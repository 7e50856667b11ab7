#pragma once

#include <filesystem>
#include <string>

#include "phaseclf/phaseclf.hpp"

namespace phaseclf::test_support {

/// Synthetic corpus run through the real preparation pipeline.
inline PreparedData synth_prepared(const SynthProfile& profile, std::size_t max_len) {
    const auto records = generate_corpus(profile);
    CleaningStats stats{records.size(), records.size(), 0, 0};
    PrepConfig prep;
    prep.max_len = max_len;
    return encode_records(records, stats, prep, LabelSchema::default_schema());
}

inline SynthProfile small_profile(std::size_t n, double noise, std::uint64_t seed) {
    auto p = SynthProfile::defaults();
    p.num_records = n;
    p.label_noise = noise;
    p.seed = seed;
    return p;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("phaseclf_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) { return read_file(p.string()); }

}  // namespace phaseclf::test_support
