#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spinekpt/annotation_io.hpp"
#include "spinekpt/pgm.hpp"
#include "spinekpt/synth.hpp"

namespace spinekpt {

struct ManifestEntry {
    std::string image;       // file names relative to the dataset directory
    std::string annotation;
    std::string split;       // train | val | test
};

/// 60/20/20 split by index: the first 60% of samples train, the next 20%
/// validate, the rest test.
inline std::string split_for_index(int index, int count) {
    const int n_train = count * 6 / 10;
    const int n_val = count * 2 / 10;
    if (index < n_train) return "train";
    if (index < n_train + n_val) return "val";
    return "test";
}

inline void write_manifest(const std::vector<ManifestEntry>& entries,
                           const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_manifest: cannot open " + path);
    for (const ManifestEntry& e : entries)
        os << e.image << " " << e.annotation << " " << e.split << "\n";
    if (!os) throw std::runtime_error("write_manifest: write failed: " + path);
}

inline std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_manifest: cannot open " + path);
    std::vector<ManifestEntry> entries;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        ManifestEntry e;
        if (!(ls >> e.image >> e.annotation >> e.split))
            throw std::runtime_error("read_manifest: bad line: " + line);
        entries.push_back(e);
    }
    return entries;
}

/// Generates `count` PGM + annotation pairs with sequential seeds and writes
/// the split manifest. Returns the manifest entries.
inline std::vector<ManifestEntry> generate_dataset(int count, SpineGenConfig base_cfg,
                                                   const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<ManifestEntry> entries;
    for (int i = 0; i < count; ++i) {
        SpineGenConfig cfg = base_cfg;
        cfg.seed = base_cfg.seed + static_cast<std::uint64_t>(i);
        const SpineSample sample = generate_sample(cfg);

        char stem[32];
        std::snprintf(stem, sizeof(stem), "sample_%04d", i);
        ManifestEntry e;
        e.image = std::string(stem) + ".pgm";
        e.annotation = std::string(stem) + ".json";
        e.split = split_for_index(i, count);

        write_pgm(sample.image, (fs::path(out_dir) / e.image).string());
        AnnotationFile file;
        file.image = e.image;
        file.annotation = sample.annotation;
        write_annotation(file, (fs::path(out_dir) / e.annotation).string());
        entries.push_back(std::move(e));
    }
    write_manifest(entries, (fs::path(out_dir) / "manifest.txt").string());
    return entries;
}

struct DatasetSample {
    Tensor image;
    SpineAnnotation annotation;
    std::string image_name;
};

/// Loads every sample of one split from a generated dataset directory.
inline std::vector<DatasetSample> load_split(const std::string& data_dir,
                                             const std::string& split) {
    namespace fs = std::filesystem;
    const auto entries = read_manifest((fs::path(data_dir) / "manifest.txt").string());
    std::vector<DatasetSample> samples;
    for (const ManifestEntry& e : entries) {
        if (e.split != split) continue;
        DatasetSample s;
        s.image = read_pgm((fs::path(data_dir) / e.image).string());
        s.annotation = read_annotation((fs::path(data_dir) / e.annotation).string()).annotation;
        s.image_name = e.image;
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace spinekpt
