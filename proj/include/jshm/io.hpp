#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "jshm/common.hpp"
#include "jshm/model.hpp"

namespace jshm {

/// FNV-1a 64-bit content digest, hex encoded. Integrity marker for run
/// manifests, not a cryptographic hash.
inline std::string fnv1a_digest(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Write via a temporary sibling and rename, so readers never observe a
/// partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Model file schema: nodes[], elements[] (1-based node ids), material,
/// section, fixed_nodes[], candidate_sensor_nodes[] (1-based). SI units.
inline nlohmann::json model_to_json(const JacketModel& model) {
    if (model.materials.size() != 1 || model.sections.size() != 1)
        throw ConfigError("model file: expects exactly one material and one section");
    nlohmann::json j;
    for (const auto& n : model.nodes) j["nodes"].push_back({n.x(), n.y(), n.z()});
    for (const auto& e : model.elements) j["elements"].push_back({e.node_a + 1, e.node_b + 1});
    j["material"] = {{"elastic_modulus", model.materials[0].elastic_modulus},
                     {"density", model.materials[0].density},
                     {"poisson_ratio", model.materials[0].poisson_ratio}};
    j["section"] = {{"outer_diameter", model.sections[0].outer_diameter},
                    {"inner_diameter", model.sections[0].inner_diameter}};
    for (int f : model.fixed_nodes) j["fixed_nodes"].push_back(f + 1);
    for (int c : model.candidate_sensor_nodes) j["candidate_sensor_nodes"].push_back(c + 1);
    return j;
}

inline JacketModel model_from_json(const nlohmann::json& j) {
    try {
        JacketModel m;
        for (const auto& n : j.at("nodes"))
            m.nodes.emplace_back(n.at(0).get<double>(), n.at(1).get<double>(),
                                 n.at(2).get<double>());
        for (const auto& e : j.at("elements"))
            m.elements.push_back({e.at(0).get<int>() - 1, e.at(1).get<int>() - 1, 0, 0});
        const auto& mat = j.at("material");
        m.materials.push_back({mat.at("elastic_modulus").get<double>(),
                               mat.at("density").get<double>(),
                               mat.at("poisson_ratio").get<double>()});
        const auto& sec = j.at("section");
        m.sections.push_back(
            {sec.at("outer_diameter").get<double>(), sec.at("inner_diameter").get<double>()});
        for (const auto& f : j.at("fixed_nodes")) m.fixed_nodes.push_back(f.get<int>() - 1);
        for (const auto& c : j.at("candidate_sensor_nodes"))
            m.candidate_sensor_nodes.push_back(c.get<int>() - 1);
        m.finalize();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model file: ") + e.what());
    }
}

inline void save_model(const JacketModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, model_to_json(model).dump(2) + "\n");
}

inline JacketModel load_model(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, true, true);
    return model_from_json(j);
}

/// Damage state file: {"alpha": [...]} with one ratio per element, in
/// element order. This is the model-update artifact the identification
/// stage feeds back.
inline nlohmann::json damage_to_json(const DamageVector& damage) {
    nlohmann::json j;
    j["alpha"] = std::vector<double>(damage.alpha.data(), damage.alpha.data() + damage.size());
    return j;
}

inline DamageVector damage_from_json(const nlohmann::json& j) {
    try {
        const auto values = j.at("alpha").get<std::vector<double>>();
        Eigen::VectorXd a(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) a[static_cast<Eigen::Index>(i)] = values[i];
        DamageVector d(std::move(a));
        d.validate();
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("damage file: ") + e.what());
    }
}

inline void save_damage(const DamageVector& damage, const std::filesystem::path& path) {
    write_file_atomic(path, damage_to_json(damage).dump(2) + "\n");
}

inline DamageVector load_damage(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, true, true);
    return damage_from_json(j);
}

}  // namespace jshm
