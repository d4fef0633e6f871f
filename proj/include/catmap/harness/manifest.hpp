#pragma once

// Run manifest: resolved config, content hashes, library versions.

#include <cstdio>
#include <string>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "../errors.hpp"

namespace catmap::harness {

inline constexpr const char* kLibraryVersion = "1.0.0";

// Hex SHA-1 of "blob <size>\0<content>", the hash git assigns to a file.
inline std::string git_blob_hash(const std::string& content)
{
    std::string data = "blob " + std::to_string(content.size());
    data.push_back('\0');
    data += content;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1)
        throw Error("SHA-1 digest failed");
    std::string hex;
    char buf[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

inline nlohmann::json library_versions()
{
    return {{"catmap", kLibraryVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                          std::to_string(BOOST_VERSION % 100)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

} // namespace catmap::harness
