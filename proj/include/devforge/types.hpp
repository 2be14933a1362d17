#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace devforge {

struct UnknownLabelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The five technical job roles. Order is fixed and used for tie-breaking.
enum class RoleLabel : std::uint8_t {
    Backend = 0,
    Frontend = 1,
    Mobile = 2,
    DevOps = 3,
    DataScientist = 4,
};

inline constexpr std::array<RoleLabel, 5> kAllRoles = {
    RoleLabel::Backend, RoleLabel::Frontend, RoleLabel::Mobile,
    RoleLabel::DevOps, RoleLabel::DataScientist};

inline std::string_view to_string(RoleLabel role) {
    switch (role) {
        case RoleLabel::Backend: return "Backend";
        case RoleLabel::Frontend: return "Frontend";
        case RoleLabel::Mobile: return "Mobile";
        case RoleLabel::DevOps: return "DevOps";
        case RoleLabel::DataScientist: return "DataScientist";
    }
    throw UnknownLabelError("invalid RoleLabel value");
}

inline RoleLabel role_from_string(std::string_view name) {
    for (RoleLabel role : kAllRoles) {
        if (to_string(role) == name) {
            return role;
        }
    }
    throw UnknownLabelError("unknown role label: " + std::string(name));
}

// A token sequence tagged by the developer it belongs to. Tokens are
// lowercase and whitespace-free; tag is nonempty.
struct TaggedDocument {
    std::string tag;
    std::vector<std::string> tokens;
};

// One developer's identity, optional role, and per-source evidence.
struct DeveloperRecord {
    std::string developer_id;
    std::optional<RoleLabel> role;
    std::optional<TaggedDocument> doc_repos;
    std::optional<TaggedDocument> doc_issues;
    std::optional<std::map<std::string, std::uint64_t>> api_multiset;
};

}  // namespace devforge
