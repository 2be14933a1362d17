#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace devforge::model_io {

static_assert(std::endian::native == std::endian::little,
              "model container assumes a little-endian host");

struct CorruptModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatVersionMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::array<char, 4> kMagic = {'D', 'V', '2', 'V'};
inline constexpr std::uint16_t kFormatVersion = 1;

struct NamedMatrix {
    std::string name;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<float> data;  // row-major, rows*cols
};

struct Container {
    nlohmann::json header;
    std::vector<NamedMatrix> matrices;
};

namespace detail {

inline std::uint32_t crc32_update(std::uint32_t crc, const void* bytes, std::size_t n) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) {
                c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            }
            t[i] = c;
        }
        return t;
    }();
    const auto* p = static_cast<const unsigned char*>(bytes);
    crc ^= 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i) {
        crc = table[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
    }
    return crc ^ 0xFFFFFFFFu;
}

class CrcWriter {
  public:
    explicit CrcWriter(std::ostream& out) : out_(out) {}

    void write(const void* bytes, std::size_t n) {
        out_.write(static_cast<const char*>(bytes), static_cast<std::streamsize>(n));
        crc_ = crc32_update(crc_, bytes, n);
    }

    template <typename T>
    void write_scalar(T value) {
        write(&value, sizeof(T));
    }

    std::uint32_t crc() const { return crc_; }

  private:
    std::ostream& out_;
    std::uint32_t crc_ = 0;
};

}  // namespace detail

// Layout: magic | u16 version | u64 header length | header JSON (compact,
// with a "matrices" shape list) | row-major float32 matrix payloads in
// listed order | u32 CRC32 of all preceding bytes.
inline void save_container(std::ostream& out, nlohmann::json header,
                           const std::vector<NamedMatrix>& matrices) {
    nlohmann::json shapes = nlohmann::json::array();
    for (const auto& m : matrices) {
        if (m.data.size() != m.rows * m.cols) {
            throw std::logic_error("matrix '" + m.name + "' shape/data mismatch");
        }
        shapes.push_back({m.name, m.rows, m.cols});
    }
    header["matrices"] = std::move(shapes);
    const std::string header_bytes = header.dump();

    detail::CrcWriter w(out);
    w.write(kMagic.data(), kMagic.size());
    w.write_scalar<std::uint16_t>(kFormatVersion);
    w.write_scalar<std::uint64_t>(header_bytes.size());
    w.write(header_bytes.data(), header_bytes.size());
    for (const auto& m : matrices) {
        if (!m.data.empty()) {
            w.write(m.data.data(), m.data.size() * sizeof(float));
        }
    }
    std::uint32_t crc = w.crc();
    out.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
    if (!out) {
        throw CorruptModelError("write failed");
    }
}

inline void save_container(const std::filesystem::path& path, nlohmann::json header,
                           const std::vector<NamedMatrix>& matrices) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw CorruptModelError("cannot open for writing: " + path.string());
    }
    save_container(out, std::move(header), matrices);
}

inline Container load_container(const std::string& bytes) {
    constexpr std::size_t kPrefix = 4 + sizeof(std::uint16_t) + sizeof(std::uint64_t);
    if (bytes.size() < kPrefix + sizeof(std::uint32_t)) {
        throw CorruptModelError("file too short for container prefix");
    }
    if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
        throw CorruptModelError("bad magic bytes");
    }
    std::uint16_t version = 0;
    std::memcpy(&version, bytes.data() + 4, sizeof(version));
    if (version != kFormatVersion) {
        throw FormatVersionMismatchError(
            "model format version " + std::to_string(version) +
            ", this build reads version " + std::to_string(kFormatVersion));
    }
    std::uint64_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + 6, sizeof(header_len));
    if (kPrefix + header_len + sizeof(std::uint32_t) > bytes.size()) {
        throw CorruptModelError("declared header exceeds file size");
    }

    std::uint32_t stored_crc = 0;
    std::memcpy(&stored_crc, bytes.data() + bytes.size() - sizeof(stored_crc),
                sizeof(stored_crc));
    std::uint32_t actual_crc =
        detail::crc32_update(0, bytes.data(), bytes.size() - sizeof(stored_crc));
    if (stored_crc != actual_crc) {
        throw CorruptModelError("checksum mismatch");
    }

    Container c;
    c.header = nlohmann::json::parse(
        bytes.begin() + static_cast<std::ptrdiff_t>(kPrefix),
        bytes.begin() + static_cast<std::ptrdiff_t>(kPrefix + header_len), nullptr,
        false);
    if (c.header.is_discarded() || !c.header.contains("matrices")) {
        throw CorruptModelError("malformed container header");
    }

    std::size_t offset = kPrefix + header_len;
    const std::size_t payload_end = bytes.size() - sizeof(std::uint32_t);
    for (const auto& shape : c.header["matrices"]) {
        NamedMatrix m;
        m.name = shape.at(0).get<std::string>();
        m.rows = shape.at(1).get<std::uint64_t>();
        m.cols = shape.at(2).get<std::uint64_t>();
        const std::uint64_t available = payload_end - offset;
        if (m.rows != 0 && m.cols > available / sizeof(float) / m.rows) {
            throw CorruptModelError("matrix shape exceeds payload: " + m.name);
        }
        const std::size_t n_bytes = m.rows * m.cols * sizeof(float);
        if (offset + n_bytes > payload_end) {
            throw CorruptModelError("matrix payload truncated: " + m.name);
        }
        m.data.resize(m.rows * m.cols);
        if (n_bytes > 0) {
            std::memcpy(m.data.data(), bytes.data() + offset, n_bytes);
        }
        offset += n_bytes;
        c.matrices.push_back(std::move(m));
    }
    if (offset != payload_end) {
        throw CorruptModelError("trailing bytes after matrix payloads");
    }
    return c;
}

inline Container load_container(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorruptModelError("cannot open: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_container(buf.str());
}

}  // namespace devforge::model_io
