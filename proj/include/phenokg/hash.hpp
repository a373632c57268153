#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace phenokg {

// Minimal SHA-256, enough for artifact checksums and fixture keys.
class Sha256 {
  public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    // hex digest; finalizes a copy so the object can keep accumulating
    std::string hex() const;

  private:
    void process_block(const uint8_t* p);
    void finalize(uint8_t out[32]) const;

    uint32_t h_[8];
    uint64_t total_len_ = 0;
    uint8_t buf_[64];
    size_t buf_len_ = 0;
};

std::string sha256_hex(std::string_view data);

// First 16 hex chars; used as fixture/cache file keys.
std::string short_hash(std::string_view data);

}  // namespace phenokg
