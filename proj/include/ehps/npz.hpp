#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include <zlib.h>

#include "ehps/errors.hpp"
#include "ehps/npy.hpp"

namespace ehps {

// Ordered name -> array map backing the .npz container. Order is preserved so
// writes are deterministic.
struct NpzArchive {
  std::vector<std::pair<std::string, ArrayRecord>> entries;

  bool contains(const std::string& name) const { return find(name) != nullptr; }

  const ArrayRecord* find(const std::string& name) const {
    for (const auto& [n, rec] : entries)
      if (n == name) return &rec;
    return nullptr;
  }

  const ArrayRecord& at(const std::string& name) const {
    const ArrayRecord* rec = find(name);
    require(rec != nullptr, errc::missing_key, "archive has no member '" + name + "'");
    return *rec;
  }

  void insert(const std::string& name, ArrayRecord rec) {
    require(!contains(name), errc::duplicate_member, "duplicate archive member '" + name + "'");
    entries.emplace_back(name, std::move(rec));
  }

  // Replaces if present, inserts otherwise.
  void put(const std::string& name, ArrayRecord rec) {
    for (auto& [n, r] : entries) {
      if (n == name) {
        r = std::move(rec);
        return;
      }
    }
    entries.emplace_back(name, std::move(rec));
  }
};

namespace zip_detail {

inline constexpr std::uint32_t kLocalSig = 0x04034b50;
inline constexpr std::uint32_t kCentralSig = 0x02014b50;
inline constexpr std::uint32_t kEocdSig = 0x06054b50;

inline std::uint16_t rd16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t rd32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void wr16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}
inline void wr32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

inline std::uint32_t crc(const unsigned char* p, std::size_t n) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(p), static_cast<uInt>(n)));
}

// Raw-deflate decompression (zip method 8 stores the stream without the zlib
// wrapper, hence windowBits -15).
inline std::vector<unsigned char> inflate_raw(const unsigned char* src, std::size_t src_len,
                                              std::size_t dst_len) {
  std::vector<unsigned char> out(dst_len);
  z_stream zs;
  std::memset(&zs, 0, sizeof(zs));
  if (inflateInit2(&zs, -15) != Z_OK) {
    fail(errc::zip_corrupt, "inflate initialization failed");
  }
  zs.next_in = const_cast<Bytef*>(reinterpret_cast<const Bytef*>(src));
  zs.avail_in = static_cast<uInt>(src_len);
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(dst_len);
  const int rc = inflate(&zs, Z_FINISH);
  const bool ok = rc == Z_STREAM_END && zs.total_out == dst_len;
  inflateEnd(&zs);
  require(ok, errc::zip_corrupt, "deflate stream is corrupt or has the wrong length");
  return out;
}

// npz member names conventionally carry a ".npy" suffix; keys do not.
inline std::string strip_npy_suffix(const std::string& name) {
  if (name.size() > 4 && name.compare(name.size() - 4, 4, ".npy") == 0) {
    return name.substr(0, name.size() - 4);
  }
  return name;
}

}  // namespace zip_detail

// Parse a .npz (zip of .npy members). Stored and deflated members are both
// readable; CRCs are verified.
inline NpzArchive read_npz(const unsigned char* bytes, std::size_t size) {
  using namespace zip_detail;
  NpzArchive ar;
  // End-of-central-directory: scan backwards over the (possibly present)
  // comment for the signature.
  require(size >= 22, errc::zip_corrupt, "file too small to be a zip archive");
  std::size_t eocd = size;  // sentinel: not found
  const std::size_t scan_limit = size - 22 > 65535 ? size - 22 - 65535 : 0;
  for (std::size_t at = size - 22 + 1; at-- > scan_limit;) {
    if (rd32(bytes + at) == kEocdSig) {
      eocd = at;
      break;
    }
  }
  require(eocd != size, errc::zip_corrupt, "zip end-of-central-directory not found");
  const std::uint16_t disk = rd16(bytes + eocd + 4);
  const std::uint16_t entry_count = rd16(bytes + eocd + 10);
  const std::uint32_t cd_size = rd32(bytes + eocd + 12);
  const std::uint32_t cd_off = rd32(bytes + eocd + 16);
  require(disk == 0, errc::zip_corrupt, "multi-disk zip archives are not supported");
  require(entry_count != 0xFFFF && cd_off != 0xFFFFFFFFu, errc::zip_corrupt,
          "zip64 archives are not supported");
  require(static_cast<std::size_t>(cd_off) + cd_size <= size, errc::zip_corrupt,
          "zip central directory lies outside the file");

  std::size_t at = cd_off;
  for (std::uint16_t i = 0; i < entry_count; ++i) {
    require(at + 46 <= size && rd32(bytes + at) == kCentralSig, errc::zip_corrupt,
            "zip central directory entry is corrupt");
    const std::uint16_t method = rd16(bytes + at + 10);
    const std::uint32_t crc_expect = rd32(bytes + at + 16);
    const std::uint32_t csize = rd32(bytes + at + 20);
    const std::uint32_t usize = rd32(bytes + at + 24);
    const std::uint16_t name_len = rd16(bytes + at + 28);
    const std::uint16_t extra_len = rd16(bytes + at + 30);
    const std::uint16_t comment_len = rd16(bytes + at + 32);
    const std::uint32_t local_off = rd32(bytes + at + 42);
    require(at + 46 + name_len <= size, errc::zip_corrupt, "zip entry name is truncated");
    const std::string raw_name(reinterpret_cast<const char*>(bytes + at + 46), name_len);
    at += 46 + static_cast<std::size_t>(name_len) + extra_len + comment_len;

    require(method == 0 || method == 8, errc::zip_corrupt,
            "zip member '" + raw_name + "' uses an unsupported compression method");
    require(static_cast<std::size_t>(local_off) + 30 <= size &&
                rd32(bytes + local_off) == kLocalSig,
            errc::zip_corrupt, "zip local header of '" + raw_name + "' is corrupt");
    const std::uint16_t l_name_len = rd16(bytes + local_off + 26);
    const std::uint16_t l_extra_len = rd16(bytes + local_off + 28);
    const std::size_t data_at =
        static_cast<std::size_t>(local_off) + 30 + l_name_len + l_extra_len;
    require(data_at + csize <= size, errc::zip_corrupt,
            "zip member '" + raw_name + "' data is truncated");

    std::vector<unsigned char> member;
    if (method == 0) {
      require(csize == usize, errc::zip_corrupt,
              "stored zip member '" + raw_name + "' has inconsistent sizes");
      member.assign(bytes + data_at, bytes + data_at + csize);
    } else {
      member = zip_detail::inflate_raw(bytes + data_at, csize, usize);
    }
    require(zip_detail::crc(member.data(), member.size()) == crc_expect, errc::zip_corrupt,
            "zip member '" + raw_name + "' fails its CRC check");

    ar.insert(zip_detail::strip_npy_suffix(raw_name), read_npy(member));
  }
  return ar;
}

inline NpzArchive read_npz(const std::vector<unsigned char>& bytes) {
  return read_npz(bytes.data(), bytes.size());
}

// Serialize as zip with stored (uncompressed) members and zeroed timestamps:
// byte-for-byte deterministic for a given archive.
inline std::vector<unsigned char> write_npz(const NpzArchive& ar) {
  using namespace zip_detail;
  std::vector<unsigned char> out;
  struct CdEntry {
    std::string name;
    std::uint32_t crc, size, offset;
  };
  std::vector<CdEntry> cd;

  for (const auto& [key, rec] : ar.entries) {
    const std::vector<unsigned char> payload = write_npy(rec);
    const std::string name = key + ".npy";
    require(payload.size() <= 0xFFFFFFFFull, errc::invalid_argument,
            "zip member too large for a non-zip64 archive");
    CdEntry e;
    e.name = name;
    e.crc = crc(payload.data(), payload.size());
    e.size = static_cast<std::uint32_t>(payload.size());
    e.offset = static_cast<std::uint32_t>(out.size());
    cd.push_back(e);

    wr32(out, kLocalSig);
    wr16(out, 20);       // version needed
    wr16(out, 0);        // flags
    wr16(out, 0);        // method: stored
    wr16(out, 0);        // mod time
    wr16(out, 0x21);     // mod date (1980-01-01)
    wr32(out, e.crc);
    wr32(out, e.size);   // compressed
    wr32(out, e.size);   // uncompressed
    wr16(out, static_cast<std::uint16_t>(name.size()));
    wr16(out, 0);        // extra len
    out.insert(out.end(), name.begin(), name.end());
    out.insert(out.end(), payload.begin(), payload.end());
  }

  const std::uint32_t cd_off = static_cast<std::uint32_t>(out.size());
  for (const CdEntry& e : cd) {
    wr32(out, kCentralSig);
    wr16(out, 20);  // version made by
    wr16(out, 20);  // version needed
    wr16(out, 0);   // flags
    wr16(out, 0);   // method
    wr16(out, 0);   // mod time
    wr16(out, 0x21);
    wr32(out, e.crc);
    wr32(out, e.size);
    wr32(out, e.size);
    wr16(out, static_cast<std::uint16_t>(e.name.size()));
    wr16(out, 0);  // extra
    wr16(out, 0);  // comment
    wr16(out, 0);  // disk
    wr16(out, 0);  // internal attrs
    wr32(out, 0);  // external attrs
    wr32(out, e.offset);
    out.insert(out.end(), e.name.begin(), e.name.end());
  }
  const std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_off;

  wr32(out, kEocdSig);
  wr16(out, 0);  // disk
  wr16(out, 0);  // cd start disk
  wr16(out, static_cast<std::uint16_t>(cd.size()));
  wr16(out, static_cast<std::uint16_t>(cd.size()));
  wr32(out, cd_size);
  wr32(out, cd_off);
  wr16(out, 0);  // comment length
  return out;
}

inline NpzArchive load_npz(const std::string& path) { return read_npz(read_file_bytes(path)); }

inline void save_npz(const std::string& path, const NpzArchive& ar) {
  write_file_bytes(path, write_npz(ar));
}

}  // namespace ehps
