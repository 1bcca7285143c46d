#include "martsia/store/datastore.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>

#include "martsia/error.hpp"
#include "martsia/rng.hpp"

namespace martsia::store {

namespace fs = std::filesystem;

namespace {

void require_content(ByteView content) {
  if (content.empty()) fail(Errc::EmptyContent, "refusing to store empty content");
}

void verify(const Rloc& rloc, ByteView bytes) {
  if (Rloc::of(bytes) != rloc) {
    fail(Errc::IntegrityFailure, "stored bytes do not hash to " + rloc.text(), rloc.text());
  }
}

}  // namespace

// ---- memory ---------------------------------------------------------------

Rloc MemoryStore::put(ByteView content) {
  require_content(content);
  auto rloc = Rloc::of(content);
  std::lock_guard lock(mu_);
  objects_.try_emplace(rloc, content.begin(), content.end());
  return rloc;
}

Bytes MemoryStore::get(const Rloc& rloc) const {
  std::lock_guard lock(mu_);
  auto it = objects_.find(rloc);
  if (it == objects_.end()) fail(Errc::NotFound, "no object " + rloc.text(), rloc.text());
  verify(rloc, it->second);
  return it->second;
}

bool MemoryStore::contains(const Rloc& rloc) const {
  std::lock_guard lock(mu_);
  return objects_.count(rloc) != 0;
}

std::vector<Rloc> MemoryStore::list() const {
  std::lock_guard lock(mu_);
  std::vector<Rloc> out;
  for (const auto& [rloc, _] : objects_) out.push_back(rloc);
  return out;
}

// ---- directory ------------------------------------------------------------

DirectoryStore::DirectoryStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "objects", ec);
  if (ec) fail(Errc::StorageFailure, "cannot create " + (root_ / "objects").string(), ec.message());
}

fs::path DirectoryStore::object_path(const Rloc& rloc) const {
  auto hex = rloc.digest.hex();
  return root_ / "objects" / hex.substr(0, 2) / hex.substr(2);
}

Rloc DirectoryStore::put(ByteView content) {
  require_content(content);
  auto rloc = Rloc::of(content);
  auto path = object_path(rloc);
  std::error_code ec;
  if (fs::exists(path, ec)) return rloc;

  fs::create_directories(path.parent_path(), ec);
  if (ec) fail(Errc::StorageFailure, "cannot create " + path.parent_path().string(), ec.message());

  // Unique temporary name per writer; rename is atomic within a directory.
  static std::atomic<std::uint64_t> counter{0};
  SystemRng rng;
  auto tmp = path.parent_path() /
             (".tmp-" + hex_encode(rng.draw(8)) + "-" + std::to_string(counter++));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(content.data()),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      fail(Errc::StorageFailure, "write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(Errc::StorageFailure, "cannot publish " + path.string(), ec.message());
  }
  return rloc;
}

Bytes DirectoryStore::get(const Rloc& rloc) const {
  auto path = object_path(rloc);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::NotFound, "no object " + rloc.text(), rloc.text());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  verify(rloc, bytes);
  return bytes;
}

bool DirectoryStore::contains(const Rloc& rloc) const {
  std::error_code ec;
  return fs::is_regular_file(object_path(rloc), ec);
}

std::vector<Rloc> DirectoryStore::list() const {
  std::vector<Rloc> out;
  std::error_code ec;
  for (const auto& prefix : fs::directory_iterator(root_ / "objects", ec)) {
    if (!prefix.is_directory()) continue;
    for (const auto& obj : fs::directory_iterator(prefix.path(), ec)) {
      auto name = prefix.path().filename().string() + obj.path().filename().string();
      if (name.size() != 64 || name.find('.') != std::string::npos) continue;
      try {
        out.push_back(Rloc{crypto::Digest::from_hex(name)});
      } catch (const Error&) {
        // not an object file
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace martsia::store
