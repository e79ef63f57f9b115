#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <unordered_map>

#include "jbw/class_parser.hpp"
#include "jbw/zip.hpp"

namespace jbw {

// Supplies lazily parsed ClassFiles by interned name. Returned pointers stay
// valid for the provider's lifetime.
class ClassProvider {
 public:
  virtual ~ClassProvider() = default;
  // nullptr if the class is unknown to this provider.
  virtual const ClassFile* find(ClassNameId name) = 0;
  // Names of all classes the provider can supply, without parsing any of
  // them. Sorted for reproducible output.
  virtual std::vector<std::string> class_names() = 0;
  virtual std::shared_ptr<InternPool> intern_pool() = 0;
};

// Classpath over directory and jar roots. Earlier roots shadow later ones;
// within one root a duplicate entry is a warning and the first wins.
class Classpath : public ClassProvider {
 public:
  Classpath(std::vector<std::string> roots, std::shared_ptr<InternPool> pool)
      : pool_(std::move(pool)) {
    for (const auto& root : roots) add_root(root);
  }

  const ClassFile* find(ClassNameId name) override {
    auto cached = cache_.find(name);
    if (cached != cache_.end()) return cached->second.get();
    const std::string& dotted = pool_->class_name_of(name);
    auto loc = locations_.find(internal_name(dotted) + ".class");
    if (loc == locations_.end()) return nullptr;
    std::vector<u1> bytes = load_bytes(loc->second);
    ClassFile cf;
    try {
      cf = parse_class(bytes, pool_);
    } catch (const Error& e) {
      throw ClasspathError("failed to parse " + dotted + ": " + e.what());
    }
    if (cf.this_class != name)
      throw ClasspathError("classpath entry for " + dotted + " declares class " +
                           pool_->class_name_of(cf.this_class));
    auto owned = std::make_unique<ClassFile>(std::move(cf));
    const ClassFile* out = owned.get();
    cache_.emplace(name, std::move(owned));
    return out;
  }

  std::vector<std::string> class_names() override {
    std::vector<std::string> out;
    for (const auto& [path, loc] : locations_) {
      std::string dotted = dotted_name(path.substr(0, path.size() - 6));
      out.push_back(std::move(dotted));
    }
    return out;  // map iteration is already sorted
  }

  std::shared_ptr<InternPool> intern_pool() override { return pool_; }

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Location {
    int root;                       // index into jars_/dirs layering
    std::shared_ptr<ZipReader> jar;  // set for jar roots
    std::string fs_path;             // set for directory roots
    std::string entry;               // jar entry name
  };

  void add_root(const std::string& root) {
    namespace fs = std::filesystem;
    fs::path p(root);
    if (!fs::exists(p)) throw ClasspathError("classpath root does not exist: " + root);
    int root_idx = root_count_++;
    if (fs::is_directory(p)) {
      for (auto& e : fs::recursive_directory_iterator(p)) {
        if (!e.is_regular_file() || e.path().extension() != ".class") continue;
        std::string rel = fs::relative(e.path(), p).generic_string();
        record(rel, Location{root_idx, nullptr, e.path().string(), {}});
      }
      return;
    }
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ClasspathError("cannot read classpath root: " + root);
    std::vector<u1> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::shared_ptr<ZipReader> jar;
    try {
      jar = std::make_shared<ZipReader>(std::move(data));
    } catch (const Error& e) {
      throw ClasspathError("bad jar " + root + ": " + e.what());
    }
    for (const auto& [name, rec] : jar->entries()) {
      if (name.size() < 7 || name.substr(name.size() - 6) != ".class") continue;
      record(name, Location{root_idx, jar, {}, name});
    }
  }

  void record(const std::string& entry_path, Location loc) {
    auto it = locations_.find(entry_path);
    if (it == locations_.end()) {
      locations_.emplace(entry_path, std::move(loc));
      return;
    }
    if (it->second.root == loc.root)
      warnings_.push_back("duplicate class " + entry_path + " in one root; first wins");
    // earlier roots shadow later ones: keep the existing record
  }

  std::vector<u1> load_bytes(const Location& loc) {
    if (loc.jar) return loc.jar->read(loc.entry);
    std::ifstream in(loc.fs_path, std::ios::binary);
    if (!in) throw ClasspathError("cannot read " + loc.fs_path);
    return std::vector<u1>((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
  }

  std::shared_ptr<InternPool> pool_;
  std::map<std::string, Location> locations_;  // "a/b/C.class" -> where
  std::unordered_map<ClassNameId, std::unique_ptr<ClassFile>> cache_;
  std::vector<std::string> warnings_;
  int root_count_ = 0;
};

// In-memory provider for tests and synthesized programs.
class MemoryClasspath : public ClassProvider {
 public:
  explicit MemoryClasspath(std::shared_ptr<InternPool> pool) : pool_(std::move(pool)) {}

  void add(std::vector<u1> bytes) {
    pending_.push_back(std::move(bytes));
    // Peek the name without a full parse: parse eagerly but keep laziness of
    // bodies (parse_class never decodes code).
    ClassFile cf = parse_class(pending_.back(), pool_);
    ClassNameId name = cf.this_class;
    if (!cache_.count(name)) cache_.emplace(name, std::make_unique<ClassFile>(std::move(cf)));
  }

  void add_class(ClassFile cf) {
    if (!cache_.count(cf.this_class))
      cache_.emplace(cf.this_class, std::make_unique<ClassFile>(std::move(cf)));
  }

  const ClassFile* find(ClassNameId name) override {
    auto it = cache_.find(name);
    return it == cache_.end() ? nullptr : it->second.get();
  }

  std::vector<std::string> class_names() override {
    std::vector<std::string> out;
    for (const auto& [name, cf] : cache_) out.push_back(pool_->class_name_of(name));
    std::sort(out.begin(), out.end());
    return out;
  }

  std::shared_ptr<InternPool> intern_pool() override { return pool_; }

 private:
  std::shared_ptr<InternPool> pool_;
  std::unordered_map<ClassNameId, std::unique_ptr<ClassFile>> cache_;
  std::vector<std::vector<u1>> pending_;
};

}  // namespace jbw
