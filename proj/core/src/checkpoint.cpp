#include "erc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "erc/errors.hpp"

namespace erc {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'E', 'R', 'C', 'C', 'K', 'P', 'T', '\0'};

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  template <class T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void doubles(std::span<const double> v) {
    out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string source) : in_(in), source_(std::move(source)) {}
  template <class T>
  T pod() {
    T v{};
    read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    if (n > (1ull << 32)) fail("implausible string length");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  std::vector<double> doubles(std::size_t n) {
    std::vector<double> v(n);
    read(reinterpret_cast<char*>(v.data()), n * sizeof(double));
    return v;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("checkpoint " + source_ + ": " + what);
  }

 private:
  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated file");
  }
  std::ifstream& in_;
  std::string source_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp);
    Writer w(out);
    out.write(kMagic, sizeof kMagic);
    w.pod(Checkpoint::kVersion);
    w.str(ckpt.config.to_text());
    w.pod<std::uint64_t>(ckpt.vocab.size());
    for (const auto& t : ckpt.vocab.tokens()) w.str(t);
    w.pod<std::uint64_t>(ckpt.labels.size());
    for (const auto& l : ckpt.labels.names()) w.str(l);
    w.str(ckpt.labels.excluded_name().value_or(""));
    w.pod(ckpt.epoch);
    w.pod(ckpt.dev_score);
    auto params = const_cast<ErcModel&>(ckpt.model).params();
    w.pod<std::uint64_t>(params.size());
    for (const auto& [name, t] : params) {
      w.str(name);
      w.pod<std::uint64_t>(t->rank());
      for (auto d : t->shape()) w.pod<std::uint64_t>(d);
      w.doubles(t->data());
    }
    if (!out) throw DataError("failed writing checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  Reader r(in, path.string());
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (in.gcount() != sizeof magic || std::memcmp(magic, kMagic, sizeof magic) != 0) r.fail("bad magic");
  if (const auto v = r.pod<std::uint32_t>(); v != Checkpoint::kVersion) {
    r.fail("unsupported version " + std::to_string(v));
  }

  Checkpoint ck;
  ck.config = RunConfig::from_text(r.str());
  std::vector<std::string> tokens(r.pod<std::uint64_t>());
  for (auto& t : tokens) t = r.str();
  ck.vocab = Vocab(std::move(tokens));
  std::vector<std::string> labels(r.pod<std::uint64_t>());
  for (auto& l : labels) l = r.str();
  auto excluded = r.str();
  ck.labels = LabelMap(std::move(labels), excluded.empty() ? std::nullopt : std::optional<std::string>(excluded));
  ck.epoch = r.pod<std::int64_t>();
  ck.dev_score = r.pod<double>();

  // Build the architecture from the stored config, then overwrite every tensor.
  Rng rng(0);
  ck.model = ErcModel::init(ck.config, ck.vocab.size(), ck.labels.size(), rng);
  auto params = ck.model.params();
  std::map<std::string, Tensor*> by_name;
  for (auto& [name, t] : params) by_name[name] = t;

  const auto n = r.pod<std::uint64_t>();
  if (n != params.size()) {
    throw CompatibilityError("checkpoint holds " + std::to_string(n) + " tensors, config expects " +
                             std::to_string(params.size()));
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto name = r.str();
    const auto rank = r.pod<std::uint64_t>();
    if (rank > 3) r.fail("tensor " + name + " has rank " + std::to_string(rank));
    Shape shape(rank);
    for (auto& d : shape) d = r.pod<std::uint64_t>();
    auto it = by_name.find(name);
    if (it == by_name.end()) throw CompatibilityError("unexpected tensor '" + name + "' in checkpoint");
    if (it->second->shape() != shape) {
      throw CompatibilityError("tensor '" + name + "' has shape " + shape_str(shape) + ", model expects " +
                               shape_str(it->second->shape()));
    }
    *it->second = Tensor::parameter(shape, r.doubles(shape_size(shape)));
    by_name.erase(it);
  }
  return ck;
}

}  // namespace erc
