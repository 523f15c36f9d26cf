#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bbfmm/errors.hpp"
#include "bbfmm/operators.hpp"

namespace bbfmm {

namespace {

static_assert(std::endian::native == std::endian::little,
              "operator cache files are written in native (little-endian) byte order");

constexpr char kMagic[8] = {'B', 'B', 'F', 'M', 'M', 'M', '2', 'L'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
std::uint64_t fnv1a_value(const T& v, std::uint64_t h) {
  return fnv1a(std::string_view(reinterpret_cast<const char*>(&v), sizeof(T)), h);
}

struct Header {
  std::uint32_t version = kVersion;
  std::uint32_t scheme = 0;
  std::uint64_t kernel_hash = 0;
  std::int32_t order = 0;
  std::int32_t levels = 0;
  double eps = 0.0;
  double homogen = 0.0;
  double domain_length = 0.0;
  std::int32_t symmetry = 0;
  std::int32_t single_level = 0;

  bool operator==(const Header&) const = default;
};

Header make_header(const KernelSpec& kernel, const FmmPlan& plan) {
  const M2LLayout layout = make_layout(kernel, plan);
  Header h;
  h.scheme = static_cast<std::uint32_t>(plan.scheme);
  h.kernel_hash = fnv1a(kernel.name);
  h.order = plan.order;
  h.levels = plan.levels;
  // The uniform table does not depend on eps.
  h.eps = plan.scheme == SchemeKind::Chebyshev ? plan.eps : 0.0;
  h.homogen = kernel.homogen;
  h.domain_length = plan.domain_length;
  h.symmetry = kernel.symmetry;
  h.single_level = layout.single_level ? 1 : 0;
  return h;
}

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  template <typename T>
  void put(const T& v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_doubles(const double* data, std::size_t n) {
    os_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}
  template <typename T>
  bool get(T& v) {
    return static_cast<bool>(is_.read(reinterpret_cast<char*>(&v), sizeof(T)));
  }
  bool get_doubles(double* data, std::size_t n) {
    return static_cast<bool>(
        is_.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double))));
  }

 private:
  std::istream& is_;
};

void write_header(Writer& w, const Header& h) {
  w.put(kMagic);
  w.put(h.version);
  w.put(h.scheme);
  w.put(h.kernel_hash);
  w.put(h.order);
  w.put(h.levels);
  w.put(h.eps);
  w.put(h.homogen);
  w.put(h.domain_length);
  w.put(h.symmetry);
  w.put(h.single_level);
}

bool read_header(Reader& r, Header& h) {
  char magic[8];
  if (!r.get(magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) return false;
  return r.get(h.version) && r.get(h.scheme) && r.get(h.kernel_hash) && r.get(h.order) &&
         r.get(h.levels) && r.get(h.eps) && r.get(h.homogen) && r.get(h.domain_length) &&
         r.get(h.symmetry) && r.get(h.single_level);
}

void write_payload(Writer& w, const ChebyshevM2L& t) {
  for (const auto& l : t.levels()) {
    w.put(static_cast<std::int32_t>(l.U.cols()));
    w.put(static_cast<std::int32_t>(l.V.cols()));
    w.put(static_cast<std::int32_t>(l.singular_values.size()));
    w.put_doubles(l.U.data(), static_cast<std::size_t>(l.U.size()));
    w.put_doubles(l.V.data(), static_cast<std::size_t>(l.V.size()));
    w.put_doubles(l.singular_values.data(), static_cast<std::size_t>(l.singular_values.size()));
    w.put_doubles(l.cores.data(), l.cores.size());
  }
}

void write_payload(Writer& w, const UniformM2L& t) {
  for (const auto& l : t.levels()) {
    w.put(static_cast<std::int64_t>(l.symbols.size()));
    w.put_doubles(reinterpret_cast<const double*>(l.symbols.data()), 2 * l.symbols.size());
  }
}

std::optional<M2LTable> read_chebyshev(Reader& r, const M2LLayout& layout, const FmmPlan& plan) {
  const Eigen::Index n3 = static_cast<Eigen::Index>(plan.order) * plan.order * plan.order;
  std::vector<ChebyshevM2L::Level> levels(static_cast<std::size_t>(layout.stored_levels()));
  for (auto& l : levels) {
    std::int32_t rt = 0, rs = 0, nsv = 0;
    if (!r.get(rt) || !r.get(rs) || !r.get(nsv)) return std::nullopt;
    if (rt < 1 || rs < 1 || rt > n3 || rs > n3 || nsv < 0 || nsv > n3) return std::nullopt;
    l.U.resize(n3, rt);
    l.V.resize(n3, rs);
    l.singular_values.resize(nsv);
    l.cores.resize(static_cast<std::size_t>(rt) * rs * kNumOffsets);
    if (!r.get_doubles(l.U.data(), static_cast<std::size_t>(l.U.size())) ||
        !r.get_doubles(l.V.data(), static_cast<std::size_t>(l.V.size())) ||
        !r.get_doubles(l.singular_values.data(), static_cast<std::size_t>(nsv)) ||
        !r.get_doubles(l.cores.data(), l.cores.size())) {
      return std::nullopt;
    }
  }
  return M2LTable(ChebyshevM2L(layout, plan.order, plan.eps, std::move(levels)));
}

std::optional<M2LTable> read_uniform(Reader& r, const M2LLayout& layout, const FmmPlan& plan) {
  const std::size_t n = static_cast<std::size_t>(2 * plan.order - 1);
  const std::size_t expected = n * n * (n / 2 + 1) * kNumOffsets;
  std::vector<UniformM2L::Level> levels(static_cast<std::size_t>(layout.stored_levels()));
  for (auto& l : levels) {
    std::int64_t count = 0;
    if (!r.get(count) || static_cast<std::size_t>(count) != expected) return std::nullopt;
    l.symbols.resize(expected);
    if (!r.get_doubles(reinterpret_cast<double*>(l.symbols.data()), 2 * expected)) {
      return std::nullopt;
    }
  }
  return M2LTable(UniformM2L(layout, plan.order, std::move(levels)));
}

}  // namespace

std::optional<std::filesystem::path> cache_dir_from_env() {
  const char* dir = std::getenv("BBFMM_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::filesystem::path(dir);
}

std::filesystem::path cache_file_path(const std::filesystem::path& dir, const KernelSpec& kernel,
                                      const FmmPlan& plan) {
  const Header h = make_header(kernel, plan);
  std::uint64_t key = fnv1a_value(h.version, 1469598103934665603ull);
  key = fnv1a_value(h.scheme, key);
  key = fnv1a_value(h.kernel_hash, key);
  key = fnv1a_value(h.order, key);
  key = fnv1a_value(h.levels, key);
  key = fnv1a_value(h.eps, key);
  key = fnv1a_value(h.homogen, key);
  key = fnv1a_value(h.domain_length, key);
  key = fnv1a_value(h.symmetry, key);
  key = fnv1a_value(h.single_level, key);

  std::string name;
  for (char c : kernel.name) name += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  std::ostringstream file;
  file << "m2l_" << (plan.scheme == SchemeKind::Chebyshev ? "cheb" : "unif") << '_' << name << "_p"
       << plan.order << "_L" << plan.levels << '_' << std::hex << std::setw(16)
       << std::setfill('0') << key << ".bin";
  return dir / file.str();
}

void save_m2l(const std::filesystem::path& file, const KernelSpec& kernel, const FmmPlan& plan,
              const M2LTable& table) {
  if (table.scheme() != plan.scheme || table.order() != plan.order) {
    throw InternalError("M2L table does not belong to the plan it is saved under");
  }
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  // Write then rename so a concurrent reader never sees a partial file.
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write operator cache file " + tmp.string());
    Writer w(os);
    write_header(w, make_header(kernel, plan));
    std::visit([&](const auto& t) { write_payload(w, t); }, table.variant());
    if (!os) throw ConfigError("failed writing operator cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

std::optional<M2LTable> load_m2l(const std::filesystem::path& file, const KernelSpec& kernel,
                                 const FmmPlan& plan) {
  std::ifstream is(file, std::ios::binary);
  if (!is) return std::nullopt;
  Reader r(is);
  Header h;
  if (!read_header(r, h) || !(h == make_header(kernel, plan))) return std::nullopt;
  const M2LLayout layout = make_layout(kernel, plan);
  auto table = plan.scheme == SchemeKind::Chebyshev ? read_chebyshev(r, layout, plan)
                                                    : read_uniform(r, layout, plan);
  if (!table) return std::nullopt;
  char extra;
  if (is.read(&extra, 1)) return std::nullopt;  // trailing bytes: not our layout
  return table;
}

M2LTable load_or_precompute_m2l(const KernelSpec& kernel, const FmmPlan& plan,
                                const std::optional<std::filesystem::path>& dir, bool* cache_hit) {
  if (cache_hit) *cache_hit = false;
  if (!dir) return precompute_m2l(kernel, plan);
  const auto file = cache_file_path(*dir, kernel, plan);
  if (auto table = load_m2l(file, kernel, plan)) {
    if (cache_hit) *cache_hit = true;
    return std::move(*table);
  }
  M2LTable table = precompute_m2l(kernel, plan);
  save_m2l(file, kernel, plan, table);
  return table;
}

}  // namespace bbfmm
