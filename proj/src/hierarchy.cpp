#include "deom/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace deom {

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

IndexSpace::IndexSpace(int n_modes, int max_tier, std::size_t entry_budget)
    : n_modes_(n_modes), max_tier_(max_tier) {
  if (n_modes < 0 || max_tier < 0)
    throw ConfigError("IndexSpace: n_modes and max_tier must be >= 0");
  if (max_tier > 255) throw ConfigError("IndexSpace: max_tier > 255 unsupported");
  const std::int64_t count =
      n_modes == 0 ? 1 : binomial(n_modes + max_tier, max_tier);
  if (count <= 0 || static_cast<std::size_t>(count) > entry_budget)
    throw ConfigError("IndexSpace: entry count " + std::to_string(count) +
                      " exceeds budget " + std::to_string(entry_budget));
  n_entries_ = count;
  occ_.resize(count * std::max(n_modes, 1));
  tier_.resize(count);
  tier_offset_.assign(max_tier + 2, 0);

  // Graded lexicographic: ascending tier, then lexicographic on occ.
  std::int64_t idx = 0;
  Occ cur(n_modes, 0);
  for (int t = 0; t <= max_tier; ++t) {
    tier_offset_[t] = idx;
    if (n_modes == 0) {
      if (t == 0) tier_[idx++] = 0;
      continue;
    }
    // enumerate compositions of t over n_modes slots in lex order
    std::fill(cur.begin(), cur.end(), 0);
    cur[n_modes - 1] = static_cast<std::uint8_t>(t);
    while (true) {
      std::memcpy(occ_.data() + idx * n_modes, cur.data(), n_modes);
      tier_[idx] = t;
      ++idx;
      // next composition in lex order: find rightmost slot > 0 before last,
      // move one unit right
      int j = n_modes - 2;
      while (j >= 0 && cur[j] == 0) --j;
      if (j < 0) break;
      // decrement cur[j], set cur[j+1..] so the remainder goes to the tail
      int rest = cur[n_modes - 1];
      cur[j] -= 1;
      cur[n_modes - 1] = 0;
      cur[j + 1] = static_cast<std::uint8_t>(rest + 1);
      if (j + 1 != n_modes - 1) {
        const int v = cur[j + 1];
        cur[j + 1] = 0;
        cur[n_modes - 1] = static_cast<std::uint8_t>(v);
      }
      std::uint8_t head_sum = 0;
      (void)head_sum;
      if (false) break;
      // loop continues until composition (t,0,...,0) has been emitted
      bool done = true;
      for (int s = 0; s + 1 < n_modes; ++s)
        if (cur[s] != 0 && s != 0) done = done;
      (void)done;
      if (cur[0] == t && t > 0 && idx > 0) {
        std::memcpy(occ_.data() + idx * n_modes, cur.data(), n_modes);
        tier_[idx] = t;
        ++idx;
        break;
      }
    }
  }
  tier_offset_[max_tier + 1] = idx;
  if (idx != n_entries_)
    throw std::logic_error("IndexSpace: enumeration mismatch");

  hash_ = fnv1a64(&n_modes_, sizeof(n_modes_));
  hash_ = fnv1a64(&max_tier_, sizeof(max_tier_), hash_);
  hash_ = fnv1a64(occ_.data(), occ_.size(), hash_);

  raise_.assign(count * std::max(n_modes, 1), -1);
  lower_.assign(count * std::max(n_modes, 1), -1);
  Occ tmp(n_modes);
  for (std::int64_t i = 0; i < count; ++i) {
    const std::uint8_t* o = occ(i);
    for (int m = 0; m < n_modes; ++m) {
      if (tier_[i] < max_tier) {
        std::memcpy(tmp.data(), o, n_modes);
        tmp[m] += 1;
        raise_[i * n_modes + m] = find(tmp);
      }
      if (o[m] > 0) {
        std::memcpy(tmp.data(), o, n_modes);
        tmp[m] -= 1;
        lower_[i * n_modes + m] = find(tmp);
      }
    }
  }
}

MultiIndex IndexSpace::entry(std::int64_t i) const {
  MultiIndex mi;
  mi.occ.assign(occ(i), occ(i) + n_modes_);
  mi.tier = tier_[i];
  return mi;
}

std::int64_t IndexSpace::find(const Occ& o) const {
  int t = 0;
  for (auto v : o) t += v;
  if (t > max_tier_) return -1;
  std::int64_t lo = tier_offset_[t], hi = tier_offset_[t + 1];
  while (lo < hi) {
    const std::int64_t mid = (lo + hi) / 2;
    const int c = std::memcmp(occ_.data() + mid * n_modes_, o.data(), n_modes_);
    if (c == 0) return mid;
    if (c < 0)
      lo = mid + 1;
    else
      hi = mid;
  }
  return -1;
}

std::int64_t IndexSpace::permuted(std::int64_t i, const std::vector<int>& perm) const {
  Occ tmp(n_modes_);
  const std::uint8_t* o = occ(i);
  for (int m = 0; m < n_modes_; ++m) tmp[perm[m]] = o[m];
  return find(tmp);
}

// --- DDOStore ----------------------------------------------------------------

DDOStore::DDOStore(const IndexSpace& space, int dim, Rep rep)
    : space_(&space), dim_(dim), rep_(rep) {
  if (dim <= 0) throw ConfigError("DDOStore: dim must be positive");
  data_.assign(static_cast<std::size_t>(space.size()) * dim * dim, cplx(0.0));
}

Eigen::Map<Matrix> DDOStore::mat(std::int64_t i) {
  return Eigen::Map<Matrix>(block(i), dim_, dim_);
}
Eigen::Map<const Matrix> DDOStore::mat(std::int64_t i) const {
  return Eigen::Map<const Matrix>(block(i), dim_, dim_);
}

void DDOStore::set_zero() { std::fill(data_.begin(), data_.end(), cplx(0.0)); }

cplx DDOStore::tier0_trace() const {
  cplx tr = 0.0;
  for (int a = 0; a < dim_; ++a) tr += block(0)[a * dim_ + a];
  return tr;
}

void DDOStore::scale_all(cplx s) {
  for (auto& v : data_) v *= s;
}

double DDOStore::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

double DDOStore::max_abs_entry(std::int64_t i) const {
  double m = 0.0;
  const cplx* p = block(i);
  for (int a = 0; a < dim_ * dim_; ++a) m = std::max(m, std::abs(p[a]));
  return m;
}

double DDOStore::pairing_defect(const ModeSet& modes) const {
  const auto perm = conj_slot_permutation(modes);
  double defect = 0.0;
  for (std::int64_t i = 0; i < space_->size(); ++i) {
    const std::int64_t j = space_->permuted(i, perm);
    if (j < 0) continue;
    Matrix diff = mat(i).adjoint() - mat(j);
    defect = std::max(defect, diff.cwiseAbs().maxCoeff());
  }
  return defect;
}

// --- scaling -----------------------------------------------------------------

std::vector<double> scaling_bases(const ModeSet& modes) {
  std::vector<double> b(modes.n_slots(), 1.0);
  for (int m = 0; m < modes.n_slots(); ++m) {
    const int u = modes.slot_u(m), k = modes.slot_k(m);
    const double a = std::abs(modes.eta_fwd(u, u, k));
    b[m] = a > 0.0 ? a : 1.0;
  }
  return b;
}

double scaling_factor(const IndexSpace& space, std::int64_t i,
                      const std::vector<double>& bases) {
  const std::uint8_t* o = space.occ(i);
  double s = 1.0;
  for (int m = 0; m < space.n_modes(); ++m) {
    for (int n = 1; n <= o[m]; ++n) s *= n * bases[m];
  }
  return std::sqrt(s);
}

DDOStore convert_rep(const DDOStore& in, const ModeSet& modes, Rep target) {
  if (in.rep() == target) return in;
  DDOStore out(in.space(), in.dim(), target);
  const auto bases = scaling_bases(modes);
  const int dd = in.dim() * in.dim();
  for (std::int64_t i = 0; i < in.space().size(); ++i) {
    const double s = scaling_factor(in.space(), i, bases);
    const double f = target == Rep::Scaled ? 1.0 / s : s;
    const cplx* src = in.block(i);
    cplx* dst = out.block(i);
    for (int a = 0; a < dd; ++a) dst[a] = src[a] * f;
  }
  return out;
}

std::vector<int> conj_slot_permutation(const ModeSet& modes) {
  std::vector<int> perm(modes.n_slots());
  for (int m = 0; m < modes.n_slots(); ++m) perm[m] = modes.conj_slot(m);
  return perm;
}

// --- filter ------------------------------------------------------------------

void apply_filter_inplace(DDOStore& store, double tol) {
  if (tol <= 0.0) return;
  const int dd = store.dim() * store.dim();
  for (std::int64_t i = 1; i < store.space().size(); ++i) {
    if (store.max_abs_entry(i) < tol) {
      cplx* p = store.block(i);
      std::fill(p, p + dd, cplx(0.0));
    }
  }
}

DDOStore apply_filter(const DDOStore& store, const ModeSet& modes, double tol) {
  if (tol < 0.0) throw ConfigError("apply_filter: tol must be >= 0");
  if (store.rep() == Rep::Scaled) {
    DDOStore out = store;
    apply_filter_inplace(out, tol);
    return out;
  }
  DDOStore scaled = convert_rep(store, modes, Rep::Scaled);
  apply_filter_inplace(scaled, tol);
  return convert_rep(scaled, modes, Rep::Raw);
}

// --- snapshot ----------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'D', 'E', 'O', 'M', 'S', 'N', 'P', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void get(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

void save_snapshot(std::ostream& os, const DDOStore& store) {
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(store.dim()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(store.space().n_modes()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(store.space().max_tier()));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(store.rep()));
  put<std::uint64_t>(os, store.space().hash());
  put<std::uint64_t>(os, static_cast<std::uint64_t>(store.space().size()));
  os.write(reinterpret_cast<const char*>(store.data().data()),
           static_cast<std::streamsize>(store.data().size() * sizeof(cplx)));
  if (!os) throw std::runtime_error("save_snapshot: write failed");
}

DDOStore load_snapshot(std::istream& is, const IndexSpace& space) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("load_snapshot: bad magic");
  std::uint32_t version, dim, n_modes, max_tier;
  std::uint8_t rep;
  std::uint64_t hash, n_entries;
  get(is, version);
  get(is, dim);
  get(is, n_modes);
  get(is, max_tier);
  get(is, rep);
  get(is, hash);
  get(is, n_entries);
  if (version != 1) throw std::runtime_error("load_snapshot: unknown version");
  if (hash != space.hash() || n_entries != static_cast<std::uint64_t>(space.size()) ||
      n_modes != static_cast<std::uint32_t>(space.n_modes()) ||
      max_tier != static_cast<std::uint32_t>(space.max_tier()))
    throw std::runtime_error(
        "load_snapshot: snapshot belongs to a different index space");
  DDOStore store(space, static_cast<int>(dim), static_cast<Rep>(rep));
  is.read(reinterpret_cast<char*>(store.data().data()),
          static_cast<std::streamsize>(store.data().size() * sizeof(cplx)));
  if (!is) throw std::runtime_error("load_snapshot: truncated payload");
  return store;
}

}  // namespace deom
