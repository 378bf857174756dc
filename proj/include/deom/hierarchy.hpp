#pragma once

#include <iosfwd>

#include "deom/model.hpp"
#include "deom/types.hpp"

namespace deom {

using Occ = std::vector<std::uint8_t>;

// One hierarchy occupation vector n = {n_uk} with cached tier.
struct MultiIndex {
  Occ occ;
  int tier = 0;
};

// Complete enumeration of all multi-indices with tier <= max_tier over
// n_modes slots, in graded lexicographic order (tier first, then occ),
// plus raise/lower adjacency per slot.
class IndexSpace {
 public:
  IndexSpace(int n_modes, int max_tier, std::size_t entry_budget = 4'000'000);

  int n_modes() const { return n_modes_; }
  int max_tier() const { return max_tier_; }
  std::int64_t size() const { return n_entries_; }
  std::uint64_t hash() const { return hash_; }

  int tier(std::int64_t i) const { return tier_[i]; }
  const std::uint8_t* occ(std::int64_t i) const { return occ_.data() + i * n_modes_; }
  MultiIndex entry(std::int64_t i) const;

  // Index of n with slot m raised/lowered; -1 when outside the space.
  std::int64_t raised(std::int64_t i, int m) const { return raise_[i * n_modes_ + m]; }
  std::int64_t lowered(std::int64_t i, int m) const { return lower_[i * n_modes_ + m]; }

  std::int64_t find(const Occ& occ) const;

  // Entry with occupations swapped along a slot permutation (k <-> kbar).
  std::int64_t permuted(std::int64_t i, const std::vector<int>& perm) const;

  std::int64_t tier_begin(int t) const { return tier_offset_[t]; }
  std::int64_t tier_end(int t) const { return tier_offset_[t + 1]; }

 private:
  int n_modes_;
  int max_tier_;
  std::int64_t n_entries_ = 0;
  std::vector<std::uint8_t> occ_;
  std::vector<int> tier_;
  std::vector<std::int64_t> raise_, lower_;
  std::vector<std::int64_t> tier_offset_;
  std::uint64_t hash_ = 0;
};

enum class Rep : std::uint8_t { Raw = 0, Scaled = 1 };

// State of every hierarchy variant: one dense d x d complex matrix per entry.
class DDOStore {
 public:
  DDOStore() = default;
  DDOStore(const IndexSpace& space, int dim, Rep rep = Rep::Raw);

  const IndexSpace& space() const { return *space_; }
  int dim() const { return dim_; }
  Rep rep() const { return rep_; }
  void set_rep(Rep r) { rep_ = r; }

  cplx* block(std::int64_t i) { return data_.data() + i * dim_ * dim_; }
  const cplx* block(std::int64_t i) const { return data_.data() + i * dim_ * dim_; }
  Eigen::Map<Matrix> mat(std::int64_t i);
  Eigen::Map<const Matrix> mat(std::int64_t i) const;

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  void set_zero();
  cplx tier0_trace() const;
  void scale_all(cplx s);
  double max_abs() const;
  double max_abs_entry(std::int64_t i) const;

  // max_n || data[n]^dagger - data[nbar] ||_max, nbar = k <-> kbar swap.
  double pairing_defect(const ModeSet& modes) const;

 private:
  const IndexSpace* space_ = nullptr;
  int dim_ = 0;
  Rep rep_ = Rep::Raw;
  std::vector<cplx> data_;
};

// Per-slot scaling base |eta_uuk| (1 when the coupling vanishes) and the
// per-entry factor s_n = prod (n_uk! b_uk^{n_uk})^{1/2}.
std::vector<double> scaling_bases(const ModeSet& modes);
double scaling_factor(const IndexSpace& space, std::int64_t i,
                      const std::vector<double>& bases);

DDOStore convert_rep(const DDOStore& in, const ModeSet& modes, Rep target);

// Slot permutation m -> (u, kbar) used by the Hermiticity pairing.
std::vector<int> conj_slot_permutation(const ModeSet& modes);

// Zeroes entries whose max-abs element (in scaled representation) is below
// tol; tier 0 is never filtered.
DDOStore apply_filter(const DDOStore& store, const ModeSet& modes, double tol);
void apply_filter_inplace(DDOStore& store, double tol);  // store must be scaled

// Snapshot: header (dim, n_modes, max_tier, rep, canonical-order hash) +
// raw complex payload; bit-exact round trip.
void save_snapshot(std::ostream& os, const DDOStore& store);
DDOStore load_snapshot(std::istream& is, const IndexSpace& space);

std::int64_t binomial(int n, int k);

}  // namespace deom
