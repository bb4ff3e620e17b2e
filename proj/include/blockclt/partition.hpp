#pragma once

// Dyadic cells J_{k,j} = [4^-k j, 4^-k (j+1)) and the bounded windows K_k.

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace blockclt {

inline constexpr int kMaxWindowLevel = 4;

/// 4^-k, exact.
double cell_width(int k);

/// j with 4^-k j <= x < 4^-k (j + 1).
std::int64_t cell_index(int k, double x);

/// Minimal union of level-k cells covering [-2^k, 2^k]: indices
/// -2^{3k} .. 2^{3k}, i.e. 2^{3k+1} + 1 cells.
struct Window {
    int k = 0;
    std::int64_t first = 0;
    std::int64_t last = 0;  // inclusive
    double bound = 0.0;     // b_k = sup{|x| : x in K_k} = 2^k + 4^-k

    std::size_t size() const noexcept { return static_cast<std::size_t>(last - first + 1); }
    bool contains_cell(std::int64_t j) const noexcept { return j >= first && j <= last; }
    bool operator==(const Window&) const = default;
};

Window window_cells(int k);

/// Joint and marginal counts of two statistics over the level-k window.
/// Slots 0..cells-1 are window cells in index order; slot `cells` is the
/// out-of-window bucket. Joint counts are stored sparsely over slot pairs, so
/// row and column sums of the joint table equal the marginals exactly.
class CellTable {
public:
    using Slot = std::uint32_t;
    using JointMap = std::map<std::pair<Slot, Slot>, std::uint64_t>;

    explicit CellTable(int k);

    /// Builds a table directly from joint slot counts (test fixtures, nulls).
    static CellTable from_joint(int k, const JointMap& joint);

    int level() const noexcept { return window_.k; }
    const Window& window() const noexcept { return window_; }
    std::size_t cells() const noexcept { return window_.size(); }
    Slot out_slot() const noexcept { return static_cast<Slot>(window_.size()); }

    Slot slot_of(double x) const;
    /// Cell index (J_{k,j} index j) of a window slot.
    std::int64_t cell_of_slot(Slot s) const noexcept { return window_.first + static_cast<std::int64_t>(s); }

    void add(double a, double b);
    void add_slots(Slot a, Slot b, std::uint64_t count = 1);
    /// Associative, commutative merge of a table of the same level.
    void merge(const CellTable& other);

    std::uint64_t total() const noexcept { return total_; }
    const std::vector<std::uint64_t>& counts_a() const noexcept { return count_a_; }
    const std::vector<std::uint64_t>& counts_b() const noexcept { return count_b_; }
    const JointMap& joint() const noexcept { return joint_; }

    std::uint64_t out_a() const noexcept { return count_a_.back(); }
    std::uint64_t out_b() const noexcept { return count_b_.back(); }

    bool operator==(const CellTable& other) const = default;

private:
    Window window_;
    std::vector<std::uint64_t> count_a_;
    std::vector<std::uint64_t> count_b_;
    JointMap joint_;
    std::uint64_t total_ = 0;
};

CellTable histogram_pair(std::span<const double> a, std::span<const double> b, int k);

} // namespace blockclt
