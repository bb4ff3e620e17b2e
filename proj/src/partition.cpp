#include "blockclt/partition.hpp"

#include "blockclt/error.hpp"

#include <cmath>
#include <string>

namespace blockclt {

double cell_width(int k) {
    if (k < 0) fail(ErrorKind::domain, "partition level must be nonnegative");
    return std::ldexp(1.0, -2 * k);
}

std::int64_t cell_index(int k, double x) {
    if (!std::isfinite(x)) fail(ErrorKind::domain, "cell_index requires a finite value");
    if (k < 0) fail(ErrorKind::domain, "partition level must be nonnegative");
    // Scaling by a power of two is exact, so the floor is exact at every edge.
    const double scaled = std::floor(std::ldexp(x, 2 * k));
    if (std::abs(scaled) > 9.0e18) fail(ErrorKind::out_of_range, "value too large for a cell index");
    return static_cast<std::int64_t>(scaled);
}

Window window_cells(int k) {
    if (k < 0) fail(ErrorKind::domain, "partition level must be nonnegative");
    if (k > kMaxWindowLevel)
        fail(ErrorKind::resource, "window level " + std::to_string(k) + " above cap " +
                                      std::to_string(kMaxWindowLevel));
    const std::int64_t half = std::int64_t{1} << (3 * k);
    Window w;
    w.k = k;
    w.first = -half;
    w.last = half;
    w.bound = std::ldexp(1.0, k) + cell_width(k);
    return w;
}

CellTable::CellTable(int k)
    : window_(window_cells(k)), count_a_(window_.size() + 1, 0), count_b_(window_.size() + 1, 0) {}

CellTable CellTable::from_joint(int k, const JointMap& joint) {
    CellTable table(k);
    for (const auto& [slots, count] : joint) {
        if (slots.first > table.out_slot() || slots.second > table.out_slot())
            fail(ErrorKind::shape, "joint slot outside the level-" + std::to_string(k) + " window");
        table.add_slots(slots.first, slots.second, count);
    }
    return table;
}

CellTable::Slot CellTable::slot_of(double x) const {
    const auto j = cell_index(window_.k, x);
    return window_.contains_cell(j) ? static_cast<Slot>(j - window_.first) : out_slot();
}

void CellTable::add(double a, double b) { add_slots(slot_of(a), slot_of(b)); }

void CellTable::add_slots(Slot a, Slot b, std::uint64_t count) {
    if (count == 0) return;
    count_a_[a] += count;
    count_b_[b] += count;
    joint_[{a, b}] += count;
    total_ += count;
}

void CellTable::merge(const CellTable& other) {
    if (other.window_.k != window_.k) fail(ErrorKind::merge, "cannot merge cell tables of different levels");
    for (std::size_t i = 0; i < count_a_.size(); ++i) {
        count_a_[i] += other.count_a_[i];
        count_b_[i] += other.count_b_[i];
    }
    for (const auto& [slots, count] : other.joint_) joint_[slots] += count;
    total_ += other.total_;
}

CellTable histogram_pair(std::span<const double> a, std::span<const double> b, int k) {
    if (a.size() != b.size())
        fail(ErrorKind::shape, "histogram_pair needs equal lengths (" + std::to_string(a.size()) + " vs " +
                                   std::to_string(b.size()) + ")");
    if (a.empty()) fail(ErrorKind::insufficient_data, "histogram_pair needs at least one sample");
    CellTable table(k);
    for (std::size_t i = 0; i < a.size(); ++i) table.add(a[i], b[i]);
    return table;
}

} // namespace blockclt
