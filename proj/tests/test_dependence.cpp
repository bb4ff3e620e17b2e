#include "doctest.h"

#include "blockclt/dependence.hpp"
#include "blockclt/error.hpp"
#include "blockclt/processes.hpp"
#include "blockclt/rng.hpp"

#include <cmath>
#include <vector>

using namespace blockclt;

namespace {

using Slot = CellTable::Slot;

// Table over the first rows x cols window slots of level k from a count matrix.
CellTable table_of(int k, const std::vector<std::vector<std::uint64_t>>& counts) {
    CellTable::JointMap joint;
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t j = 0; j < counts[i].size(); ++j)
            if (counts[i][j]) joint[{static_cast<Slot>(i), static_cast<Slot>(j)}] = counts[i][j];
    return CellTable::from_joint(k, joint);
}

// Independent oracle: every pair of subsets of the listed slots.
double brute_algebra(const std::vector<std::vector<std::uint64_t>>& counts) {
    const std::size_t ra = counts.size(), rb = counts[0].size();
    double total = 0;
    for (const auto& row : counts)
        for (const auto c : row) total += static_cast<double>(c);
    double best = 0;
    for (std::size_t ma = 0; ma < (std::size_t{1} << ra); ++ma)
        for (std::size_t mb = 0; mb < (std::size_t{1} << rb); ++mb) {
            double pab = 0, pa = 0, pb = 0;
            for (std::size_t i = 0; i < ra; ++i)
                for (std::size_t j = 0; j < rb; ++j) {
                    const double p = static_cast<double>(counts[i][j]) / total;
                    const bool ia = (ma >> i) & 1, ib = (mb >> j) & 1;
                    if (ia && ib) pab += p;
                    if (ia) pa += p;
                    if (ib) pb += p;
                }
            best = std::max(best, std::abs(pab - pa * pb));
        }
    return best;
}

std::vector<std::vector<std::uint64_t>> random_counts(Stream& rng, std::size_t ra, std::size_t rb) {
    std::vector<std::vector<std::uint64_t>> c(ra, std::vector<std::uint64_t>(rb));
    for (auto& row : c)
        for (auto& x : row) x = rng.below(4) == 0 ? 0 : 1 + rng.below(20);
    c[0][0] += 1;
    return c;
}

} // namespace

TEST_CASE("percell and algebra examples") {
    const CellTable prod = table_of(0, {{1, 1}, {1, 1}});
    CHECK(percell_gap(prod).value() == doctest::Approx(0.0));
    CHECK(algebra_gap(prod).value() == doctest::Approx(0.0));

    const CellTable diag = table_of(0, {{1, 0}, {0, 1}});
    CHECK(percell_gap(diag).value() == doctest::Approx(0.25));
    const GapEstimate g = algebra_gap(diag);
    CHECK(g.value() == doctest::Approx(0.25));
    CHECK(g.exact);
    CHECK(event_gap(diag, g.event_a, g.event_b) == doctest::Approx(0.25));

    CHECK(percell_gap(table_of(0, {{4, 1}, {1, 4}})).value() == doctest::Approx(0.15));
    CHECK(algebra_gap(table_of(0, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})).value() == doctest::Approx(2.0 / 9.0));
    const CellTable d3 = table_of(0, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    const std::vector<Slot> u12{1, 2};
    CHECK(event_gap(d3, u12, u12) == doctest::Approx(2.0 / 9.0));
}

TEST_CASE("empty tables are rejected") {
    const CellTable empty(0);
    for (auto fn : {+[](const CellTable& t) { (void)percell_gap(t); }, +[](const CellTable& t) { (void)algebra_gap(t); },
                    +[](const CellTable& t) { (void)stationarity_gap(t); }}) {
        try {
            fn(empty);
            FAIL("expected insufficient data");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::insufficient_data);
        }
    }
}

TEST_CASE("exact algebra search matches enumeration") {
    Stream rng(2024);
    GapOptions opt;
    opt.null_replicates = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t dim = rep % 2 ? 4 : 3;
        const auto c = random_counts(rng, dim, dim);
        const CellTable t = table_of(1, c);
        const GapEstimate g = algebra_gap(t, opt);
        REQUIRE(g.exact);
        REQUIRE(g.value() == doctest::Approx(brute_algebra(c)).epsilon(1e-12));
    }
}

TEST_CASE("percell never exceeds algebra") {
    Stream rng(77);
    GapOptions opt;
    opt.null_replicates = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto c = random_counts(rng, 2 + rng.below(5), 2 + rng.below(5));
        const CellTable t = table_of(1, c);
        REQUIRE(percell_gap(t).value() <= algebra_gap(t, opt).value() + 1e-15);
    }
}

TEST_CASE("percell null stderr covers the max over cells") {
    Stream rng(12);
    std::vector<double> a(20000), b(20000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
    }
    const CellTable t = histogram_pair(a, b, 1);
    const GapEstimate g = percell_gap(t);
    GapOptions none;
    none.null_replicates = 0;
    const GapEstimate plain = percell_gap(t, none);
    CHECK(g.value() == plain.value());
    CHECK(plain.std_error() == plain.event_stderr);
    CHECK(g.std_error() > g.event_stderr);
    CHECK(g.value() <= 4.0 * g.std_error());
    const StationarityGap st = stationarity_gap(t);
    CHECK(st.percell.std_error() > st.percell.event_stderr);
}

TEST_CASE("heuristic search on wide tables") {
    Stream rng(5);
    std::vector<double> a(4000), b(4000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.normal() * 0.8;
        b[i] = 0.6 * a[i] + 0.5 * rng.normal();
    }
    const CellTable t = histogram_pair(a, b, 2);
    GapOptions opt;
    opt.null_replicates = 4;
    const GapEstimate g = algebra_gap(t, opt);
    CHECK_FALSE(g.exact);
    CHECK(g.value() >= percell_gap(t).value());
    CHECK(event_gap(t, g.event_a, g.event_b) == doctest::Approx(g.value()));
    CHECK(g.std_error() > 0.0);
}

TEST_CASE("stationarity gaps") {
    const CellTable same = table_of(0, {{2, 1}, {1, 2}});
    const StationarityGap s0 = stationarity_gap(same);
    CHECK(s0.percell.value() == doctest::Approx(0.0));
    CHECK(s0.algebra.value() == doctest::Approx(0.0));

    // Marginals (0.5, 0.5) and (0.6, 0.4).
    const StationarityGap s1 = stationarity_gap(table_of(0, {{5, 0}, {1, 4}}));
    CHECK(s1.percell.value() == doctest::Approx(0.1));
    CHECK(s1.algebra.value() == doctest::Approx(0.1));

    // Marginals (0.5, 0.25, 0.25) and (0.25, 0.5, 0.25).
    const CellTable t2 = table_of(0, {{1, 1, 0}, {0, 1, 0}, {0, 0, 1}});
    const StationarityGap s2 = stationarity_gap(t2);
    CHECK(s2.algebra.value() == doctest::Approx(0.25));
    CHECK(event_stationarity_gap(t2, s2.algebra.event_a) == doctest::Approx(0.25));
}

TEST_CASE("moment gaps") {
    Stream rng(3);
    std::vector<double> l(20000), r(20000);
    for (std::size_t i = 0; i < l.size(); ++i) {
        l[i] = rng.normal();
        r[i] = rng.normal();
    }
    const MomentGapTable same = moment_gaps(l, l, 4);
    for (const auto& e : same.marginal) CHECK(e.gap.value == 0.0);
    double m1 = 0, m2 = 0;
    for (const double x : l) {
        m1 += x;
        m2 += x * x;
    }
    m1 /= static_cast<double>(l.size());
    m2 /= static_cast<double>(l.size());
    CHECK(same.cross_at(1, 1).gap.value == doctest::Approx(m2 - m1 * m1).epsilon(1e-9));
    const MomentGapTable ind = moment_gaps(l, r, 4);
    CHECK(ind.cross_at(1, 1).gap.value <= 4.0 * ind.cross_at(1, 1).gap.std_error);
    CHECK(ind.cross.size() == 6);
    CHECK(ind.marginal.size() == 4);
    try {
        (void)moment_gaps(l, r, 9);
        FAIL("expected domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
}

TEST_CASE("alpha restricted") {
    GapOptions opt;
    opt.null_replicates = 16;
    const PathBatch iid = generate_paths(ProcessSpec::iid_normal(), 20, 20000, 31);
    const GapEstimate g0 = alpha_restricted(iid, 1, 2, 8, opt);
    CHECK(g0.value() <= 4.0 * g0.std_error());

    const auto ma = ProcessSpec::moving_average({0.8, 0.5});
    const PathBatch b = generate_paths(ma, 19, 100000, 32);
    const GapEstimate sep = alpha_restricted(b, 1, 3, 8, opt);
    CHECK(sep.value() <= 4.0 * sep.std_error());
    const GapEstimate adj = alpha_restricted(b, 1, 0, 2, opt);
    CHECK(adj.value() > 4.0 * adj.std_error());
    CHECK(adj.value() > sep.value());
}

TEST_CASE("remainder tail") {
    const std::vector<double> zeros(200, 0.0);
    const RemainderTail z = remainder_tail(zeros);
    CHECK(z.rho == std::ldexp(1.0, -30));
    CHECK(z.tail.value == 0.0);
    CHECK(z.satisfied);

    // Exact uniform grid: P{> 1/2} = 1/2 is not strictly below 1/2.
    std::vector<double> uni(1000);
    for (std::size_t i = 0; i < uni.size(); ++i) uni[i] = (static_cast<double>(i) + 0.5) / 1000.0;
    const RemainderTail u = remainder_tail(uni);
    CHECK(u.rho == 1.0);
    CHECK(u.tail.value == 0.0);

    std::vector<double> two(1000, 0.0);
    for (std::size_t i = 0; i < 100; ++i) two[i] = 10.0;
    const RemainderTail t = remainder_tail(two);
    CHECK(t.rho == 0.125);
    CHECK(t.tail.value == doctest::Approx(0.1));

    // A tail probability never reaches a rho >= 1, so only a grid capped
    // below 1 can come up empty.
    const std::vector<double> huge(200, 1e12);
    CHECK(remainder_tail(huge).rho == 2.0);
    const RemainderTail h = remainder_tail(huge, TailGrid{-8, -1, 2});
    CHECK_FALSE(h.satisfied);
    CHECK(h.rho == 0.5);

    const std::vector<double> few{1.0};
    CHECK_THROWS_AS(remainder_tail(few), Error);
}

TEST_CASE("max_gap") {
    std::vector<GapEstimate> gs(3);
    gs[0].estimate = {0.1, 0.01, 10};
    gs[1].estimate = {0.3, 0.02, 10};
    gs[2].estimate = {0.2, 0.03, 10};
    const GapEstimate m = max_gap(gs);
    CHECK(m.value() == 0.3);
    CHECK(m.std_error() == 0.02);
}
