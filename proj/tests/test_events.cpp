#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "causalnet/errors.hpp"
#include "causalnet/events.hpp"

using namespace causalnet;
using namespace causalnet::events;
using geometry::MinimalCone;
using geometry::Region;

namespace {

MinimalCone v(int t2, int i2) { return MinimalCone{t2, i2}; }

Region line(int n) {  // n equal-time cones
    std::vector<MinimalCone> cs;
    for (int k = 0; k < n; ++k) cs.push_back(v(0, 2 * k));
    return Region(cs);
}

ClassicalState random_state(const Region& domain, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::vector<double> w(std::size_t{1} << domain.size());
    double sum = 0.0;
    for (auto& x : w) { x = u(rng); sum += x; }
    for (auto& x : w) x /= sum;
    return ClassicalState{domain, std::move(w)};
}

}  // namespace

TEST_CASE("atoms enumerate single-configuration cylinders") {
    CHECK(atoms(line(3)).size() == 8);
    auto two = atoms(line(1));
    CHECK(two.size() == 2);
    CHECK(two[0] == CylinderEvent(line(1), {0}));
    CHECK(two[1] == CylinderEvent(line(1), {1}));
    // empty region carries only the unit atom
    auto unit_only = atoms(Region{});
    CHECK(unit_only.size() == 1);
    CHECK(unit_only[0].is_unit());
    CHECK_THROWS_AS(atoms(line(3), 2), CapExceeded);

    // mutually exclusive, sum to unit
    auto all = atoms(line(2));
    CylinderEvent sum = CylinderEvent::zero();
    for (std::size_t i = 0; i < all.size(); ++i) {
        sum = join_ev(sum, all[i]);
        for (std::size_t j = i + 1; j < all.size(); ++j)
            CHECK(meet(all[i], all[j]).is_zero());
    }
    CHECK(sum.is_unit());
}

TEST_CASE("canonical support drops value-independent cones") {
    Region r = line(2);
    // acceptance ignores the second cone
    CylinderEvent e(r, {0, 2});  // bit0 = -1 regardless of bit1... masks {00,10}
    CHECK(e.support() == line(1));
    CHECK(e.accepted() == std::vector<std::uint32_t>{0});
    // full set collapses to the unit
    CHECK(CylinderEvent(r, {0, 1, 2, 3}).is_unit());
    CHECK(CylinderEvent(r, {}).is_zero());
}

TEST_CASE("lattice operations on cylinders") {
    Region r = line(2);
    CylinderEvent a = CylinderEvent::atom({r, 0b01});
    CylinderEvent b = CylinderEvent::atom({r, 0b10});

    CHECK(meet(a, complement(a)).is_zero());
    CHECK(join_ev(a, complement(a)).is_unit());
    CHECK(join_ev(a, b) == CylinderEvent(r, {0b01, 0b10}));

    // meet on disjoint supports is the product cylinder
    CylinderEvent left(Region({v(0, 0)}), {1});
    CylinderEvent right(Region({v(0, 2)}), {0});
    CylinderEvent prod = meet(left, right);
    CHECK(prod.support() == r);
    CHECK(prod.accepted() == std::vector<std::uint32_t>{0b01});

    // distributivity sampled over a three-cone algebra
    std::mt19937 rng(5);
    Region r3 = line(3);
    auto random_event = [&]() {
        std::vector<std::uint32_t> acc;
        for (std::uint32_t m = 0; m < 8; ++m)
            if (rng() & 1) acc.push_back(m);
        return CylinderEvent(r3, std::move(acc));
    };
    for (int trial = 0; trial < 200; ++trial) {
        auto x = random_event(), y = random_event(), z = random_event();
        CHECK(meet(x, join_ev(y, z)) == join_ev(meet(x, y), meet(x, z)));
        CHECK(complement(meet(x, y)) == join_ev(complement(x), complement(y)));
    }
}

TEST_CASE("events on a region form the full Boolean algebra of its atoms") {
    for (int n = 0; n <= 3; ++n) {
        Region r = line(n);
        auto at = atoms(r);
        CHECK(at.size() == (std::size_t{1} << n));
        // joins of atom subsets are pairwise distinct and recover the subset
        std::set<std::vector<std::uint32_t>> seen;
        for (std::uint32_t s = 0; s < (1u << at.size()); ++s) {
            CylinderEvent e = CylinderEvent::zero();
            for (std::size_t k = 0; k < at.size(); ++k)
                if ((s >> k) & 1u) e = join_ev(e, at[k]);
            std::vector<std::uint32_t> key =
                e.is_zero() ? std::vector<std::uint32_t>{} : e.on_support(r).accepted();
            CHECK(seen.insert(key).second);
            CHECK(key.size() == static_cast<std::size_t>(__builtin_popcount(s)));
        }
        CHECK(seen.size() == (std::size_t{1} << (std::size_t{1} << n)));
    }
}

TEST_CASE("probability basics") {
    Region r3 = line(3);
    ClassicalState u = uniform_state(r3);
    CHECK(probability(u, CylinderEvent::unit()) == doctest::Approx(1.0));
    CHECK(probability(u, CylinderEvent(Region({v(0, 0)}), {1})) == doctest::Approx(0.5));
    // two-configuration cylinder on two of three cones: 2/4 of the mass
    CylinderEvent e(line(2), {0b00, 0b11});
    CHECK(probability(u, e) == doctest::Approx(0.5));
    CHECK_THROWS_AS(probability(uniform_state(line(1)), e), SupportNotContained);
}

TEST_CASE("probability is additive and complement-consistent") {
    std::mt19937 rng(17);
    Region r = line(4);
    for (int trial = 0; trial < 100; ++trial) {
        ClassicalState s = random_state(r, rng);
        std::vector<std::uint32_t> acc1, acc2;
        for (std::uint32_t m = 0; m < 16; ++m) {
            int roll = rng() % 3;
            if (roll == 0) acc1.push_back(m);
            if (roll == 1) acc2.push_back(m);
        }
        CylinderEvent e1(r, acc1), e2(r, acc2);
        REQUIRE(meet(e1, e2).is_zero());
        CHECK(probability(s, join_ev(e1, e2)) ==
              doctest::Approx(probability(s, e1) + probability(s, e2)).epsilon(1e-12));
        CHECK(probability(s, complement(e1)) ==
              doctest::Approx(1.0 - probability(s, e1)).epsilon(1e-12));
        CHECK(probability(s, e1) <= probability(s, join_ev(e1, e2)) + 1e-15);
    }
}

TEST_CASE("isotony: an event keeps its probability on any larger support") {
    std::mt19937 rng(29);
    Region big = line(4);
    Region small = line(2);
    for (int trial = 0; trial < 100; ++trial) {
        ClassicalState s = random_state(big, rng);
        std::vector<std::uint32_t> acc;
        for (std::uint32_t m = 0; m < 4; ++m)
            if (rng() & 1) acc.push_back(m);
        CylinderEvent e(small, acc);
        CHECK(probability(s, e) ==
              doctest::Approx(probability(s, e.on_support(big))).epsilon(1e-12));
    }
}

TEST_CASE("conditioning") {
    Region r2 = line(2);
    ClassicalState u = uniform_state(r2);
    CHECK(condition(u, CylinderEvent::unit()).weights == u.weights);

    // conditioning on an atom of cone 1 leaves cone 2 uniform
    CylinderEvent first_plus(Region({v(0, 0)}), {1});
    ClassicalState c = condition(u, first_plus);
    CHECK(probability(c, first_plus) == doctest::Approx(1.0));
    CHECK(probability(c, CylinderEvent(Region({v(0, 2)}), {1})) == doctest::Approx(0.5));

    CHECK_THROWS_AS(condition(u, CylinderEvent::zero()), ZeroProbability);

    // double conditioning equals conditioning on the meet
    std::mt19937 rng(41);
    Region r3 = line(3);
    for (int trial = 0; trial < 100; ++trial) {
        ClassicalState s = random_state(r3, rng);
        CylinderEvent e1(r3, {0, 1, 2, 3, 5});
        CylinderEvent e2(r3, {1, 3, 4, 5, 7});
        ClassicalState lhs = condition(condition(s, e1), e2);
        ClassicalState rhs = condition(s, meet(e1, e2));
        for (std::size_t m = 0; m < lhs.weights.size(); ++m)
            CHECK(lhs.weights[m] == doctest::Approx(rhs.weights[m]).epsilon(1e-12));
    }
}

TEST_CASE("faithfulness flag") {
    CHECK(uniform_state(line(2)).faithful());
    ClassicalState s = point_state({line(2), 0b01});
    CHECK_FALSE(s.faithful());
    CHECK(s.normalized());
}

TEST_CASE("intersection property") {
    // disjoint regions share only zero and unit
    CHECK(check_intersection_property(line(2), Region({v(0, 10), v(0, 12)})));
    // nested regions: the smaller algebra is the intersection
    CHECK(check_intersection_property(line(1), line(3)));
    // overlapping pair
    Region a({v(0, 0), v(0, 2), v(0, 4)});
    Region b({v(0, 4), v(0, 6)});
    CHECK(check_intersection_property(a, b));
    // cap guard
    CHECK_THROWS_AS(check_intersection_property(line(5), line(5)), CapExceeded);
}
