#include <stdexcept>

#include "doctest.h"
#include "rrlab/mechanism.hpp"

using namespace rrlab;
using doctest::Approx;

TEST_CASE("plurality cannot be robust on both sides") {
  Rng rng(1);
  for (int n : {3, 4, 5, 9}) {
    const auto r = trinity_check(PluralityMechanism{}, n, 1000, rng);
    CAPTURE(n);
    CHECK(r.exact);
    CHECK(r.symmetric_ok);
    REQUIRE(r.trinity_holds.has_value());
    CHECK(*r.trinity_holds);
    CHECK_FALSE((r.robust_minority && r.robust_slight_majority));
  }
  const auto odd = trinity_check(PluralityMechanism{}, 5, 1000, rng);
  CHECK(odd.p_correct_minority == 1.0);
  CHECK(odd.p_correct_slight_majority == 0.0);
}

TEST_CASE("random dictator") {
  Rng rng(2);
  const RandomDictatorMechanism rd;
  const auto d = *rd.distribution({{"A", 3}, {"B", 2}});
  CHECK(d.at("A") == Approx(0.6));
  CHECK(d.at("B") == Approx(0.4));
  const auto r = trinity_check(rd, 5, 1000, rng);
  CHECK(r.p_correct_minority == Approx(0.6));
  CHECK(r.p_correct_slight_majority == Approx(0.4));
  CHECK(r.robust_minority);
  CHECK_FALSE(r.robust_slight_majority);
  CHECK(r.trinity_holds == true);
}

TEST_CASE("a constant mechanism fails symmetry and the verdict is withheld") {
  Rng rng(3);
  const auto r = trinity_check(ConstantMechanism{"A"}, 5, 1000, rng);
  CHECK_FALSE(r.symmetric_ok);
  CHECK_FALSE(r.trinity_holds.has_value());
  CHECK(r.robust_minority);
  CHECK(r.robust_slight_majority);
}

TEST_CASE("Monte-Carlo checks on a subsampling mechanism") {
  Rng rng(4);
  const auto r = trinity_check(SubsampleMechanism{7}, 5, 4000, rng);
  CHECK_FALSE(r.exact);
  CHECK(r.symmetric_ok);
  CHECK(r.trinity_holds == true);
}

TEST_CASE("200 random symmetric mechanisms: none is robust on both sides") {
  Rng rng(5);
  const auto mechs = random_symmetric_mechanisms(200, 5, rng);
  CHECK(mechs.size() == 200);
  int double_robust = 0;
  int withheld = 0;
  for (const auto& m : mechs) {
    const auto r = trinity_check(*m, 5, 2000, rng);
    if (r.robust_minority && r.robust_slight_majority && r.symmetric_ok) ++double_robust;
    if (!r.trinity_holds) ++withheld;
    if (r.exact) CHECK(r.symmetric_ok);
  }
  CHECK(double_robust == 0);
  CHECK(withheld <= 4);
}

TEST_CASE("score mechanism validation") {
  CHECK_THROWS_AS(ScoreMechanism({}), std::invalid_argument);
  CHECK_THROWS_AS(ScoreMechanism({0.5, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(ScoreMechanism({-1.0, 0.2}), std::invalid_argument);
  const ScoreMechanism flat({0.0, 0.0, 0.0});
  const auto d = *flat.distribution({{"A", 1}, {"B", 1}});
  CHECK(d.at("A") == Approx(0.5));
  CHECK_THROWS_AS(flat.distribution({{"A", 3}}), std::out_of_range);
  Rng rng(1);
  CHECK_THROWS_AS(trinity_check(flat, 1, 10, rng), std::invalid_argument);
}
