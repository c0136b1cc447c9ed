// Randomized algebraic laws, 10000 cases each.

#include "doctest.h"
#include "laws.hpp"

namespace {

void check_law(const std::string& name) {
    for (const auto& law : laws::all())
        if (law.name == name) {
            laws::Outcome o = laws::run(law, 10000);
            CHECK_MESSAGE(o.failures == 0, name << ": " << o.failures << " failures, first: " << o.first);
            return;
        }
    FAIL("no law named " << name);
}

}  // namespace

TEST_CASE("graded commutativity") { check_law("graded commutativity"); }
TEST_CASE("associativity") { check_law("associativity"); }
TEST_CASE("Leibniz rule for d") { check_law("Leibniz rule for d"); }
TEST_CASE("Leibniz rule for d_dR") { check_law("Leibniz rule for d_dR"); }
TEST_CASE("Leibniz rule for partial derivatives") { check_law("Leibniz rule for partial derivatives"); }
TEST_CASE("d squares to zero") { check_law("d squares to zero"); }
TEST_CASE("d_dR squares to zero") { check_law("d_dR squares to zero"); }
TEST_CASE("d and d_dR anticommute") { check_law("d and d_dR anticommute"); }
TEST_CASE("parser round trip") { check_law("parser round trip"); }
