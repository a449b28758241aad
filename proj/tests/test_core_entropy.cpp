#include <gtest/gtest.h>

#include <cmath>

#include "brute_force.hpp"
#include "mured/core_entropy.hpp"
#include "mured/reference_oracle.hpp"

using namespace mured;

namespace {

joint_table one_var(std::vector<double> cells) {
    std::vector<std::string> alphabet;
    for (std::size_t i = 0; i < cells.size(); ++i) alphabet.push_back("c" + std::to_string(i));
    return joint_table({variable_spec("x", alphabet)}, std::move(cells));
}

joint_table binary(std::vector<std::string> names, std::vector<double> cells) {
    std::vector<variable_spec> vars;
    for (auto& n : names) vars.emplace_back(n, std::vector<std::string>{"0", "1"});
    return joint_table(std::move(vars), std::move(cells));
}

joint_table xor_table() { return binary({"x1", "x2", "x3"}, {1, 0, 0, 1, 0, 1, 1, 0}); }

}  // namespace

TEST(Entropy, UniformFourCellsIsTwoBits) { EXPECT_DOUBLE_EQ(entropy(one_var({1, 1, 1, 1})).value, 2.0); }

TEST(Entropy, DeterministicIsZero) { EXPECT_EQ(entropy(one_var({0, 7, 0, 0})).value, 0.0); }

TEST(Entropy, SkewedThreeCells) {
    const double expected = brute::entropy_bits({0.5L, 0.25L, 0.25L});
    EXPECT_NEAR(expected, 1.5, 1e-15);
    EXPECT_NEAR(entropy(one_var({0.5, 0.25, 0.25})).value, expected, 1e-12);
}

TEST(Entropy, BaseIsCarried) {
    const auto h = entropy(one_var({1, 1}), log_base::nats);
    EXPECT_EQ(h.base, log_base::nats);
    EXPECT_NEAR(h.value, std::log(2.0), 1e-15);
    EXPECT_NEAR(entropy(one_var({1, 1, 1, 1, 1, 1, 1, 1, 1, 1}), log_base::hartleys).value, 1.0, 1e-15);
}

TEST(MaxEntropy, AlphabetAndObservedSupport) {
    const auto full = binary({"a", "b"}, {1, 1, 1, 1});
    EXPECT_DOUBLE_EQ(max_entropy(full, support_mode::alphabet).value, 2.0);
    const auto holed = binary({"a", "b"}, {1, 0, 1, 1});
    EXPECT_NEAR(max_entropy(holed, support_mode::observed).value, std::log2(3.0), 1e-15);
    EXPECT_NEAR(max_entropy(holed, support_mode::observed).value, 1.584962500721156, 1e-12);
    EXPECT_DOUBLE_EQ(max_entropy(holed, support_mode::alphabet).value, 2.0);
    EXPECT_EQ(max_entropy(one_var({3}), support_mode::alphabet).value, 0.0);
}

TEST(ShannonRedundancy, Examples) {
    EXPECT_NEAR(shannon_redundancy(one_var({1, 1, 1, 1, 1, 1, 1, 1})), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(shannon_redundancy(one_var({0, 0, 0, 2, 0, 0, 0, 0})), 1.0);
    const double expected = 1.0 - brute::entropy_bits({0.5L, 0.25L, 0.25L}) / std::log2(3.0);
    EXPECT_NEAR(expected, 0.0536, 1e-4);
    EXPECT_NEAR(shannon_redundancy(one_var({0.5, 0.25, 0.25})), expected, 1e-12);
}

TEST(ShannonRedundancy, SingleOutcomeChannelIsUndefined) {
    EXPECT_THROW(shannon_redundancy(one_var({4})), undefined_redundancy);
    EXPECT_THROW(shannon_redundancy(one_var({0, 4}), support_mode::observed), undefined_redundancy);
}

TEST(Marginalize, AllVariablesIsIdentity) {
    const auto t = xor_table();
    EXPECT_EQ(marginalize(t, t.names()), t);
}

TEST(Marginalize, IndependentCoinsGiveFairCoin) {
    const auto t = binary({"a", "b"}, {0.25, 0.25, 0.25, 0.25});
    const auto m = marginalize(t, {"b"});
    ASSERT_EQ(m.dimension(), 1u);
    EXPECT_DOUBLE_EQ(m.cells()[0], 0.5);
    EXPECT_DOUBLE_EQ(m.cells()[1], 0.5);
}

TEST(Marginalize, XorPairsAreUniform) {
    const auto t = xor_table();
    for (const auto& pair : std::vector<std::vector<std::string>>{{"x1", "x2"}, {"x1", "x3"}, {"x2", "x3"}, {"x3", "x1"}}) {
        const auto m = marginalize(t, pair);
        EXPECT_DOUBLE_EQ(m.total(), t.total());
        for (double c : m.cells()) EXPECT_DOUBLE_EQ(c, 1.0);
    }
}

TEST(Marginalize, FollowsRequestedAxisOrder) {
    // a is slow, b fast: cells (a0b0, a0b1, a1b0, a1b1)
    const auto t = binary({"a", "b"}, {1, 2, 3, 4});
    const auto m = marginalize(t, {"b", "a"});
    EXPECT_EQ(m.names(), (std::vector<std::string>{"b", "a"}));
    EXPECT_EQ(std::vector<double>(m.cells().begin(), m.cells().end()), (std::vector<double>{1, 3, 2, 4}));
}

TEST(Marginalize, Errors) {
    const auto t = xor_table();
    EXPECT_THROW(marginalize(t, {}), invalid_argument);
    EXPECT_THROW(marginalize(t, {"nope"}), unknown_variable);
    EXPECT_THROW(marginalize(t, {"x1", "x1"}), invalid_argument);
}

TEST(ConditionalEntropy, Examples) {
    EXPECT_NEAR(conditional_entropy(binary({"a", "b"}, {1, 0, 0, 1}), {"a"}, {"b"}).value, 0.0, 1e-15);
    EXPECT_NEAR(conditional_entropy(binary({"a", "b"}, {1, 1, 1, 1}), {"a"}, {"b"}).value, 1.0, 1e-15);
    EXPECT_NEAR(conditional_entropy(xor_table(), {"x1"}, {"x2", "x3"}).value, 0.0, 1e-15);
    EXPECT_NEAR(conditional_entropy(xor_table(), {"x1"}, {}).value, 1.0, 1e-15);
}

TEST(ConditionalEntropy, OverlapIsRejected) {
    EXPECT_THROW(conditional_entropy(xor_table(), {"x1", "x2"}, {"x2"}), invalid_argument);
    EXPECT_THROW(conditional_entropy(xor_table(), {}, {"x2"}), invalid_argument);
}

TEST(Thermodynamic, GibbsCoupling) {
    EXPECT_EQ(to_thermodynamic({0.0, log_base::bits}), 0.0);
    EXPECT_DOUBLE_EQ(to_thermodynamic({1.0, log_base::nats}), 1.380649e-23);
    EXPECT_NEAR(to_thermodynamic({1.0, log_base::bits}), 9.5699e-24, 1e-28);
}

TEST(Rebase, Examples) {
    EXPECT_NEAR(rebase({1.0, log_base::bits}, log_base::nats).value, 0.6931471805599453, 1e-15);
    EXPECT_EQ(rebase({0.0, log_base::bits}, log_base::hartleys).value, 0.0);
    EXPECT_NEAR(rebase({2.0, log_base::bits}, log_base::hartleys).value, 2.0 * std::log10(2.0), 1e-15);
    EXPECT_NEAR(rebase({2.0, log_base::bits}, log_base::hartleys).value, 0.60206, 1e-5);
}

TEST(Rebase, RoundTrip) {
    for (double v : {0.0, 1e-9, 0.37, 1.0, 12.5}) {
        for (auto a : {log_base::bits, log_base::nats, log_base::hartleys}) {
            for (auto b : {log_base::bits, log_base::nats, log_base::hartleys}) {
                EXPECT_NEAR(rebase(rebase({v, a}, b), a).value, v, 1e-12);
            }
        }
    }
}

TEST(JointTable, RejectsInvalidContents) {
    EXPECT_THROW(one_var({1, -1}), invalid_table);
    EXPECT_THROW(one_var({1, std::nan("")}), invalid_table);
    EXPECT_THROW(one_var({0, 0}), invalid_table);
    EXPECT_THROW(joint_table({variable_spec("x", {"a", "b"})}, {1, 2, 3}), invalid_table);
    EXPECT_THROW(variable_spec("x", {"a", "a"}), invalid_table);
    EXPECT_THROW(variable_spec("x", {}), invalid_table);
    EXPECT_THROW(joint_table({variable_spec("x", {"a"}), variable_spec("x", {"b"})}, {1}), invalid_table);
    EXPECT_THROW(joint_table({}, {1}), invalid_table);
}

TEST(JointTable, ProbabilitiesSumToOne) {
    const auto t = oracle::random_table(4, 5, 77);
    compensated_sum s;
    for (std::size_t i = 0; i < t.cell_count(); ++i) s.add(t.probability(i));
    EXPECT_NEAR(s.value(), 1.0, 1e-12);
}

// ---- properties over seeded random tables -----------------------------------

class CoreProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(CoreProperties, BoundsAndOrdering) {
    const auto seed = GetParam();
    const auto t = oracle::random_table(2 + seed % 3, 4, seed, seed % 2 == 0 ? 0.0 : 0.5);
    const double h = entropy(t).value;
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, max_entropy(t, support_mode::observed).value + 1e-12);
    EXPECT_LE(max_entropy(t, support_mode::observed).value, max_entropy(t, support_mode::alphabet).value + 1e-12);
    const double r = shannon_redundancy(t);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
}

TEST_P(CoreProperties, ScalingInvariance) {
    const auto t = oracle::random_table(3, 4, GetParam(), 0.25);
    for (double c : {1e-6, 3.0, 1e6}) {
        std::vector<double> scaled(t.cells().begin(), t.cells().end());
        for (double& x : scaled) x *= c;
        const joint_table s(t.variables(), scaled);
        EXPECT_NEAR(entropy(s).value, entropy(t).value, 1e-12);
        EXPECT_NEAR(max_entropy(s, support_mode::observed).value, max_entropy(t, support_mode::observed).value, 1e-12);
        EXPECT_NEAR(shannon_redundancy(s), shannon_redundancy(t), 1e-12);
    }
}

TEST_P(CoreProperties, MergingCellsNeverRaisesEntropy) {
    const auto t = oracle::random_table(2, 5, GetParam());
    std::vector<double> cells(t.cells().begin(), t.cells().end());
    const std::size_t i = GetParam() % cells.size();
    const std::size_t j = (i + 1) % cells.size();
    cells[i] += cells[j];
    cells[j] = 0.0;
    EXPECT_LE(entropy(joint_table(t.variables(), cells)).value, entropy(t).value + 1e-12);
}

TEST_P(CoreProperties, MarginalEntropyMatchesBruteForce) {
    const auto seed = GetParam();
    const auto t = oracle::random_table(2 + seed % 3, 4, seed * 31 + 7, 0.3);
    const auto names = t.names();
    for (const auto& axes : brute::all_subsets(t.dimension())) {
        std::vector<std::string> subset;
        for (auto a : axes) subset.push_back(names[a]);
        EXPECT_NEAR(entropy(marginalize(t, subset)).value, brute::entropy_bits(t, axes), 1e-12);
        EXPECT_DOUBLE_EQ(marginalize(t, subset).total(), t.total());
    }
}

TEST_P(CoreProperties, ConditioningNeverIncreasesEntropy) {
    const auto t = oracle::random_table(3, 4, GetParam() + 1000, 0.2);
    const double hc = conditional_entropy(t, {"x1"}, {"x2", "x3"}).value;
    EXPECT_GE(hc, -1e-12);
    EXPECT_LE(hc, conditional_entropy(t, {"x1"}, {"x2"}).value + 1e-12);
    EXPECT_LE(conditional_entropy(t, {"x1"}, {"x2"}).value, entropy(marginalize(t, {"x1"})).value + 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Seeds, CoreProperties, ::testing::Range<std::uint64_t>(1, 41));
