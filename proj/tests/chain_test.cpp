#include <doctest.h>

#include "topocbt/federation.hpp"

using namespace topocbt;

namespace {

Chain chain_with(Height length, std::vector<AssetUpdate> genesis = {}) {
    Chain c(1, 1, std::move(genesis));
    for (Height h = 1; h <= length; ++h)
        c.append_block(0, {});
    return c;
}

}  // namespace

TEST_CASE("apply_updates is all or nothing") {
    Balances b{{{"A", "x"}, 5}};
    std::vector<AssetUpdate> ok{{"A", "B", "x", 3}};
    CHECK(apply_updates(b, ok));
    CHECK(b.at({"A", "x"}) == 2);
    CHECK(b.at({"B", "x"}) == 3);

    const auto before = b;
    std::vector<AssetUpdate> bad{{"B", "A", "x", 1}, {"A", "B", "x", 9}};
    CHECK_FALSE(apply_updates(b, bad));
    CHECK(b == before);
    std::vector<AssetUpdate> zero{{"A", "B", "x", 0}};
    CHECK_FALSE(apply_updates(b, zero));
}

TEST_CASE("balances survive encoding") {
    Balances b{{{"A", "x"}, 5}, {{"B", "y"}, 7}};
    CHECK(decode_balances(encode_balances(b)) == b);
    auto bytes = encode_balances(b);
    bytes.pop_back();
    CHECK_THROWS_AS(decode_balances(bytes), DecodeError);
}

TEST_CASE("genesis mints and appends link by hash") {
    auto c = chain_with(3, {{"", "A", "x", 5}});
    CHECK(c.balances().at({"A", "x"}) == 5);
    CHECK(c.verify_hash_chain().ok);
    const auto& b2 = c.at({1, 2, 0});
    CHECK(b2.parent_hash == c.at({1, 1, 0}).hash);
    CHECK(to_string(b2.ref) == "c1/h2/b0");
}

TEST_CASE("tampering is detected at the altered block") {
    auto c = chain_with(4, {{"", "A", "x", 5}});
    c.mutable_block_for_testing({1, 2, 0}).payload.push_back({"A", "B", "x", 1});
    const auto check = c.verify_hash_chain();
    CHECK_FALSE(check.ok);
    REQUIRE(check.first_violation);
    CHECK(*check.first_violation == BlockRef{1, 2, 0});
}

TEST_CASE("appending to a missing parent or dead branch fails") {
    auto c = chain_with(2);
    CHECK_THROWS_AS(c.append_block(0, {}, Height{5}), ChainError);
    CHECK_THROWS_AS(c.spawn_fork(9), ChainError);
    const auto fork = c.spawn_fork(2);
    c.resolve_forks();
    CHECK_FALSE(c.branch(fork).live);
    CHECK_THROWS_AS(c.append_block(fork, {}), ChainError);
}

TEST_CASE("longest branch wins, ties go to the lowest label, dead blocks stay") {
    auto c = chain_with(3);
    const auto f = c.spawn_fork(2);
    c.append_block(f, {});
    c.append_block(f, {});
    c.append_block(f, {});  // fork reaches height 4
    CHECK(c.live_fork_count(2) == 1);
    CHECK(c.live_blocks_at(2).size() == 2);
    CHECK(c.canonical_branch() == f);
    const auto stored = c.blocks().size();
    CHECK(c.resolve_forks() == f);
    CHECK(c.blocks().size() == stored);
    CHECK_FALSE(c.is_live({1, 3, 0}));
    CHECK(c.is_live({1, 1, 0}));
    CHECK(c.live_fork_count(2) == 0);

    auto tie = chain_with(3);
    const auto g = tie.spawn_fork(3);
    tie.append_block(g, {});
    CHECK(tie.resolve_forks() == 0);
}

TEST_CASE("fork paths share the prefix below the fork") {
    auto c = chain_with(4);
    const auto f = c.spawn_fork(3);
    c.append_block(f, {});
    CHECK(c.path_block(f, 2) == BlockRef{1, 2, 0});
    CHECK(c.path_block(f, 3) == BlockRef{1, 3, f});
    CHECK(c.parent_of({1, 3, f}) == BlockRef{1, 2, 0});
    CHECK(c.live_blocks_at(3) == std::vector<BlockRef>{{1, 3, 0}, {1, 3, f}});
}

TEST_CASE("locking is all or nothing and re-entrant") {
    Federation fed;
    fed.add_chain(chain_with(3));
    Chain second(2, 1);
    second.append_block(0, {});
    fed.add_chain(std::move(second));

    std::vector<BlockRef> a{{2, 1, 0}, {1, 1, 0}};
    CHECK(std::holds_alternative<LockGrant>(fed.lock_blocks(a, 7)));
    CHECK(std::get<LockGrant>(fed.lock_blocks(a, 7)).refs.front() == BlockRef{1, 1, 0});

    std::vector<BlockRef> b{{1, 2, 0}, {2, 1, 0}};
    auto r = fed.lock_blocks(b, 8);
    REQUIRE(std::holds_alternative<LockConflict>(r));
    CHECK(std::get<LockConflict>(r).holder == 7);
    CHECK_FALSE(fed.holder({1, 2, 0}));

    CHECK_THROWS_AS(fed.release_blocks(b, 7), std::logic_error);
    CHECK(fed.locks_held() == 2);
    fed.release_blocks(a, 7);
    CHECK(fed.locks_held() == 0);
}

TEST_CASE("federation apply appends one block or nothing") {
    Federation fed;
    fed.add_chain(chain_with(1, {{"", "A", "x", 5}}));
    const auto before = fed.chain(1).blocks().size();
    CHECK_FALSE(fed.apply(1, {{"A", "B", "x", 9}}));
    CHECK(fed.chain(1).blocks().size() == before);
    const auto ref = fed.apply(1, {{"A", "B", "x", 2}});
    REQUIRE(ref);
    CHECK(ref->height == 2);
    CHECK(fed.balances().at(1).at({"B", "x"}) == 2);
}

// Two requests climbing the same canonical order: the later one waits on the
// holder of a block it needs and proceeds once it is released.
TEST_CASE("stepwise acquisition waits without forming a cycle") {
    Federation fed;
    fed.add_chain(chain_with(3));
    LockAcquisition first({{1, 1, 0}, {1, 2, 0}}, 1);
    LockAcquisition second({{1, 2, 0}, {1, 1, 0}}, 2);

    CHECK(first.step(fed).status == LockAcquisition::Status::acquired);
    auto s = second.step(fed);
    CHECK(s.status == LockAcquisition::Status::waiting);
    CHECK(s.waiting_on == TxnId{1});
    CHECK(first.step(fed).status == LockAcquisition::Status::acquired);
    CHECK(first.complete());
    fed.release_blocks(first.refs(), 1);
    CHECK(second.step(fed).status == LockAcquisition::Status::acquired);
    CHECK(second.step(fed).status == LockAcquisition::Status::acquired);
    CHECK(second.step(fed).status == LockAcquisition::Status::complete);
}
