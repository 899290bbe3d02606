"""Block-by-block message inclusion, the mempool, and miner censorship."""

import random

import pytest

from trustless_mech import ChainState, Message, MessageKind, MinerMode, MinerPolicy
from trustless_mech.chain import MAX_PAYLOAD_BYTES, DeadlineOutOfRange, PayloadTooLarge


def commit_msg(sender: str, payload: bytes = b"\x00" * 32) -> Message:
    return Message(sender=sender, contract_id="c", kind=MessageKind.COMMIT, payload=payload)


def reveal_msg(sender: str, payload: bytes = b"\x01") -> Message:
    return Message(sender=sender, contract_id="c", kind=MessageKind.REVEAL, payload=payload)


def test_honest_miner_includes_next_block():
    chain = ChainState()
    chain.submit(commit_msg("alice"))
    chain.submit(commit_msg("bob"))
    assert chain.height == 0
    chain.advance_block()
    assert chain.height == 1
    assert [m.sender for m in chain.blocks[0]] == ["alice", "bob"]
    assert chain.mempool == []


def test_submit_stamps_current_height():
    chain = ChainState()
    chain.advance_to(4)
    stamped = chain.submit(commit_msg("alice"))
    assert stamped.submitted_at == 4
    chain.advance_block()
    assert chain.blocks[4][0].submitted_at == 4


def test_inclusion_order_is_submission_order_within_block():
    chain = ChainState()
    for name in ["carol", "alice", "bob"]:
        chain.submit(commit_msg(name))
    chain.advance_block()
    assert [m.sender for m in chain.blocks[0]] == ["carol", "alice", "bob"]


def test_censored_reveal_is_delayed_until_after_window():
    # reveal submitted at height 3, censored through height 5: first block it
    # can enter is height 6
    chain = ChainState()
    policy = MinerPolicy.censor({"alice"}, until=5)
    chain.advance_to(3, policy)
    chain.submit(reveal_msg("alice"))
    chain.advance_to(5, policy)
    assert all("alice" not in [m.sender for m in b] for b in chain.blocks)
    assert [m.sender for m in chain.mempool] == ["alice"]
    chain.advance_block(policy)
    assert chain.height == 6
    assert [m.sender for m in chain.blocks[5]] == ["alice"]
    assert chain.mempool == []


def test_censorship_delays_never_drops():
    # the length bound: a message censored until U lands at exactly
    # max(submit_height, U) + 1 under a constant policy
    rng = random.Random(3)
    for _ in range(100):
        submit_at = rng.randrange(0, 8)
        until = rng.randrange(0, 12)
        chain = ChainState()
        policy = MinerPolicy.censor({"z"}, until=until)
        chain.advance_to(submit_at, policy)
        chain.submit(reveal_msg("z"))
        landing = max(submit_at, until) + 1
        chain.advance_to(landing + 2, policy)
        heights = [h for h, m in chain.included_with_heights() if m.sender == "z"]
        assert heights == [landing]


def test_commits_are_never_censored():
    chain = ChainState()
    policy = MinerPolicy.censor({"alice"}, until=100)
    chain.submit(commit_msg("alice"))
    chain.advance_block(policy)
    assert [m.sender for m in chain.blocks[0]] == ["alice"]


def test_non_targets_pass_through_a_censoring_miner():
    chain = ChainState()
    policy = MinerPolicy.censor({"alice"}, until=100)
    chain.submit(reveal_msg("alice"))
    chain.submit(reveal_msg("bob"))
    chain.advance_block(policy)
    assert [m.sender for m in chain.blocks[0]] == ["bob"]
    assert [m.sender for m in chain.mempool] == ["alice"]


def test_every_message_is_in_exactly_one_place():
    # conservation: blocks and mempool partition the submitted messages
    rng = random.Random(9)
    chain = ChainState()
    policy = MinerPolicy.censor({"t0", "t1"}, until=6)
    submitted = 0
    for step in range(12):
        for _ in range(rng.randrange(0, 3)):
            sender = rng.choice(["t0", "t1", "u0", "u1"])
            kind = rng.choice([MessageKind.COMMIT, MessageKind.REVEAL])
            chain.submit(Message(sender, "c", kind, b"\x07"))
            submitted += 1
        chain.advance_block(policy if rng.random() < 0.7 else None)
    in_blocks = sum(len(b) for b in chain.blocks)
    assert in_blocks + len(chain.mempool) == submitted


def test_messages_through_slices_by_deadline():
    chain = ChainState()
    chain.submit(commit_msg("a"))
    chain.advance_block()
    chain.submit(commit_msg("b"))
    chain.advance_block()
    chain.advance_block()
    assert [m.sender for m in chain.messages_through(1)] == ["a"]
    assert [m.sender for m in chain.messages_through(2)] == ["a", "b"]
    assert [m.sender for m in chain.messages_through(3)] == ["a", "b"]
    assert chain.messages_through(0) == []


def test_messages_through_rejects_out_of_range_deadlines():
    chain = ChainState()
    chain.advance_to(2)
    with pytest.raises(DeadlineOutOfRange):
        chain.messages_through(3)
    with pytest.raises(DeadlineOutOfRange):
        chain.messages_through(-1)


def test_payload_size_limit():
    chain = ChainState()
    chain.submit(commit_msg("a", payload=bytes(MAX_PAYLOAD_BYTES)))
    with pytest.raises(PayloadTooLarge):
        chain.submit(commit_msg("a", payload=bytes(MAX_PAYLOAD_BYTES + 1)))
    small = ChainState(max_payload=4)
    with pytest.raises(PayloadTooLarge):
        small.submit(commit_msg("a", payload=bytes(5)))


def test_canonical_bytes_deterministic_and_history_sensitive():
    def build(order):
        chain = ChainState()
        for name in order:
            chain.submit(commit_msg(name))
        chain.advance_block()
        chain.submit(reveal_msg(order[0]))
        chain.advance_block()
        return chain

    a = build(["x", "y"])
    b = build(["x", "y"])
    c = build(["y", "x"])
    assert a.canonical_bytes() == b.canonical_bytes()
    assert a.canonical_bytes() != c.canonical_bytes()


def test_canonical_bytes_distinguishes_block_boundaries():
    # same messages, different block placement
    one = ChainState()
    one.submit(commit_msg("a"))
    one.submit(commit_msg("b"))
    one.advance_block()
    one.advance_block()

    two = ChainState()
    two.submit(commit_msg("a"))
    two.advance_block()
    two.submit(commit_msg("b"))
    two.advance_block()

    assert one.canonical_bytes() != two.canonical_bytes()


def test_advance_to_mines_exactly_to_target():
    chain = ChainState()
    chain.advance_to(7)
    assert chain.height == 7
    assert len(chain.blocks) == 7
    chain.advance_to(7)
    assert chain.height == 7


def test_included_with_heights_is_one_indexed():
    chain = ChainState()
    chain.advance_block()
    chain.submit(commit_msg("a"))
    chain.advance_block()
    pairs = chain.included_with_heights()
    assert [(h, m.sender) for h, m in pairs] == [(2, "a")]


def test_honest_policy_is_the_default():
    assert MinerPolicy.honest().mode is MinerMode.HONEST
    chain = ChainState()
    chain.submit(reveal_msg("alice"))
    chain.advance_block()
    assert [m.sender for m in chain.blocks[0]] == ["alice"]
