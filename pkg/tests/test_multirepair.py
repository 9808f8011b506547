import random
from fractions import Fraction
from itertools import combinations

import pytest

from detcode.code import build_encoder, build_message_matrix, encode
from detcode.field import Field, vec_mat
from detcode.multirepair import (
    CentralRepairPlan,
    OverlapError,
    TooManyFailures,
    centralized_bandwidth,
    centralized_repair,
    decode_failed_nodes,
    decompress_joint,
    joint_bandwidth,
    joint_helper_payload,
    multi_repair_matrix,
    null_space_matrix,
    single_payload_from_joint,
    split_segments,
    supercode_helper_totals,
    supercode_schedule,
)
from detcode.repair import helper_payload, repair_matrix
from detcode.subsets import binom, subsets

from oracles import brute_rank


# --- bandwidth formulas --------------------------------------------------


def test_joint_bandwidth_reduces_to_single():
    for d in range(2, 12):
        for m in range(1, d + 1):
            assert joint_bandwidth(d, m, 1) == binom(d - 1, m - 1)


def test_joint_bandwidth_goldens():
    assert joint_bandwidth(10, 3, 2) == 64
    assert joint_bandwidth(10, 3, 8) == 120
    assert joint_bandwidth(4, 2, 2) == 5


def test_centralized_bandwidth_goldens():
    assert centralized_bandwidth(10, 3, 2) == Fraction(306, 5)
    assert centralized_bandwidth(10, 3, 8) == 99  # file size over d, saturated
    for d in range(2, 12):
        for m in range(1, d + 1):
            assert centralized_bandwidth(d, m, 1) == binom(d - 1, m - 1)


def test_bandwidth_monotonicity_and_caps():
    for d in range(2, 13):
        for m in range(1, d + 1):
            alpha = binom(d, m)
            prev = 0
            for e in range(1, d + 1):
                value = joint_bandwidth(d, m, e)
                assert prev <= value <= alpha
                prev = value
                assert centralized_bandwidth(d, m, e) / alpha <= Fraction(
                    m * (d + 1), d * (m + 1)
                )


def test_total_download_telescopes():
    """Sequential total equals the closed form for every (d, m, e)."""
    for d in range(1, 13):
        for m in range(1, d + 1):
            for e in range(1, d + 1):
                total = sum(joint_bandwidth(d, m, j) for j in range(1, e + 1))
                total += (d - e) * joint_bandwidth(d, m, e)
                assert total == m * (binom(d + 1, m + 1) - binom(d - e + 1, m + 1))
                assert Fraction(total, d) == centralized_bandwidth(d, m, e)


# --- concatenated repair matrix ------------------------------------------


def test_concatenation_structure(encoder8):
    xi = multi_repair_matrix((5, 6), 2, encoder8)
    assert xi.shape == (6, 8)
    left = repair_matrix(5, 2, encoder8)
    right = repair_matrix(6, 2, encoder8)
    assert xi.submatrix(range(6), range(4)) == left
    assert xi.submatrix(range(6), range(4, 8)) == right


def test_single_failure_concatenation_is_plain_matrix(encoder8):
    assert multi_repair_matrix((5,), 2, encoder8) == repair_matrix(5, 2, encoder8)


def test_two_failure_rank_is_five(encoder8):
    """Elimination and the minor-search oracle agree on rank 5 for the 6x8 case."""
    xi = multi_repair_matrix((5, 6), 2, encoder8)
    assert xi.rank() == 5
    assert brute_rank(xi) == 5


def test_rank_bound_sweep(encoder8):
    for m in (1, 2, 3, 4):
        for e in range(1, 5):
            for failed in combinations((5, 6, 7, 8), e):
                xi = multi_repair_matrix(failed, m, encoder8)
                assert xi.rank() <= joint_bandwidth(4, m, e)


# --- null-space certificate ----------------------------------------------


def test_certificate_golden_entries(encoder8):
    cert = null_space_matrix((5, 6), 2, encoder8)
    assert cert.anchor == (1, 2)
    assert cert.row_labels == ((3, 4),)
    p5, p6 = encoder8.row(5), encoder8.row(6)
    cols = subsets(4, 2)
    expected = {
        (1, 2): p5[3] * p6[2] - p5[2] * p6[3],
        (1, 3): p5[1] * p6[3] - p5[3] * p6[1],
        (1, 4): p5[2] * p6[1] - p5[1] * p6[2],
        (2, 3): p5[3] * p6[0] - p5[0] * p6[3],
        (2, 4): p5[0] * p6[2] - p5[2] * p6[0],
        (3, 4): p5[1] * p6[0] - p5[0] * p6[1],
    }
    for label, value in expected.items():
        assert cert.matrix[0, cols.rank(label)] == value % 13


def test_certificate_annihilates_each_column(encoder8):
    cert = null_space_matrix((5, 6), 2, encoder8)
    xi = multi_repair_matrix((5, 6), 2, encoder8)
    for j in range(xi.cols):
        col = xi.column(j)
        assert all(v == 0 for v in cert.matrix.mul_vec(col))


def test_certificate_sweep(encoder8):
    for m in (1, 2, 3, 4):
        for e in range(1, 5):
            for failed in combinations((5, 6, 7, 8), e):
                cert = null_space_matrix(failed, m, encoder8)
                assert cert.matrix.shape == (binom(4 - e, m), binom(4, m))
                assert cert.matrix.rank() == binom(4 - e, m)
                xi = multi_repair_matrix(failed, m, encoder8)
                assert (cert.matrix @ xi).is_zero()


def test_certificate_spot_check_d6():
    enc = build_encoder(10, 6, Field(11))
    for e in (1, 2, 3):
        for failed in [tuple(range(7, 7 + e)), tuple(range(1, 1 + e))]:
            cert = null_space_matrix(failed, 3, enc)
            assert cert.matrix.rank() == binom(6 - e, 3)
            xi = multi_repair_matrix(failed, 3, enc)
            assert (cert.matrix @ xi).is_zero()
            assert xi.rank() <= joint_bandwidth(6, 3, e)


def test_certificate_empty_when_all_helpers_fail(encoder8):
    cert = null_space_matrix((5, 6, 7, 8), 2, encoder8)
    assert cert.matrix.shape == (0, 6)
    assert joint_bandwidth(4, 2, 4) == 6  # saturation at full node size


def test_too_many_failures(encoder8):
    with pytest.raises(TooManyFailures):
        null_space_matrix((1, 2, 3, 4, 5), 2, encoder8)


# --- joint payloads -------------------------------------------------------


def test_joint_payload_size_and_roundtrip(encoder8, contents8):
    failed = (5, 6)
    xi = multi_repair_matrix(failed, 2, encoder8)
    for h in (1, 2, 3, 4):
        payload = joint_helper_payload(contents8[h - 1], h, failed, encoder8, 2)
        assert len(payload.symbols) == 5
        full = decompress_joint(payload, encoder8)
        assert full == vec_mat(contents8[h - 1], xi)


def test_joint_payload_single_failure_matches_plain(encoder8, contents8):
    joint = joint_helper_payload(contents8[0], 1, (5,), encoder8, 2)
    plain = helper_payload(contents8[0], 1, 5, encoder8, 2)
    assert joint.symbols == plain.symbols
    assert joint.pivot_indices == plain.pivot_indices


def test_segment_extraction_matches_single_payload(encoder8, contents8):
    joint = joint_helper_payload(contents8[2], 3, (5, 7), encoder8, 2)
    derived = single_payload_from_joint(joint, 7, encoder8)
    plain = helper_payload(contents8[2], 3, 7, encoder8, 2)
    assert derived == plain


def test_split_segments(encoder8):
    vector = list(range(8))
    assert split_segments(vector, 2, 4, 2) == [[0, 1, 2, 3], [4, 5, 6, 7]]


def test_joint_decode_equals_single_repairs(encoder8, contents8):
    failed = (5, 8)
    helpers = (1, 2, 3, 4)
    payloads = [
        joint_helper_payload(contents8[h - 1], h, failed, encoder8, 2) for h in helpers
    ]
    decoded = decode_failed_nodes(payloads, helpers, encoder8, failed)
    assert decoded[5] == contents8[4]
    assert decoded[8] == contents8[7]


def test_joint_repair_every_failure_pair(encoder8, contents8):
    for failed in combinations(range(1, 9), 2):
        helpers = tuple(h for h in range(1, 9) if h not in failed)[:4]
        payloads = [
            joint_helper_payload(contents8[h - 1], h, failed, encoder8, 2)
            for h in helpers
        ]
        assert all(len(p.symbols) <= 5 for p in payloads)
        decoded = decode_failed_nodes(payloads, helpers, encoder8, failed)
        for f in failed:
            assert decoded[f] == contents8[f - 1]


def test_joint_repair_all_modes(gf13, encoder8):
    """Joint two-failure repair stays exact at every trade-off mode."""
    rng = random.Random(55)
    failed = (6, 8)
    helpers = (1, 3, 5, 7)
    for m in range(1, 5):
        file_symbols = m * binom(5, m + 1)
        msg = build_message_matrix(
            [rng.randrange(13) for _ in range(file_symbols)], 4, m, gf13
        )
        contents = encode(encoder8, msg)
        payloads = [
            joint_helper_payload(contents[h - 1], h, failed, encoder8, m)
            for h in helpers
        ]
        assert all(len(p.symbols) <= joint_bandwidth(4, m, 2) for p in payloads)
        decoded = decode_failed_nodes(payloads, helpers, encoder8, failed)
        for f in failed:
            assert decoded[f] == contents[f - 1]


# --- centralized sequential repair ----------------------------------------


def test_plan_accounting():
    plan = CentralRepairPlan((5, 6), (1, 2, 3, 4), 2)
    assert plan.per_helper_bandwidth == (3, 5, 5, 5)
    assert plan.served_prefix(1) == (5,)
    assert plan.served_prefix(3) == (5, 6)
    assert plan.total_bandwidth == 18
    assert Fraction(plan.total_bandwidth, plan.d) == centralized_bandwidth(4, 2, 2)
    assert plan.helper_sequence(0) == (1, 2, 3, 4)
    assert plan.helper_sequence(1) == (5, 2, 3, 4)


def test_plan_rejects_overlap():
    with pytest.raises(OverlapError):
        CentralRepairPlan((5, 6), (1, 2, 3, 5), 2)


def test_plan_totals_match_closed_form_d10():
    for e in range(1, 11):
        plan = CentralRepairPlan(
            tuple(range(1, e + 1)), tuple(range(11, 21)), 3
        )
        assert plan.total_bandwidth == 3 * (binom(11, 4) - binom(11 - e, 4))


def test_centralized_repair_exact_and_within_budget(encoder8, contents8):
    for e in (2, 3):
        for failed in combinations(range(1, 9), e):
            helpers = tuple(h for h in range(1, 9) if h not in failed)[:4]
            repaired, sent = centralized_repair(
                failed, helpers, {h: contents8[h - 1] for h in helpers}, encoder8, 2
            )
            for f in failed:
                assert repaired[f] == contents8[f - 1]
            assert sum(sent.values()) <= 4 * centralized_bandwidth(4, 2, e)


def test_centralized_repair_single_failure_costs_beta_each(encoder8, contents8):
    repaired, sent = centralized_repair(
        (5,), (1, 2, 3, 4), {h: contents8[h - 1] for h in (1, 2, 3, 4)}, encoder8, 2
    )
    assert repaired[5] == contents8[4]
    assert all(v == 3 for v in sent.values())


# --- rotation schedule -----------------------------------------------------


def test_schedule_is_a_latin_square():
    table = supercode_schedule(5, 2)
    for row in table:
        assert sorted(row) == [1, 2, 3, 4, 5]
    for col in zip(*table):
        assert sorted(col) == [1, 2, 3, 4, 5]


def test_schedule_rotation_rule():
    table = supercode_schedule(4, 2)
    assert table[0] == (1, 2, 3, 4)
    assert table[1] == (2, 3, 4, 1)
    assert table[3] == (4, 1, 2, 3)


def test_supercode_totals_equalized():
    for d, m in [(4, 2), (10, 3), (6, 3)]:
        for e in range(1, d + 1):
            totals = supercode_helper_totals(d, m, e)
            expected = m * (binom(d + 1, m + 1) - binom(d - e + 1, m + 1))
            assert totals == [expected] * d


def test_supercode_data_plane_integration(gf13, encoder8):
    """One d-fold concatenated run: rotated roles, every helper pays the same."""
    rng = random.Random(404)
    segments = [
        build_message_matrix([rng.randrange(13) for _ in range(20)], 4, 2, gf13)
        for _ in range(4)
    ]
    contents = {i: [] for i in range(1, 9)}
    for seg in segments:
        for node, row in enumerate(encode(encoder8, seg), start=1):
            contents[node].append(row)
    failed = (5, 6)
    helpers = (1, 2, 3, 4)
    schedule = supercode_schedule(4, len(failed))
    per_helper = dict.fromkeys(helpers, 0)
    for seg_idx, roles in enumerate(schedule):
        by_role = {role: helpers[slot] for slot, role in enumerate(roles)}
        ordered = tuple(by_role[j] for j in range(1, 5))
        repaired, sent = centralized_repair(
            failed,
            ordered,
            {h: contents[h][seg_idx] for h in helpers},
            encoder8,
            2,
        )
        for f in failed:
            assert repaired[f] == contents[f][seg_idx]
        for h, v in sent.items():
            per_helper[h] += v
    expected = 2 * (binom(5, 3) - binom(3, 3))  # d * average per-helper cost
    assert set(per_helper.values()) == {expected}
