import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from summarycs.codebook import (
    BitSubset,
    Codebook,
    Label,
    Summary,
    complete_codebook,
    conforms,
    deposit_bits,
    extract,
    extract_bits,
    random_codebook,
)
from summarycs.errors import CapacityError, InvalidArgument


def brute_extract(bitstring, positions):
    return int("".join(bitstring[p - 1] for p in positions), 2)


class TestLabelAndExtract:
    def test_msb_first_example(self):
        assert extract(Label.from_bitstring("1011"), BitSubset(4, (1, 2))) == 0b10

    def test_all_zero_label(self):
        assert extract(Label.from_bitstring("0000"), BitSubset(4, (1, 3))) == 0

    def test_three_bit_subset(self):
        assert extract(Label.from_bitstring("110101"), BitSubset(6, (2, 5, 6))) == 0b101

    def test_label_is_column_index(self):
        lab = Label.from_bitstring("1010")
        assert lab.column == 10
        assert lab.bit(1) == 1 and lab.bit(2) == 0
        assert lab.bitstring() == "1010"

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgument):
            extract(Label(4, 3), BitSubset(5, (1, 2)))

    @pytest.mark.parametrize("bits", [16, -1])
    def test_label_range(self, bits):
        with pytest.raises(InvalidArgument):
            Label(4, bits)

    @given(st.integers(1, 20).flatmap(
        lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1),
                            st.sets(st.integers(1, n), min_size=1).map(sorted))))
    def test_extract_matches_string_oracle(self, args):
        n, bits, pos = args
        s = format(bits, f"0{n}b")
        assert extract_bits(bits, n, pos) == brute_extract(s, pos)
        # deposit is a right inverse of extract on the chosen positions
        pat = extract_bits(bits, n, pos)
        assert extract_bits(deposit_bits(pat, n, pos), n, pos) == pat


class TestConforms:
    S12_10 = Summary(BitSubset(4, (1, 2)), 0b10)

    def test_member(self):
        assert conforms(Label.from_bitstring("1001"), self.S12_10)

    def test_non_member(self):
        assert not conforms(Label.from_bitstring("0001"), self.S12_10)

    def test_full_subset_self(self):
        lab = Label.from_bitstring("0110")
        assert conforms(lab, Summary(BitSubset(4, (1, 2, 3, 4)), lab.bits))

    def test_pattern_range(self):
        with pytest.raises(InvalidArgument):
            Summary(BitSubset(4, (1, 2)), 4)


class TestBitSubset:
    @pytest.mark.parametrize("pos", [(2, 1), (1, 1), (0, 2), (1, 5), ()])
    def test_rejects_noncanonical(self, pos):
        with pytest.raises(InvalidArgument):
            BitSubset(4, pos)


class TestCodebooks:
    def test_complete_4_2(self):
        cb = complete_codebook(4, 2)
        assert cb.m == 6 and cb.rows == 24
        assert cb.subsets == tuple(itertools.combinations(range(1, 5), 2))

    def test_complete_full_width(self):
        cb = complete_codebook(4, 4)
        assert cb.m == 1 and cb.rows == 16

    def test_complete_10_3(self):
        cb = complete_codebook(10, 3)
        assert (cb.m, cb.rows) == (120, 960)

    def test_complete_capacity(self):
        with pytest.raises(CapacityError):
            complete_codebook(60, 30)

    def test_row_index_examples(self):
        cb = complete_codebook(6, 3)
        assert cb.row_index(0, 0) == 0
        assert cb.row_index(3, 5) == 29

    def test_row_roundtrip_exhaustive(self):
        cb = complete_codebook(4, 2)
        for r in range(cb.rows):
            s = cb.summary_of_row(r)
            i = cb.subsets.index(s.subset.positions)
            assert cb.row_index(i, s.pattern) == r

    @pytest.mark.parametrize("args", [(6, 0), (0, 4), (-1, 0)])
    def test_row_index_range(self, args):
        cb = complete_codebook(4, 2)
        with pytest.raises(InvalidArgument):
            cb.row_index(*args)

    def test_duplicate_subsets_rejected(self):
        with pytest.raises(InvalidArgument):
            Codebook(4, 2, ((1, 2), (1, 2)))

    def test_random_deterministic(self):
        a = random_codebook(10, 3, 7, seed=5)
        b = random_codebook(10, 3, 7, seed=5)
        assert a == b and a.subsets == b.subsets

    def test_random_single(self):
        cb = random_codebook(10, 3, 1, seed=0)
        assert cb.m == 1 and cb.d == 3

    def test_random_coupon_collector(self):
        for seed in range(20):
            assert random_codebook(4, 2, 10_000, seed=seed).m == 6

    def test_random_dedup_records_request(self):
        cb = random_codebook(4, 2, 50, seed=1)
        assert cb.m <= 6 and cb.requested_m == 50

    def test_random_distinct_mode(self):
        cb = random_codebook(8, 3, 40, seed=2, distinct=True)
        assert cb.m == 40
        with pytest.raises(InvalidArgument):
            random_codebook(4, 2, 7, seed=0, distinct=True)

    def test_random_uniformity(self):
        # every 2-subset of 5 positions should be drawn about equally often
        counts = {}
        for seed in range(2000):
            s = random_codebook(5, 2, 1, seed=seed).subsets[0]
            counts[s] = counts.get(s, 0) + 1
        assert len(counts) == 10
        assert min(counts.values()) > 140 and max(counts.values()) < 260


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))),
       st.integers(0, 2**32 - 1))
def test_vectorised_patterns_match_scalar(nd, seed):
    n, d = nd
    cb = random_codebook(n, d, 5, seed=seed)
    labels = np.arange(1 << n)
    pats = cb.patterns(labels)
    for lab in range(0, 1 << n, max(1, (1 << n) // 17)):
        for i, s in enumerate(cb.subsets):
            assert pats[lab, i] == extract_bits(lab, n, s)
    rows = cb.conforming_rows(labels)
    assert np.array_equal(rows, (np.arange(cb.m) << d) + pats)


def test_deposit_rows_inverse():
    cb = complete_codebook(6, 3)
    deps = cb.deposit_rows(np.arange(cb.rows))
    for r in range(cb.rows):
        s = cb.summary_of_row(r)
        assert int(deps[r]) == deposit_bits(s.pattern, 6, s.subset.positions)


def test_row_and_column_counts_small():
    for n, d in [(4, 2), (5, 3), (6, 1)]:
        cb = complete_codebook(n, d)
        rows = cb.conforming_rows(np.arange(1 << n))
        # each label hits one row per subset, each row has 2^(n-d) labels
        assert rows.shape == (1 << n, math.comb(n, d))
        assert np.all(np.bincount(rows.ravel(), minlength=cb.rows) == 1 << (n - d))
