import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from summarycs.codebook import Codebook, complete_codebook, random_codebook
from summarycs.measurements import MeasurementVector, encode, encode_values
from summarycs.signal import SparseSignal, ValueMode, generate, is_distinguishable
from summarycs.ssii import (
    CONTRADICTION,
    PARTIAL,
    SUCCESS,
    Conflict,
    DecodeLimits,
    PartialLabel,
    decode_ssii,
    infer_label,
    zero_row_completion,
)


def rows_of(cb, summaries):
    return [cb.row_index(cb.subsets.index(s), p) for s, p in summaries]


class TestPartialLabel:
    def test_assign_and_conflict(self):
        b = PartialLabel(4).assign(0b1100, 0b1000)
        assert b.bitstring() == "10??"
        assert b.assign(0b0110, 0b0110) == Conflict(2)
        assert b.assign(0b0011, 0b0001).bitstring() == "1001"

    def test_complete(self):
        assert PartialLabel(3, 0b111, 0b101).complete
        assert not PartialLabel(3, 0b110, 0b100).complete


class TestInferLabel:
    cb = Codebook(4, 2, ((1, 2), (2, 3), (3, 4)))

    def y_for(self, sig):
        return encode(sig, self.cb)

    def test_disjoint_union(self):
        y = self.y_for(SparseSignal(4, ((0b1001, 3),)))
        b = infer_label(rows_of(self.cb, [((1, 2), 0b10), ((3, 4), 0b01)]), y)
        assert b.bitstring() == "1001"

    def test_conflict(self):
        y = self.y_for(SparseSignal(4, ((0b1001, 3),)))
        assert infer_label(rows_of(self.cb, [((1, 2), 0b10), ((2, 3), 0b11)]), y) == Conflict(2)

    def test_partial_handed_to_completion(self):
        # a single entry: every other subset has exactly one nonzero row
        y = self.y_for(SparseSignal(4, ((0b1001, 3),)))
        b = infer_label(rows_of(self.cb, [((1, 2), 0b10)]), y)
        assert b.bitstring() == "1001"


class TestZeroRowCompletion:
    def test_single_consistent_pattern(self):
        cb = Codebook(3, 2, ((1, 2), (2, 3)))
        # entries 101 and 011: on {2,3} the patterns 01 and 11 are nonzero
        y = encode(SparseSignal(3, ((0b101, 4), (0b011, 6))), cb)
        b = zero_row_completion(PartialLabel(3, 0b110, 0b100), y)
        assert b.bitstring() == "101"

    def test_complete_unchanged(self):
        cb = complete_codebook(3, 1)
        y = encode(SparseSignal(3, ((1, 1),)), cb)
        b = PartialLabel(3, 0b111, 0b001)
        assert zero_row_completion(b, y) == b

    def test_ambiguous_no_progress(self):
        cb = Codebook(3, 1, ((1,), (2,), (3,)))
        y = encode(SparseSignal(3, ((0b000, 4), (0b111, 4))), cb)
        b = PartialLabel(3, 0b100, 0b000)
        assert zero_row_completion(b, y) == b


class TestDecode:
    def test_zero(self):
        cb = complete_codebook(4, 2)
        res = decode_ssii(encode(SparseSignal(4, ()), cb))
        assert res.status == SUCCESS and res.recovered.k == 0

    def test_single_entry_4_2(self):
        sig = SparseSignal(4, ((0b1010, 7),))
        res = decode_ssii(encode(sig, complete_codebook(4, 2)))
        assert res.success and res.recovered == sig
        assert res.status_line().startswith("status=success iterations=")

    @pytest.mark.parametrize("n,d", [(6, 3), (8, 3), (7, 4)])
    def test_strong_guarantee_complete(self, n, d):
        cb = complete_codebook(n, d)
        for k in range(1, (1 << (d - 1)) + 1):
            for seed in range(40):
                sig = generate(n, k, seed=1000 * k + seed)
                assert decode_ssii(encode(sig, cb)).recovered == sig

    def test_partial_when_underdetermined(self):
        # width-1 codebook, two entries: value groups never pin all bits
        cb = complete_codebook(6, 1)
        sig = SparseSignal(6, ((0b000111, 5), (0b111000, 9)))
        res = decode_ssii(encode(sig, cb))
        assert res.status in (PARTIAL, SUCCESS)
        if res.success:
            assert np.array_equal(encode_values(res.recovered, cb), encode(sig, cb).values)

    def test_inconsistent_input_not_success(self):
        cb = complete_codebook(4, 2)
        y = encode(SparseSignal(4, ((5, 7),)), cb)
        y.values[0] += 3  # no signal produces this vector
        res = decode_ssii(y)
        assert res.status in (PARTIAL, CONTRADICTION)

    def test_iteration_limit(self):
        cb = complete_codebook(6, 3)
        sig = generate(6, 4, seed=3)
        res = decode_ssii(encode(sig, cb), DecodeLimits(max_iterations=1))
        assert res.status == PARTIAL and "limit" in res.message

    def test_default_limit_formula(self):
        cb = complete_codebook(4, 2)
        y = encode(SparseSignal(4, ((5, 7),)), cb)
        assert DecodeLimits().iterations_for(y) == 4 * 6 + 16
        assert DecodeLimits(k_max=3).iterations_for(y) == 28

    def test_real_mode(self):
        mode = ValueMode("real", 1e-9)
        cb = complete_codebook(8, 3)
        for seed in range(20):
            sig = generate(8, 4, mode, seed=seed)
            res = decode_ssii(encode(sig, cb))
            assert res.success and res.recovered.matches(sig, 1e-9)

    def test_missing_rows(self):
        cb = complete_codebook(8, 4)
        sig = generate(8, 3, seed=11)
        y = encode(sig, cb)
        missing = np.zeros(cb.rows, dtype=bool)
        missing[::17] = True
        y = MeasurementVector(cb, y.values, y.mode, True, missing)
        res = decode_ssii(y)
        if res.success:
            assert y.agrees_with(encode_values(res.recovered, cb))
        assert res.status != CONTRADICTION

    def test_filter_off_still_sound(self):
        cb = complete_codebook(8, 3)
        for seed in range(20):
            sig = generate(8, 4, seed=seed)
            res = decode_ssii(encode(sig, cb), value_filter=False)
            assert res.recovered == sig


@settings(max_examples=60, deadline=None)
@given(st.integers(6, 24), st.integers(2, 5), st.integers(1, 30), st.integers(1, 12), st.integers(0, 2**31))
def test_soundness_random(n, d, m, k, seed):
    d = min(d, n)
    cb = random_codebook(n, d, m, seed=seed)
    sig = generate(n, k, seed=seed ^ 0x5A5A)
    y = encode(sig, cb)
    res = decode_ssii(y)
    if res.success:
        assert np.array_equal(encode_values(res.recovered, cb), y.values)
        if is_distinguishable(sig) and res.recovered != sig:
            # only possible if the codebook cannot tell the two apart
            assert np.array_equal(encode_values(sig, cb), encode_values(res.recovered, cb))


def test_success_rate_grows_with_m():
    rates = []
    for m in (2, 6, 18, 54):
        ok = 0
        for seed in range(60):
            cb = random_codebook(16, 4, m, seed=seed, distinct=True)
            sig = generate(16, 10, seed=10_000 + seed)
            ok += decode_ssii(encode(sig, cb)).recovered == sig
        rates.append(ok / 60)
    assert all(b >= a - 0.1 for a, b in zip(rates, rates[1:]))
    assert rates[-1] > rates[0]
