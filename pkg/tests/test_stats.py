import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import golden
from codeswitch.decoder import DecodedSet, DecodedShot, Mode, RejectReason
from codeswitch.stats import (
    T_TARGET,
    BlochVectors,
    ExperimentCounts,
    StatsError,
    counts_from_decoded,
    distillation_projection,
    epsilon_estimate,
    fidelity_direct,
    fidelity_lower_bound,
    matches_printed,
    mean_with_sem,
    mean_with_sem_counts,
    paren_format,
    purity_bound_oracle_check,
    random_density_operators,
    random_pure_state,
    singlet_overlap,
    summarize,
    truncate,
)


# --- mean and sem ------------------------------------------------------------

def test_mean_with_sem_table_row():  # [PAPER] 0.6993(78) from 8356 values
    m, s = mean_with_sem_counts(7100, 1256)
    assert matches_printed(m, 0.6993, 4)
    assert round(s, 4) == 0.0078
    values = np.array([1] * 7100 + [-1] * 1256)
    assert mean_with_sem(values) == pytest.approx((m, s), rel=1e-12)


def test_mean_with_sem_examples():
    assert mean_with_sem([1] * 10) == (1.0, 0.0)  # [TRIVIAL]
    m, s = mean_with_sem([1, -1, 1, -1])  # [DERIVED] sample variance 4/3
    assert m == 0 and s == pytest.approx(math.sqrt(4 / 3 / 4), abs=1e-12)
    assert round(s, 3) == 0.577
    with pytest.raises(StatsError):
        mean_with_sem([])
    assert mean_with_sem([-1]) == (-1.0, 0.0)


@given(st.lists(st.sampled_from([1, -1]), min_size=1, max_size=300))
def test_mean_sem_bounds(values):
    m, s = mean_with_sem(values)
    n = len(values)
    assert abs(m) <= 1
    # with the N-1 variance the tight bound is 1/sqrt(N-1)
    assert s <= (1 / math.sqrt(n - 1) if n > 1 else 0) + 1e-12
    assert (m, s) == pytest.approx(mean_with_sem_counts(values.count(1), values.count(-1)), abs=1e-12)


# --- epsilon -------------------------------------------------------------------

def test_epsilon_examples():
    e = epsilon_estimate(6573, 3)  # [PAPER]
    assert round(e.p_f, 6) == 4.56e-4 and round(e.sem, 6) == 2.63e-4
    e = epsilon_estimate(6182, 0)  # [PAPER] zero-event rule
    assert e.zero_event and round(e.p_f, 7) == 9.28e-5 and e.sem == e.p_f
    e = epsilon_estimate(100, 100)  # [TRIVIAL]
    assert e.p_f == 1 and e.sem == 0
    for bad in [(0, 0), (5, 6), (5, -1)]:
        with pytest.raises(StatsError):
            epsilon_estimate(*bad)


# --- fidelity formulas --------------------------------------------------------------

def test_fidelity_direct_examples():
    assert fidelity_direct(T_TARGET) == pytest.approx(1)  # [TRIVIAL]
    assert fidelity_direct([0, 0, 0]) == 0.5  # [TRIVIAL]
    assert round(fidelity_direct([0.6993, 0.7193, 0.0]), 4) == 1.0016  # [DERIVED] exceeds 1


def test_bound_examples():
    b = fidelity_lower_bound(BlochVectors([0.6993, 0.7193, 0.0], [0.0078, 0.0077, 0.0109]),
                             epsilon_estimate(6573, 3))  # [PAPER]
    assert round(b.bound, 5) == 0.99949 and round(b.sem, 5) == 0.00027
    assert round(b.delta_term, 7) == 5.24e-5
    b = fidelity_lower_bound(BlochVectors([0.6987, 0.7197, -0.0007], [0.0078, 0.0077, 0.0110]),
                             epsilon_estimate(6182, 0), "PS")  # [PAPER]
    # printed (rounded) Bloch inputs; the count-level check is in the summary test
    assert round(b.bound, 5) == 0.99985 and round(b.sem, 5) == 0.00011
    e0 = epsilon_estimate(10, 1)
    exact = fidelity_lower_bound(BlochVectors(T_TARGET, [0.01, 0.01, 0.01]),
                                 type(e0)(10, 1, 0.0, 0.0))  # [TRIVIAL] v = u, eps = 0
    assert exact.bound == 1 and exact.sem == 0


@given(st.floats(0, 0.5), st.floats(0, 0.5), st.lists(st.floats(-0.5, 0.5), min_size=3, max_size=3),
       st.integers(0, 2), st.floats(0, 0.3))
def test_bound_monotone(p1, p2, delta, axis, grow):
    def bound(p, d):
        v = BlochVectors(T_TARGET + np.asarray(d), np.full(3, 0.01))
        return fidelity_lower_bound(v, type(epsilon_estimate(1, 0))(100, 1, p, 0.01)).bound
    lo, hi = sorted((p1, p2))
    assert bound(hi, delta) <= bound(lo, delta)
    d2 = list(delta)
    d2[axis] = math.copysign(abs(d2[axis]) + grow, d2[axis] or 1.0)
    assert bound(lo, d2) <= bound(lo, delta) + 1e-15
    assert bound(lo, delta) <= 1


def test_bloch_vectors_validation():
    with pytest.raises(StatsError):
        BlochVectors([1, 0])
    with pytest.raises(StatsError):
        BlochVectors([0, 0, 0], u=[1, 1, 0])
    np.testing.assert_allclose(BlochVectors([1, 0, 0]).delta, [1 - T_TARGET[0], -T_TARGET[1], 0])


def test_distillation_projection():
    assert round(distillation_projection(5.1e-4), 10) == 4.6e-9  # [PAPER]
    assert distillation_projection(0) == 0  # [TRIVIAL]
    assert distillation_projection(0.1) == pytest.approx(3.5e-2)  # [DERIVED]
    with pytest.raises(StatsError):
        distillation_projection(1.5)


# --- two-copy oracle --------------------------------------------------------------

def _pure(v):
    return np.outer(v, v.conj())


def test_oracle_pure_target_is_tight():  # [TRIVIAL]
    t = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
    rho = _pure(t)
    rep = purity_bound_oracle_check(rho, rho, rho)
    assert rep.ok
    assert rep.epsilon == pytest.approx(0, abs=1e-15)
    assert rep.fidelity[0] == pytest.approx(1)


def test_oracle_maximally_mixed():  # [DERIVED] closed-form singlet overlap 1/4
    rng = np.random.default_rng(4)
    mixed = np.eye(2) / 2
    sigma = random_pure_state(rng)
    rep = purity_bound_oracle_check(mixed, mixed, sigma)
    assert rep.ok
    assert rep.epsilon == pytest.approx(0.25)
    assert rep.purity[0] == pytest.approx(0.5)
    assert rep.fidelity[0] == pytest.approx(0.5)
    # with |delta| = 1 the bound is 1 - (1/4 + 1/4) = 1/2, tight
    assert 1 - (0.25 + 1 / 4) <= 0.5 + 1e-12


def test_singlet_overlap_of_orthogonal_pure_states():
    up, down = np.diag([1.0, 0]), np.diag([0, 1.0])
    assert singlet_overlap(up, down) == pytest.approx(0.5)
    assert singlet_overlap(up, up) == pytest.approx(0)


def test_oracle_random_batch():  # [DERIVED] randomized sweep (full size in the acceptance suite)
    rng = np.random.default_rng(8)
    n = 2000
    r1, r2 = random_density_operators(rng, n), random_density_operators(rng, n)
    sig = np.array([random_pure_state(rng) for _ in range(n)])
    rep = purity_bound_oracle_check(r1, r2, sig)
    assert rep.ok, (rep.identity_residual, rep.purity_margin, rep.bound_margin)


def test_oracle_rejects_invalid_density():
    with pytest.raises(StatsError):
        purity_bound_oracle_check(np.eye(2), np.eye(2) / 2, np.diag([1.0, 0]))
    with pytest.raises(StatsError):
        purity_bound_oracle_check(np.diag([1.5, -0.5]), np.eye(2) / 2, np.diag([1.0, 0]))
    with pytest.raises(StatsError):
        purity_bound_oracle_check(np.eye(2) / 2, np.eye(2) / 2, np.eye(2) / 2)


# --- summary --------------------------------------------------------------------------

@pytest.mark.parametrize("mode", ["EC", "PS"])
def test_summarize_reproduces_reference_table(mode):  # [PAPER]
    single, two = golden.counts(mode)
    rep = summarize(single, two, mode)
    rows = {r.quantity: r for r in rep.rows()}
    want = golden.PRINTED[mode]
    for q in ("F_bound", "epsilon", "X", "Y", "Z", "delta_term"):
        value, sem, dec = want[q]
        assert matches_printed(rows[q].value, value, dec), (q, rows[q].value)
        assert matches_printed(rows[q].sem, sem, dec), (q, rows[q].sem)
    assert truncate(100 * rep.single_copy_acceptance, 2) == want["acceptance"]
    inf, inf_sem, dec = want["infidelity"]
    assert matches_printed(rep.bound.infidelity, inf, dec)
    assert matches_printed(rep.bound.sem, inf_sem, dec)


def test_summarize_acceptance_row_is_mean():  # [PAPER]
    single, two = golden.counts("EC")
    rep = summarize(single, two)
    assert rep.rows()[0].acceptance_rate == pytest.approx(np.mean([83.56, 81.24, 82.96]) / 100)
    assert rep.acceptance["two-copy"] == pytest.approx(0.6573)


def test_summarize_missing_basis():  # [TRIVIAL]
    single, two = golden.counts("EC")
    del single["Y"]
    with pytest.raises(StatsError, match="Y"):
        summarize(single, two)


def test_summarize_noiseless_inputs():  # [TRIVIAL] bound consistent with 1
    rng = np.random.default_rng(1)
    n = 2000
    p = (1 + 1 / math.sqrt(2)) / 2
    single = {b: ExperimentCounts.from_values(np.where(rng.random(n) < q, 1, -1), n)
              for b, q in (("X", p), ("Y", p), ("Z", 0.5))}
    rep = summarize(single, ExperimentCounts.two_copy(n, 0, n))
    assert abs(1 - rep.bound.bound) <= 3 * rep.bound.sem


def _decoded(values, rejected, basis):
    shots = [DecodedShot(True, None, (0,), {basis: v}) for v in values]
    shots += [DecodedShot(False, RejectReason.FLAG)] * rejected
    return shots


@given(st.lists(st.sampled_from([1, -1]), min_size=2, max_size=50), st.integers(0, 10), st.randoms())
def test_summarize_permutation_invariant(values, rejected, rnd):
    sets = {b: DecodedSet(f"single-copy-{b.lower()}", Mode.EC, _decoded(values, rejected, b)) for b in "XYZ"}
    two = DecodedSet("two-copy", Mode.EC, [DecodedShot(True, None, (0, 0), {"X1": -1, "Z2": -1})] +
                     [DecodedShot(True, None, (0, 0), {"X1": 1, "Z2": -1})] * 3)
    a = summarize(sets, two)
    shuffled = {}
    for b, ds in sets.items():
        shots = list(ds.shots)
        rnd.shuffle(shots)
        shuffled[b] = DecodedSet(ds.experiment, ds.mode, shots)
    b_ = summarize(shuffled, two)
    assert a.bound.bound == pytest.approx(b_.bound.bound, abs=1e-15)
    assert counts_from_decoded(two).n_singlet == 1


def test_formatting_helpers():
    assert paren_format(0.999491, 2.693e-4, 5) == "0.99949(27)"
    assert truncate(0.825867, 4) == 0.8258
    assert truncate(-0.00079, 4) == -0.0007
    assert matches_printed(0.0109798, 0.0109, 4)
    assert not matches_printed(0.0111, 0.0109, 4)
