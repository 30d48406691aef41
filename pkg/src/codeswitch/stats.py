"""Certification statistics for the prepared magic state.

Single-copy tomography gives the Bloch vector v = (<X>, <Y>, <Z>) of the
logical state; the two-copy experiment estimates the singlet overlap
epsilon. For identical copies the fidelity with the target is bounded below by
``1 - (epsilon + |v - u|^2 / 4)`` with u the target Bloch vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

# 1-sigma upper limit of a binomial rate with zero events, in units of 1/N
ZERO_EVENT_UPPER = 1.147

T_TARGET = np.array([1 / math.sqrt(2), 1 / math.sqrt(2), 0.0])

_SINGLET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
_PAULIS = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


class StatsError(ValueError):
    pass


def mean_with_sem(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and standard error sqrt(s^2 / N) with the N-1 sample variance.

    A single value has no measurable spread; its standard error is reported as 0.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise StatsError("mean of an empty sample")
    mean = float(x.mean())
    if x.size == 1:
        return mean, 0.0
    return mean, float(math.sqrt(x.var(ddof=1) / x.size))


def mean_with_sem_counts(n_plus: int, n_minus: int) -> tuple[float, float]:
    """Same as ``mean_with_sem`` for a +-1 sample given by its counts."""
    n = n_plus + n_minus
    if n <= 0 or n_plus < 0 or n_minus < 0:
        raise StatsError("counts must be non-negative with a positive total")
    mean = (n_plus - n_minus) / n
    if n == 1:
        return mean, 0.0
    var = n * (1 - mean * mean) / (n - 1)
    return mean, math.sqrt(max(var, 0.0) / n)


@dataclass(frozen=True)
class EpsilonEstimate:
    n_post: int
    n_singlet: int
    p_f: float
    sem: float

    @property
    def zero_event(self) -> bool:
        return self.n_singlet == 0


def epsilon_estimate(n_post: int, n_singlet: int) -> EpsilonEstimate:
    """Singlet fraction with a binomial error bar.

    With no singlet events the rate is set to the midpoint of the 1-sigma
    interval [0, 1.147 / N): p_f = sem = 1.147 / (2 N).
    """
    if n_post < 1 or not 0 <= n_singlet <= n_post:
        raise StatsError(f"need 0 <= n_singlet <= n_post and n_post >= 1, got ({n_post}, {n_singlet})")
    if n_singlet == 0:
        p = ZERO_EVENT_UPPER / (2 * n_post)
        return EpsilonEstimate(n_post, 0, p, p)
    p = n_singlet / n_post
    return EpsilonEstimate(n_post, n_singlet, p, math.sqrt(p * (1 - p) / n_post))


@dataclass(frozen=True)
class BlochVectors:
    v: np.ndarray
    sem: np.ndarray = field(default_factory=lambda: np.zeros(3))
    u: np.ndarray = field(default_factory=lambda: T_TARGET.copy())

    def __post_init__(self):
        for name in ("v", "sem", "u"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (3,):
                raise StatsError(f"{name} must have three components")
            object.__setattr__(self, name, arr)
        if abs(np.linalg.norm(self.u) - 1) > 1e-12:
            raise StatsError("target Bloch vector must have unit length")

    @property
    def delta(self) -> np.ndarray:
        return self.v - self.u


def fidelity_direct(v: BlochVectors | Sequence[float]) -> float:
    """1/2 + (v_X + v_Y) / (2 sqrt 2) for the T target; not clamped to [0, 1]."""
    vec = v.v if isinstance(v, BlochVectors) else np.asarray(v, dtype=float)
    return float(0.5 + (vec[0] + vec[1]) / (2 * math.sqrt(2)))


@dataclass(frozen=True)
class FidelityBound:
    bound: float
    sem: float
    delta_term: float
    delta_term_sem: float
    epsilon: EpsilonEstimate
    mode: str = "EC"
    acceptance_rates: Mapping[str, float] = field(default_factory=dict)

    @property
    def infidelity(self) -> float:
        return 1.0 - self.bound


def fidelity_lower_bound(v: BlochVectors, eps: EpsilonEstimate, mode: str = "EC",
                         acceptance_rates: Mapping[str, float] | None = None) -> FidelityBound:
    """1 - (p_f + |delta|^2 / 4) with first-order uncorrelated error propagation."""
    d = v.delta
    delta_term = float(np.dot(d, d) / 4)
    parts = d * v.sem / 2
    delta_sem = float(math.sqrt(np.dot(parts, parts)))
    sem = math.sqrt(eps.sem ** 2 + delta_sem ** 2)
    return FidelityBound(1.0 - (eps.p_f + delta_term), sem, delta_term, delta_sem, eps, mode,
                         dict(acceptance_rates or {}))


def distillation_projection(p: float) -> float:
    """Output infidelity ~35 p^3 of one round of 15-to-1 distillation."""
    if not 0.0 <= p <= 1.0:
        raise StatsError(f"infidelity {p} outside [0, 1]")
    return 35.0 * p ** 3


# --- two-copy purity bound oracle -----------------------------------------

@dataclass
class OracleReport:
    epsilon: np.ndarray
    purity: np.ndarray  # (..., 2)
    fidelity: np.ndarray  # (..., 2)
    identity_residual: float
    purity_margin: float
    bound_margin: float
    tolerance: float

    @property
    def identity_ok(self) -> bool:
        return self.identity_residual <= self.tolerance

    @property
    def purity_ok(self) -> bool:
        return self.purity_margin >= -self.tolerance

    @property
    def bound_ok(self) -> bool:
        return self.bound_margin >= -self.tolerance

    @property
    def ok(self) -> bool:
        return self.identity_ok and self.purity_ok and self.bound_ok


def _check_density(rho: np.ndarray, name: str, tol: float = 1e-10) -> None:
    if rho.shape[-2:] != (2, 2):
        raise StatsError(f"{name} must be 2x2")
    tr = np.trace(rho, axis1=-2, axis2=-1)
    if np.any(np.abs(tr - 1) > tol):
        raise StatsError(f"{name} does not have unit trace")
    if np.any(np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))) > tol):
        raise StatsError(f"{name} is not Hermitian")
    if np.any(np.linalg.eigvalsh(rho) < -tol):
        raise StatsError(f"{name} is not positive semidefinite")


def _bloch(rho: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("kij,...ji->...k", _PAULIS, rho))


def singlet_overlap(rho1: np.ndarray, rho2: np.ndarray) -> np.ndarray:
    """<psi-| rho1 (x) rho2 |psi-> evaluated on the 4x4 product."""
    joint = np.einsum("...ij,...kl->...ikjl", rho1, rho2)
    joint = joint.reshape(joint.shape[:-4] + (4, 4))
    return np.real(np.einsum("i,...ij,j->...", _SINGLET.conj(), joint, _SINGLET))


def purity_bound_oracle_check(rho1, rho2, sigma_t, tolerance: float = 1e-12) -> OracleReport:
    """Check the two-copy relations on explicit density operators.

    (i)   Tr(rho^2) = 1 + |delta|^2 / 2 + 2 (F - 1) for each copy,
    (ii)  max_i Tr(rho_i^2) >= 1 - 2 epsilon,
    (iii) F(rho_i, sigma) >= 1 - (epsilon_ii + |delta_i|^2 / 4), with epsilon_ii
          the singlet overlap of two identical copies of rho_i.

    Inputs may carry leading batch dimensions; ``sigma_t`` must be pure.
    """
    r1 = np.asarray(rho1, dtype=complex)
    r2 = np.asarray(rho2, dtype=complex)
    sig = np.asarray(sigma_t, dtype=complex)
    _check_density(r1, "rho1")
    _check_density(r2, "rho2")
    _check_density(sig, "sigma_t")
    if np.any(np.abs(np.real(np.einsum("...ij,...ji->...", sig, sig)) - 1) > 1e-10):
        raise StatsError("sigma_t must be a pure state")

    u = _bloch(sig)
    eps = singlet_overlap(r1, r2)
    rhos = np.stack(np.broadcast_arrays(r1, r2), axis=-3)  # (..., 2, 2, 2)
    purity = np.real(np.einsum("...ij,...ji->...", rhos, rhos))
    fid = np.real(np.einsum("...ij,...ji->...", rhos, sig[..., None, :, :]))
    delta = _bloch(rhos) - u[..., None, :]
    d2 = np.sum(delta * delta, axis=-1)

    identity = purity - (1 + d2 / 2 + 2 * (fid - 1))
    margin_ii = purity.max(axis=-1) - (1 - 2 * eps)
    eps_self = np.stack([singlet_overlap(r1, r1), singlet_overlap(r2, r2)], axis=-1)
    margin_iii = fid - (1 - (eps_self + d2 / 4))
    return OracleReport(
        epsilon=eps,
        purity=purity,
        fidelity=fid,
        identity_residual=float(np.max(np.abs(identity))),
        purity_margin=float(np.min(margin_ii)),
        bound_margin=float(np.min(margin_iii)),
        tolerance=tolerance,
    )


def random_density_operators(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` random qubit states: Bloch vectors uniform in direction, radius^(1/3) uniform."""
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = rng.random(n) ** (1 / 3)
    v = d * r[:, None]
    return 0.5 * (np.eye(2) + np.einsum("nk,kij->nij", v, _PAULIS))


def random_pure_state(rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


# --- summary ---------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentCounts:
    """Accepted-shot statistics of one experiment."""

    n_shots: int
    n_plus: int = 0
    n_minus: int = 0
    n_singlet: int = 0
    n_post_override: int | None = None

    @property
    def n_post(self) -> int:
        return self.n_post_override if self.n_post_override is not None else self.n_plus + self.n_minus

    @property
    def acceptance_rate(self) -> float:
        return self.n_post / self.n_shots

    @classmethod
    def from_values(cls, values, n_shots: int) -> ExperimentCounts:
        v = np.asarray(values)
        return cls(n_shots, int(np.sum(v == 1)), int(np.sum(v == -1)))

    @classmethod
    def from_mean(cls, n_post: int, mean: float, n_shots: int) -> ExperimentCounts:
        """Counts reproducing a rounded mean: n_plus = round(N (1 + m) / 2)."""
        n_plus = int(round(n_post * (1 + mean) / 2))
        return cls(n_shots, n_plus, n_post - n_plus)

    @classmethod
    def two_copy(cls, n_post: int, n_singlet: int, n_shots: int) -> ExperimentCounts:
        return cls(n_shots, n_singlet=n_singlet, n_post_override=n_post)


def counts_from_decoded(decoded) -> ExperimentCounts:
    """Build counts from a decoder ``DecodedSet``."""
    if decoded.experiment == "two-copy":
        return ExperimentCounts.two_copy(decoded.n_post, decoded.n_singlet, decoded.n_shots)
    return ExperimentCounts.from_values(decoded.values(), decoded.n_shots)


@dataclass(frozen=True)
class ReportRow:
    quantity: str
    value: float
    sem: float
    acceptance_rate: float | None


@dataclass(frozen=True)
class CertificationReport:
    mode: str
    bloch: BlochVectors
    epsilon: EpsilonEstimate
    bound: FidelityBound
    acceptance: Mapping[str, float]
    direct_fidelity: float

    @property
    def single_copy_acceptance(self) -> float:
        return float(np.mean([self.acceptance[b] for b in "XYZ"]))

    def rows(self) -> list[ReportRow]:
        acc = self.acceptance
        return [
            ReportRow("F_bound", self.bound.bound, self.bound.sem, self.single_copy_acceptance),
            ReportRow("epsilon", self.epsilon.p_f, self.epsilon.sem, acc["two-copy"]),
            ReportRow("X", float(self.bloch.v[0]), float(self.bloch.sem[0]), acc["X"]),
            ReportRow("Y", float(self.bloch.v[1]), float(self.bloch.sem[1]), acc["Y"]),
            ReportRow("Z", float(self.bloch.v[2]), float(self.bloch.sem[2]), acc["Z"]),
            ReportRow("delta_term", self.bound.delta_term, self.bound.delta_term_sem, None),
            ReportRow("F_direct", self.direct_fidelity, float("nan"), None),
        ]


def summarize(single: Mapping[str, ExperimentCounts], two_copy: ExperimentCounts,
              mode: str = "EC") -> CertificationReport:
    """Fidelity bound, epsilon and Bloch components with their acceptance rates.

    ``single`` maps "X", "Y", "Z" to per-basis counts; decoder sets are accepted
    as well and converted with ``counts_from_decoded``.
    """
    conv = {}
    for b in "XYZ":
        if b not in single:
            raise StatsError(f"missing single-copy basis {b}")
        c = single[b]
        conv[b] = c if isinstance(c, ExperimentCounts) else counts_from_decoded(c)
    if two_copy is None:
        raise StatsError("missing two-copy experiment")
    tc = two_copy if isinstance(two_copy, ExperimentCounts) else counts_from_decoded(two_copy)

    means, sems = [], []
    for b in "XYZ":
        if conv[b].n_post < 1:
            raise StatsError(f"basis {b} has no accepted shots")
        m, s = mean_with_sem_counts(conv[b].n_plus, conv[b].n_minus)
        means.append(m)
        sems.append(s)
    bloch = BlochVectors(np.array(means), np.array(sems))
    eps = epsilon_estimate(tc.n_post, tc.n_singlet)
    acceptance = {b: conv[b].acceptance_rate for b in "XYZ"}
    acceptance["two-copy"] = tc.acceptance_rate
    bound = fidelity_lower_bound(bloch, eps, mode, acceptance)
    return CertificationReport(mode, bloch, eps, bound, acceptance, fidelity_direct(bloch))


def truncate(x: float, decimals: int) -> float:
    """Drop digits beyond ``decimals`` (towards zero)."""
    f = 10.0 ** decimals
    return math.trunc(x * f + math.copysign(1e-9, x)) / f


def paren_format(value: float, sem: float, decimals: int) -> str:
    """``0.99949(27)`` style: value rounded, error digits in units of the last place."""
    err = int(round(sem * 10 ** decimals))
    return f"{value:.{decimals}f}({err})"


def matches_printed(value: float, printed: float, decimals: int) -> bool:
    """True when ``value`` rounds or truncates to ``printed`` at ``decimals`` places."""
    return (round(value, decimals) == round(printed, decimals)
            or truncate(value, decimals) == round(printed, decimals))
