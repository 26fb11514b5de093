"""Correlation measures on multi-qubit states.

Pairwise measures (concurrence, entanglement of formation, mutual
information, classical correlation, quantum discord) act on two-qubit
reductions; the multipartite measures (one-tangles, tangle with its
mixed-state bounds, monogamy residual) act on the full register.

The discord optimization uses projective measurements only: a coarse grid
over the measurement Bloch sphere followed by Nelder-Mead refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from . import qla
from .model import cavity_label_to_qubit
from .qla import DensityMatrix, Operator, PureState

__all__ = [
    "PairSelector",
    "MeasurementBasis",
    "CorrelationReport",
    "TangleBounds",
    "DeltaResult",
    "concurrence",
    "eof_from_concurrence",
    "mutual_information",
    "classical_correlation",
    "quantum_discord",
    "one_tangle",
    "tangle_pure",
    "tangle_bounds",
    "monogamy_residual",
    "entanglement_sum",
    "delta_fanchini",
    "pair_state",
    "correlation_report",
]

_SYSY = np.kron(qla.SIGMA_Y, qla.SIGMA_Y)
_GRID_POLAR = 64
_GRID_AZIMUTH = 128
_PURITY_GATE = 1e-8
_TANGLE_FLOOR = 1e-9
_DISCORD_FLOOR = -1e-8


@dataclass(frozen=True)
class PairSelector:
    """Two distinct qubit positions of the internal register."""

    first: int
    second: int

    def __post_init__(self):
        if self.first == self.second:
            raise ValueError("pair members must be distinct")
        if self.first < 0 or self.second < 0:
            raise ValueError("pair indices must be nonnegative")

    @classmethod
    def from_label(cls, label: str, sites_per_chain: int = 3) -> "PairSelector":
        """Parse a cavity-pair label like "33'" or "21'".

        The first character group addresses the unprimed chain, a trailing
        prime the second chain; "21'" is chain-1 site 2 with chain-2 site 1.
        """
        label = label.strip()
        # Split into two site tokens, each one digit plus optional prime.
        tokens = []
        i = 0
        while i < len(label):
            j = i + 1
            while j < len(label) and label[j] in ("'", "′"):
                j += 1
            tokens.append(label[i:j])
            i = j
        if len(tokens) != 2:
            raise ValueError(f"malformed pair label {label!r}")
        return cls(
            cavity_label_to_qubit(tokens[0], sites_per_chain),
            cavity_label_to_qubit(tokens[1], sites_per_chain),
        )


@dataclass(frozen=True)
class MeasurementBasis:
    """Projector pair on one qubit, parametrized on the Bloch sphere."""

    polar: float
    azimuth: float

    def __post_init__(self):
        if not 0.0 <= self.polar <= math.pi:
            raise ValueError("polar angle must lie in [0, pi]")
        if not 0.0 <= self.azimuth < 2.0 * math.pi:
            raise ValueError("azimuth must lie in [0, 2*pi)")

    def ket(self) -> np.ndarray:
        return np.array(
            [math.cos(self.polar / 2.0), np.exp(1j * self.azimuth) * math.sin(self.polar / 2.0)]
        )


class TangleBounds(NamedTuple):
    lower_raw: float
    upper_raw: float
    lower: float
    upper: float


class DeltaResult(NamedTuple):
    delta: float
    ssa_slack: float


def _as_density(state: DensityMatrix | PureState) -> DensityMatrix:
    if isinstance(state, PureState):
        return state.density()
    return state


def _require_two_qubits(rho: DensityMatrix):
    if rho.dims != (2, 2):
        raise ValueError(f"expected a two-qubit state, got dims {rho.dims}")


def pair_state(rho: DensityMatrix, pair: PairSelector) -> DensityMatrix:
    """Two-qubit reduction with the pair members in the requested order."""
    if max(pair.first, pair.second) >= len(rho.dims):
        raise ValueError(f"pair {pair} out of range for dims {rho.dims}")
    reduced = qla.partial_trace(rho, [pair.first, pair.second])
    if pair.first < pair.second:
        return reduced
    m = reduced.matrix.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
    return DensityMatrix(Operator(m, (2, 2)), tolerance=reduced.tolerance)


def concurrence(rho_ab: DensityMatrix) -> float:
    """Two-qubit concurrence from the spin-flipped state.

    The decreasing square roots of the eigenvalues of rho * rho_tilde are
    evaluated as singular values of sqrt(rho) (sy x sy) conj(sqrt(rho)),
    which keeps the near-zero roots accurate to machine precision instead
    of the sqrt(eps) floor of the plain eigenvalue route.
    """
    _require_two_qubits(rho_ab)
    m = rho_ab.matrix
    w, v = np.linalg.eigh((m + m.conj().T) / 2.0)
    if float(w.min()) < -1e-8:
        raise ValueError(f"state spectrum too negative: {w.min():.3e}")
    sqrt_m = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    alphas = np.linalg.svd(sqrt_m @ _SYSY.real @ sqrt_m.conj(), compute_uv=False)
    alphas = np.sort(alphas)[::-1]
    return float(max(0.0, alphas[0] - alphas[1] - alphas[2] - alphas[3]))


def _binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x))


def eof_from_concurrence(c: float) -> float:
    """Entanglement of formation as a function of concurrence."""
    if not -1e-12 <= c <= 1.0 + 1e-12:
        raise ValueError(f"concurrence {c} outside [0, 1]")
    c = min(max(c, 0.0), 1.0)
    return _binary_entropy((1.0 + math.sqrt(1.0 - c * c)) / 2.0)


def mutual_information(rho_ab: DensityMatrix) -> float:
    """S(A) + S(B) - S(AB) in bits for a bipartite state."""
    if len(rho_ab.dims) != 2:
        raise ValueError("mutual information needs a bipartite split")
    s_a = qla.von_neumann_entropy(qla.partial_trace(rho_ab, [0]))
    s_b = qla.von_neumann_entropy(qla.partial_trace(rho_ab, [1]))
    s_ab = qla.von_neumann_entropy(rho_ab)
    return s_a + s_b - s_ab


def _swap_pair(rho_ab: DensityMatrix) -> DensityMatrix:
    m = rho_ab.matrix.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
    return DensityMatrix(Operator(m, (2, 2)), tolerance=rho_ab.tolerance)


def _conditional_entropy_batch(r: np.ndarray, kets: np.ndarray) -> np.ndarray:
    """Average post-measurement entropy of qubit A for a batch of B-kets.

    ``r`` is the (2,2,2,2) state tensor, ``kets`` an (n, 2) array of
    measurement directions; the complementary outcome is included.
    """
    total = np.zeros(len(kets))
    orth = np.stack([-kets[:, 1].conj(), kets[:, 0].conj()], axis=1)
    for v in (kets, orth):
        m = np.einsum("kb,abcd,kd->kac", v.conj(), r, v)
        p = np.real(m[:, 0, 0] + m[:, 1, 1])
        det = np.real(m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0])
        disc = np.sqrt(np.clip(p * p - 4.0 * det, 0.0, None))
        lam_hi = np.clip((p + disc) / 2.0, 0.0, None)
        lam_lo = np.clip((p - disc) / 2.0, 0.0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            for lam in (lam_hi, lam_lo):
                q = np.where(p > 1e-15, lam / np.where(p > 1e-15, p, 1.0), 0.0)
                term = np.where(q > 1e-15, -q * np.log2(np.where(q > 1e-15, q, 1.0)), 0.0)
                total += p * term
    return total


def _minimize_conditional_entropy(rho_ab: DensityMatrix) -> tuple[float, MeasurementBasis]:
    """Grid scan plus simplex refinement over projective B measurements."""
    r = rho_ab.matrix.reshape(2, 2, 2, 2)
    polar = np.linspace(0.0, math.pi, _GRID_POLAR)
    azimuth = np.arange(_GRID_AZIMUTH) * (2.0 * math.pi / _GRID_AZIMUTH)
    tt, pp = np.meshgrid(polar, azimuth, indexing="ij")
    kets = np.stack(
        [np.cos(tt / 2.0).ravel() + 0j, np.exp(1j * pp.ravel()) * np.sin(tt.ravel() / 2.0)],
        axis=1,
    )
    values = _conditional_entropy_batch(r, kets)
    best = int(np.argmin(values))
    x0 = np.array([tt.ravel()[best], pp.ravel()[best]])

    def objective(x: np.ndarray) -> float:
        v = np.array(
            [[math.cos(x[0] / 2.0), np.exp(1j * x[1]) * math.sin(x[0] / 2.0)]], dtype=complex
        )
        return float(_conditional_entropy_batch(r, v)[0])

    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={"xatol": 1e-6, "fatol": 1e-10, "maxiter": 400},
    )
    value = min(float(values[best]), float(res.fun))
    x = res.x if res.fun <= values[best] else x0
    polar_opt = float(np.mod(x[0], 2.0 * math.pi))
    azimuth_opt = float(np.mod(x[1], 2.0 * math.pi))
    if polar_opt > math.pi:
        polar_opt = 2.0 * math.pi - polar_opt
        azimuth_opt = float(np.mod(azimuth_opt + math.pi, 2.0 * math.pi))
    return value, MeasurementBasis(polar_opt, azimuth_opt)


def classical_correlation(
    rho_ab: DensityMatrix, measured: str = "B"
) -> tuple[float, MeasurementBasis]:
    """Maximal classical correlation under projective measurement of one side.

    Measures the side named by ``measured`` ("A" or "B"); the value is the
    entropy of the other side minus the optimized conditional entropy.
    """
    _require_two_qubits(rho_ab)
    if measured not in ("A", "B"):
        raise ValueError("measured side must be 'A' or 'B'")
    work = rho_ab if measured == "B" else _swap_pair(rho_ab)
    s_unmeasured = qla.von_neumann_entropy(qla.partial_trace(work, [0]))
    cond, basis = _minimize_conditional_entropy(work)
    return s_unmeasured - cond, basis


def quantum_discord(rho_ab: DensityMatrix, measured: str = "B") -> float:
    """Mutual information minus classical correlation."""
    cc, _ = classical_correlation(rho_ab, measured)
    q = mutual_information(rho_ab) - cc
    if q < _DISCORD_FLOOR:
        raise RuntimeError(f"discord optimizer failure: Q = {q:.3e} < {_DISCORD_FLOOR}")
    return max(q, 0.0)


def one_tangle(rho: DensityMatrix, site: int, mode: str = "det") -> float:
    """Squared correlation of one qubit with everything else.

    ``mode="det"`` evaluates 4*det of the one-qubit reduction,
    ``mode="purity"`` evaluates 2*(1 - Tr[rho_site^2]); the two coincide for
    qubits.  For mixed full states the value is only an upper-bound proxy.
    """
    if not 0 <= site < len(rho.dims):
        raise ValueError(f"site {site} out of range")
    r = qla.partial_trace(rho, [site]).matrix
    if mode == "det":
        det = np.real(r[0, 0] * r[1, 1] - r[0, 1] * r[1, 0])
        return float(4.0 * det)
    if mode == "purity":
        return float(2.0 * (1.0 - np.vdot(r, r).real))
    raise ValueError(f"unknown mode {mode!r}")


def _pairwise_csq(rho: DensityMatrix, ref_site: int, partners) -> float:
    total = 0.0
    for partner in partners:
        c = concurrence(pair_state(rho, PairSelector(ref_site, partner)))
        total += c * c
    return total


def _require_pure(rho: DensityMatrix, what: str) -> DensityMatrix:
    if qla.purity(rho) < 1.0 - _PURITY_GATE:
        raise ValueError(f"{what} requires a pure state, purity = {qla.purity(rho):.6g}")
    return rho


def tangle_pure(state: PureState | DensityMatrix, ref_site: int) -> float:
    """Residual multipartite correlation of a pure state.

    One-tangle of the reference site minus all squared pairwise
    concurrences with its partners; clipped to zero within 1e-9.
    """
    rho = _require_pure(_as_density(state), "tangle")
    partners = [k for k in range(len(rho.dims)) if k != ref_site]
    raw = one_tangle(rho, ref_site, "det") - _pairwise_csq(rho, ref_site, partners)
    if raw < -_TANGLE_FLOOR:
        raise ValueError(f"monogamy violated by {raw:.3e}; inconsistent state")
    return max(raw, 0.0)


def tangle_bounds(rho: DensityMatrix, ref_site: int) -> TangleBounds:
    """Mixed-state bracket for the tangle.

    The upper bound replaces the convex-roof one-tangle with
    2*(1 - Tr[rho_i^2]) of a pure state; the lower uses
    2*(Tr[rho^2] - Tr[rho_i^2]).  Both subtract the same pairwise sum.
    Raw values are kept alongside clamped-at-zero variants.
    """
    partners = [k for k in range(len(rho.dims)) if k != ref_site]
    pairwise = _pairwise_csq(rho, ref_site, partners)
    site_purity = qla.purity(qla.partial_trace(rho, [ref_site]))
    upper_csq = 2.0 * (1.0 - site_purity)
    # Round-off can push Tr[rho^2] a hair past one; the lower bound must
    # never exceed the upper.
    lower_csq = 2.0 * (min(qla.purity(rho), 1.0) - site_purity)
    upper_raw = upper_csq - pairwise
    lower_raw = lower_csq - pairwise
    return TangleBounds(lower_raw, upper_raw, max(lower_raw, 0.0), max(upper_raw, 0.0))


def monogamy_residual(state: PureState | DensityMatrix, ref_site: int) -> float:
    """Slack of the squared-concurrence sharing inequality; must be >= 0."""
    rho = _require_pure(_as_density(state), "monogamy residual")
    partners = [k for k in range(len(rho.dims)) if k != ref_site]
    residual = one_tangle(rho, ref_site, "det") - _pairwise_csq(rho, ref_site, partners)
    if residual < -_TANGLE_FLOOR:
        raise ValueError(f"monogamy inequality violated by {residual:.3e}")
    return residual


def entanglement_sum(state: PureState | DensityMatrix) -> float:
    """Sum of squared pairwise concurrences from the first cavity."""
    rho = _require_pure(_as_density(state), "entanglement sum")
    partners = range(1, len(rho.dims))
    return _pairwise_csq(rho, 0, partners)


def delta_fanchini(rho_123: DensityMatrix, measured: str = "partner") -> DeltaResult:
    """Entanglement-vs-discord balance of a three-qubit state.

    delta = E(0,1) + E(0,2) - Q(0,1) - Q(0,2), with each discord measured on
    the partner qubit by default; that orientation makes delta vanish on
    tripartite pure states.  Also returns the slack of the strengthened
    strong-subadditivity inequality S_2 + S_3 + delta <= S_12 + S_13.
    """
    if rho_123.dims != (2, 2, 2):
        raise ValueError(f"expected a three-qubit state, got dims {rho_123.dims}")
    if measured not in ("partner", "reference"):
        raise ValueError("measured must be 'partner' or 'reference'")
    side = "B" if measured == "partner" else "A"
    delta = 0.0
    for partner in (1, 2):
        pair = pair_state(rho_123, PairSelector(0, partner))
        delta += eof_from_concurrence(concurrence(pair))
        delta -= quantum_discord(pair, measured=side)
    s_2 = qla.von_neumann_entropy(qla.partial_trace(rho_123, [1]))
    s_3 = qla.von_neumann_entropy(qla.partial_trace(rho_123, [2]))
    s_12 = qla.von_neumann_entropy(qla.partial_trace(rho_123, [0, 1]))
    s_13 = qla.von_neumann_entropy(qla.partial_trace(rho_123, [0, 2]))
    return DeltaResult(delta, s_12 + s_13 - s_2 - s_3 - delta)


@dataclass(frozen=True)
class CorrelationReport:
    """All requested measures evaluated on one state."""

    pairs: tuple[str, ...]
    concurrence: dict[str, float]
    eof: dict[str, float]
    mutual_info: dict[str, float]
    classical_corr: dict[str, float]
    discord: dict[str, float]
    one_tangles: tuple[float, ...]
    tangle: float | None
    tangle_bounds: TangleBounds
    monogamy_residual: float | None
    delta: float | None

    def __post_init__(self):
        for label in self.pairs:
            gap = self.discord[label] - (self.mutual_info[label] - self.classical_corr[label])
            if abs(gap) > 1e-9:
                raise ValueError("discord must equal mutual information minus classical correlation")


def correlation_report(
    rho: DensityMatrix,
    pairs,
    ref_site: int = 0,
    measured: str = "B",
    include_delta: bool | None = None,
) -> CorrelationReport:
    """Evaluate the full measure set on one state.

    ``pairs`` may hold labels like "33'" or :class:`PairSelector` objects.
    The tangle is reported only when the state is pure; the bounds always.
    """
    selectors: dict[str, PairSelector] = {}
    n_chain = len(rho.dims) // 2 if len(rho.dims) % 2 == 0 else len(rho.dims)
    for p in pairs:
        if isinstance(p, PairSelector):
            selectors[f"{p.first},{p.second}"] = p
        else:
            selectors[str(p)] = PairSelector.from_label(str(p), n_chain)
    conc, eof, mi, cc, disc = {}, {}, {}, {}, {}
    for label, sel in selectors.items():
        sub = pair_state(rho, sel)
        conc[label] = concurrence(sub)
        eof[label] = eof_from_concurrence(conc[label])
        mi[label] = mutual_information(sub)
        cc[label], _ = classical_correlation(sub, measured)
        disc[label] = mi[label] - cc[label]
    tangles = tuple(one_tangle(rho, s, "det") for s in range(len(rho.dims)))
    pure = qla.purity(rho) >= 1.0 - _PURITY_GATE
    tangle = tangle_pure(rho, ref_site) if pure else None
    residual = monogamy_residual(rho, ref_site) if pure else None
    if include_delta is None:
        include_delta = rho.dims == (2, 2, 2)
    delta = delta_fanchini(rho).delta if include_delta else None
    return CorrelationReport(
        pairs=tuple(selectors),
        concurrence=conc,
        eof=eof,
        mutual_info=mi,
        classical_corr=cc,
        discord=disc,
        one_tangles=tangles,
        tangle=tangle,
        tangle_bounds=tangle_bounds(rho, ref_site),
        monogamy_residual=residual,
        delta=delta,
    )
