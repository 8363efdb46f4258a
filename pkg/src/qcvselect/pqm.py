"""Probabilistic quantum memory: storage, retrieval and output statistics.

Two interchangeable backends are provided:

* a circuit backend that builds the storage and retrieval circuits on a
  :class:`~qcvselect.statevector.StateVector` and reads the control register
  exactly (small sizes only, used as an oracle), and
* an analytic backend that evaluates the retrieval output law directly as a
  mixture of binomials, in log space, for memories of any size.

For a memory of ``n`` stored patterns of ``k`` bits and ``d`` control qubits,
probing with input ``i`` gives ``y`` ones in the control register with

    P(y = K) = 1/n * sum_j C(d, K) cos^{2(d-K)}(phi_j) sin^{2K}(phi_j),
    phi_j = pi * hamming(i, p_j) / (2k).
"""

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .statevector import DEFAULT_MAX_QUBITS, CapacityError, new_basis_state, parse_bits


class MemoryConsumedError(RuntimeError):
    """A circuit memory was retrieved from twice without re-storing it."""


def hamming(a, b):
    a, b = parse_bits(a), parse_bits(b)
    if len(a) != len(b):
        raise ValueError(f"pattern lengths differ: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(a, b))


def format_bits(bits):
    return "".join(str(b) for b in bits)


@dataclass(frozen=True)
class PqmMemory:
    """Stored patterns with multiplicities.

    ``entries`` holds ``(pattern, multiplicity)`` pairs in first-appearance
    order; ``n`` counts repetitions.
    """

    k: int
    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise ValueError("memory needs at least one pattern")
        for pattern, mult in self.entries:
            if len(pattern) != self.k:
                raise ValueError(f"pattern {format_bits(pattern)} is not {self.k} bits long")
            if mult < 1:
                raise ValueError("multiplicities must be positive")

    @classmethod
    def from_patterns(cls, patterns):
        parsed = [parse_bits(p) for p in patterns]
        if not parsed:
            raise ValueError("memory needs at least one pattern")
        counts = Counter(parsed)
        entries = tuple((p, counts[p]) for p in dict.fromkeys(parsed))
        return cls(len(parsed[0]), entries)

    @property
    def n(self):
        return sum(m for _, m in self.entries)

    def patterns(self):
        """All stored patterns, repetitions expanded."""
        return [p for p, m in self.entries for _ in range(m)]

    def distance_weights(self, probe):
        """Fraction of stored patterns at each Hamming distance 0..k from ``probe``."""
        probe = parse_bits(probe)
        if len(probe) != self.k:
            raise ValueError(f"input has {len(probe)} bits, memory stores {self.k}")
        w = np.zeros(self.k + 1)
        for pattern, mult in self.entries:
            w[hamming(probe, pattern)] += mult
        return w / self.n


@dataclass(frozen=True)
class RetrievalDistribution:
    """``probs[K]`` is the probability of measuring ``K`` ones on ``d`` control qubits."""

    d: int
    probs: np.ndarray

    def __post_init__(self):
        if self.probs.shape != (self.d + 1,):
            raise ValueError("need d + 1 probabilities")

    def expected_ones(self):
        return float(np.dot(np.arange(self.d + 1), self.probs))

    def cumulative(self, K):
        """P(y <= K)."""
        return float(self.probs[: K + 1].sum())


@dataclass(frozen=True)
class RegisterLayout:
    input: range
    utility: range
    memory: range
    control: range = range(0)

    @property
    def num_qubits(self):
        return max(r.stop for r in (self.input, self.utility, self.memory, self.control))


# -- analytic backend --------------------------------------------------------


def binomial_logpmf(d, errors, k):
    """log of Binomial(d, sin^2(pi * e / (2k))) over K = 0..d, for integer ``e``.

    The endpoints e = 0 and e = k are exact point masses.  ``log cos`` is taken
    as ``log sin(pi (k - e) / (2k))`` so the tails stay accurate near e = k.
    """
    e = errors
    out = np.full(d + 1, -np.inf)
    if e == 0:
        out[0] = 0.0
        return out
    if e == k:
        out[d] = 0.0
        return out
    K = np.arange(d + 1)
    log_sin = math.log(math.sin(math.pi * e / (2 * k)))
    log_cos = math.log(math.sin(math.pi * (k - e) / (2 * k)))
    log_choose = gammaln(d + 1) - gammaln(K + 1) - gammaln(d - K + 1)
    return log_choose + 2 * (d - K) * log_cos + 2 * K * log_sin


def retrieve_analytic(memory, probe, d):
    """Closed-form retrieval distribution for ``probe`` against ``memory``."""
    if d < 1:
        raise ValueError("need at least one control qubit")
    weights = memory.distance_weights(probe)
    rows, logw = [], []
    for e, w in enumerate(weights):
        if w > 0:
            rows.append(binomial_logpmf(d, e, memory.k))
            logw.append(math.log(w))
    logp = logsumexp(np.array(rows) + np.array(logw)[:, None], axis=0)
    return RetrievalDistribution(d, np.exp(logp))


def expected_ones(dist):
    return dist.expected_ones()


def expected_ones_closed_form(memory, probe, d):
    """Mixture mean ``d/n * sum_j mult_j sin^2(pi d_H_j / (2k))``."""
    w = memory.distance_weights(probe)
    e = np.arange(memory.k + 1)
    return float(d * np.dot(w, np.sin(np.pi * e / (2 * memory.k)) ** 2))


def sample_ones(memory, probe, d, rng):
    """One measurement of the control register: pick a stored pattern, then a binomial draw."""
    if d < 1:
        raise ValueError("need at least one control qubit")
    probe = parse_bits(probe)
    mults = np.array([m for _, m in memory.entries], dtype=float)
    j = int(rng.choice(len(mults), p=mults / mults.sum()))
    e = hamming(probe, memory.entries[j][0])
    if e == 0:
        return 0
    if e == memory.k:
        return d
    return int(rng.binomial(d, math.sin(math.pi * e / (2 * memory.k)) ** 2))


# -- circuit backend ---------------------------------------------------------


def _load(sv, register, current, wanted):
    for q, a, b in zip(register, current, wanted):
        if a != b:
            sv.apply_x(q)


def store_circuit(patterns, max_qubits=DEFAULT_MAX_QUBITS):
    """Build the uniform superposition of ``patterns`` in a memory register.

    Registers (low to high qubit index): input ``k``, utility ``u1 u2``,
    memory ``k``.  Each pattern is loaded into the input register, copied
    into the processing branch (``u2 = 1``) and split off into the stored
    branch by ``CS^j`` with ``j = n + 1 - iter``.  On return the input
    register is cleared to zeros and the utility qubits are back at
    ``u1 u2 = 01``.

    The memory register ends in ``1/sqrt(n) sum_j |p_j>`` when the patterns
    are distinct.  Repeated patterns are run through the same circuit
    unchanged; the result is then not a uniform multiset superposition, so
    repeated patterns belong to the analytic backend.
    """
    pats = [parse_bits(p) for p in patterns]
    if not pats:
        raise ValueError("no patterns to store")
    k = len(pats[0])
    if any(len(p) != k for p in pats):
        raise ValueError("all patterns must have the same length")
    if 2 * k + 2 > max_qubits:
        raise CapacityError(f"storing {k}-bit patterns needs {2 * k + 2} qubits (cap {max_qubits})")

    layout = RegisterLayout(range(0, k), range(k, k + 2), range(k + 2, 2 * k + 2))
    inp, mem = list(layout.input), list(layout.memory)
    u1, u2 = layout.utility
    n = len(pats)

    sv = new_basis_state(2 * k + 2, "0" * k + "01" + "0" * k, max_qubits)
    current = (0,) * k
    for it, p in enumerate(pats, start=1):
        _load(sv, inp, current, p)
        current = p
        for a, m in zip(inp, mem):
            sv.apply_toffoli(a, u2, m)
        for a, m in zip(inp, mem):
            sv.apply_cnot(a, m).apply_x(m)
        sv.apply_mcx(mem, u1)
        sv.apply_cs(u1, u2, n + 1 - it)
        sv.apply_mcx(mem, u1)
        for a, m in reversed(list(zip(inp, mem))):
            sv.apply_x(m).apply_cnot(a, m)
        for a, m in reversed(list(zip(inp, mem))):
            sv.apply_toffoli(a, u2, m)
    _load(sv, inp, current, (0,) * k)
    # the processing branch is empty after the j = 1 step; every term has u2 = 0
    sv.apply_x(u2)
    return sv, layout


def retrieve_circuit(state, layout, probe, d):
    """Run the retrieval circuit on a stored memory and return the exact output law.

    ``d`` control qubits are appended above the storage registers.  For each
    control qubit: Hadamard, XNOR of the input into the memory, the phase
    layer ``V = diag(e^{i pi/(2k)}, 1)`` on every memory qubit followed by
    ``CV^-2`` from the control, then the XNOR and Hadamard undone.  The
    distribution of the number of ones among the controls is read from the
    exact marginal, not sampled.

    The stored state is single-use: it is marked consumed and a second
    retrieval raises :class:`MemoryConsumedError`.
    """
    if d < 1:
        raise ValueError("need at least one control qubit")
    if getattr(state, "consumed", False):
        raise MemoryConsumedError("memory already retrieved from; store it again")
    probe = parse_bits(probe)
    k = len(layout.memory)
    if len(probe) != k:
        raise ValueError(f"input has {len(probe)} bits, memory stores {k}")

    sv = state.extend(d)
    state.consumed = True
    base = state.num_qubits
    controls = list(range(base, base + d))
    inp, mem = list(layout.input), list(layout.memory)
    _load(sv, inp, (0,) * k, probe)

    theta = math.pi / (2 * k)
    for c in controls:
        sv.apply_h(c)
        for a, m in zip(inp, mem):
            sv.apply_cnot(a, m).apply_x(m)
        for m in mem:
            sv.apply_phase(m, theta)
        for m in mem:
            sv.apply_cphase(c, m, -2 * theta)
        for a, m in reversed(list(zip(inp, mem))):
            sv.apply_x(m).apply_cnot(a, m)
        sv.apply_h(c)

    table = sv.exact_marginal(controls)
    ones = np.array([bin(i).count("1") for i in range(table.shape[0])])
    probs = np.bincount(ones, weights=table, minlength=d + 1)
    return RetrievalDistribution(d, probs)
