"""Dense state-vector simulator with the gate set used by the memory circuits.

Basis convention: qubit 0 is the least significant bit of the basis index,
so ``new_basis_state(2, "01")`` puts its amplitude on index 2.  Bit strings
are written qubit 0 first.

Every ``apply_*`` method mutates the state in place and returns it, so calls
chain.  One thread mutates a given instance at a time; distinct instances
are independent.
"""

import math

import numpy as np

from . import _backend

DEFAULT_MAX_QUBITS = 24

_SQRT_HALF = 1.0 / math.sqrt(2.0)


class CapacityError(ValueError):
    """Requested qubit count exceeds the configured cap."""


def parse_bits(bits):
    """Turn ``"0110"`` or an iterable of 0/1 into a tuple of ints."""
    if isinstance(bits, str):
        if any(ch not in "01" for ch in bits):
            raise ValueError(f"malformed bit string {bits!r}")
        return tuple(int(ch) for ch in bits)
    out = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in out):
        raise ValueError(f"malformed bit sequence {bits!r}")
    return out


def _check_cap(num_qubits, max_qubits):
    if num_qubits < 1:
        raise ValueError("need at least one qubit")
    if num_qubits > max_qubits:
        raise CapacityError(f"{num_qubits} qubits exceeds cap of {max_qubits}")


class StateVector:
    """Complex amplitude vector over ``num_qubits`` qubits.

    Parameters
    ----------
    amplitudes : array_like
        Length ``2**q`` complex vector; must be normalized.
    max_qubits : int
        Hard cap on ``q`` (guards against accidental exponential blowup).
    """

    def __init__(self, amplitudes, max_qubits=DEFAULT_MAX_QUBITS):
        amps = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        n = amps.shape[0]
        q = n.bit_length() - 1
        if amps.ndim != 1 or n < 2 or 1 << q != n:
            raise ValueError("amplitude vector length must be a power of two >= 2")
        _check_cap(q, max_qubits)
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized (norm^2 = {norm!r})")
        self.amplitudes = amps
        self.num_qubits = q
        self.max_qubits = max_qubits
        self.consumed = False

    def copy(self):
        return StateVector(self.amplitudes.copy(), self.max_qubits)

    def norm_squared(self):
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits})"

    # -- index checks -------------------------------------------------------

    def _check(self, *qubits):
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise IndexError(f"qubit {q} out of range for {self.num_qubits} qubits")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"qubit indices must be distinct, got {qubits}")

    def _gate(self, target, matrix, controls=()):
        controls = tuple(controls)
        self._check(*controls, target)
        mask = 0
        for c in controls:
            mask |= 1 << c
        (m00, m01), (m10, m11) = matrix
        _backend.kernels().apply_gate(
            self.amplitudes, target, complex(m00), complex(m01), complex(m10), complex(m11), mask
        )
        return self

    # -- gates --------------------------------------------------------------

    def apply_x(self, target):
        return self._gate(target, ((0, 1), (1, 0)))

    def apply_h(self, target):
        s = _SQRT_HALF
        return self._gate(target, ((s, s), (s, -s)))

    def apply_mcx(self, controls, target):
        """Flip ``target`` where every qubit in ``controls`` is 1 (no controls: plain X)."""
        return self._gate(target, ((0, 1), (1, 0)), controls)

    def apply_cnot(self, control, target):
        return self.apply_mcx((control,), target)

    def apply_toffoli(self, control_a, control_b, target):
        return self.apply_mcx((control_a, control_b), target)

    def apply_cs(self, control, target, j, inverse=False):
        """Controlled storage rotation ``CS^j``.

        On the control=1 subspace the target sees
        ``[[sqrt((j-1)/j), 1/sqrt(j)], [-1/sqrt(j), sqrt((j-1)/j)]]``.
        """
        if int(j) != j or j < 1:
            raise ValueError(f"CS^j needs a positive integer j, got {j!r}")
        c = math.sqrt((j - 1) / j)
        s = 1.0 / math.sqrt(j)
        if inverse:
            s = -s
        return self._gate(target, ((c, s), (-s, c)), (control,))

    def apply_phase(self, target, angle):
        """diag(e^{i angle}, 1): the phase sits on the target's |0> component."""
        if not math.isfinite(angle):
            raise ValueError("gate angle must be finite")
        return self._gate(target, ((complex(math.cos(angle), math.sin(angle)), 0), (0, 1)))

    def apply_cphase(self, control, target, angle):
        if not math.isfinite(angle):
            raise ValueError("gate angle must be finite")
        phase = complex(math.cos(angle), math.sin(angle))
        return self._gate(target, ((phase, 0), (0, 1)), (control,))

    # -- register surgery ---------------------------------------------------

    def extend(self, extra_qubits):
        """Append ``extra_qubits`` fresh |0> qubits at the high end of the index."""
        q = self.num_qubits + extra_qubits
        _check_cap(q, self.max_qubits)
        amps = np.zeros(1 << q, dtype=np.complex128)
        amps[: self.amplitudes.shape[0]] = self.amplitudes
        return StateVector(amps, self.max_qubits)

    # -- readout ------------------------------------------------------------

    def exact_marginal(self, qubits):
        """Probabilities over the bit patterns of ``qubits``.

        Entry ``i`` of the returned array has bit ``t`` equal to the value of
        ``qubits[t]``.
        """
        qubits = tuple(qubits)
        self._check(*qubits)
        out = np.zeros(1 << len(qubits))
        _backend.kernels().marginal(self.amplitudes, np.asarray(qubits, dtype=np.int64), out)
        return out

    def measure(self, qubits, rng):
        """Projectively measure ``qubits`` and collapse in place.

        Returns the outcome bits in the order of ``qubits`` and the state.
        """
        qubits = tuple(qubits)
        probs = self.exact_marginal(qubits)
        outcome = int(rng.choice(probs.shape[0], p=probs / probs.sum()))
        idx = np.arange(self.amplitudes.shape[0])
        keep = np.ones(idx.shape[0], dtype=bool)
        for t, q in enumerate(qubits):
            keep &= ((idx >> q) & 1) == ((outcome >> t) & 1)
        self.amplitudes[~keep] = 0.0
        self.amplitudes /= math.sqrt(probs[outcome])
        bits = tuple((outcome >> t) & 1 for t in range(len(qubits)))
        return bits, self


def new_basis_state(num_qubits, bits, max_qubits=DEFAULT_MAX_QUBITS):
    """Computational basis state; ``bits[i]`` is the value of qubit ``i``."""
    _check_cap(num_qubits, max_qubits)
    bits = parse_bits(bits)
    if len(bits) != num_qubits:
        raise ValueError(f"expected {num_qubits} bits, got {len(bits)}")
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[sum(b << i for i, b in enumerate(bits))] = 1.0
    return StateVector(amps, max_qubits)
