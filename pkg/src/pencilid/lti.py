"""Discrete-time LTI descriptor models: simulation and response evaluation.

A model is the 5-tuple (E, A, B, C, D) with sample period ``ts``; ``E`` may be
absent (identity) and ``D`` may be absent (zero).  Continuous-time models are
supported only as an ingestion format, to be discretized with a zero-order
hold before any time-domain use.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg

from .errors import DimensionError, FormatError, PoleHit, SingularE

CONTINUOUS = "continuous"

# Relative condition number of E beyond which it is treated as singular.
_E_COND_LIMIT = 1e12

# Imaginary leakage above this fraction of the response norm triggers a warning.
_IMAG_WARN_RATIO = 1e-6


def _as_2d(M, name: str) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M))
    if M.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D matrix, got ndim={M.ndim}")
    return M


@dataclass(frozen=True)
class DescriptorModel:
    """State-space model E x_{k+1} = A x_k + B u_k,  y_k = C x_k + D u_k.

    ``E is None`` means identity (standard form); ``D is None`` means zero.
    ``ts`` is the sample period in seconds, or the string ``"continuous"``.
    Entries may be complex (pencil-based realizations on unit-circle data
    produce complex matrices); responses are then returned as real parts with
    the imaginary leakage recorded.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: Optional[np.ndarray] = None
    E: Optional[np.ndarray] = None
    ts: Union[float, str] = 1.0

    def __post_init__(self):
        object.__setattr__(self, "A", _as_2d(self.A, "A"))
        object.__setattr__(self, "B", _as_2d(self.B, "B"))
        object.__setattr__(self, "C", _as_2d(self.C, "C"))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise DimensionError(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != n:
            raise DimensionError(f"B has {self.B.shape[0]} rows, expected {n}")
        if self.C.shape[1] != n:
            raise DimensionError(f"C has {self.C.shape[1]} cols, expected {n}")
        if self.D is not None:
            object.__setattr__(self, "D", _as_2d(self.D, "D"))
            if self.D.shape != (self.ny, self.nu):
                raise DimensionError(
                    f"D must be {self.ny}x{self.nu}, got {self.D.shape}"
                )
        if self.E is not None:
            object.__setattr__(self, "E", _as_2d(self.E, "E"))
            if self.E.shape != (n, n):
                raise DimensionError(f"E must be {n}x{n}, got {self.E.shape}")
        if not (self.ts == CONTINUOUS or (np.isscalar(self.ts) and self.ts > 0)):
            raise DimensionError(f"ts must be positive or 'continuous', got {self.ts!r}")
        for M in (self.A, self.B, self.C, self.D, self.E):
            if M is not None:
                M.setflags(write=False)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def nu(self) -> int:
        return self.B.shape[1]

    @property
    def ny(self) -> int:
        return self.C.shape[0]

    @property
    def is_discrete(self) -> bool:
        return self.ts != CONTINUOUS

    @property
    def is_complex(self) -> bool:
        return any(
            M is not None and np.iscomplexobj(M)
            for M in (self.A, self.B, self.C, self.D, self.E)
        )

    def d_matrix(self) -> np.ndarray:
        if self.D is None:
            return np.zeros((self.ny, self.nu))
        return self.D


@dataclass(frozen=True)
class SignalSequence:
    """Vector-valued samples indexed by time step, with a common period."""

    samples: np.ndarray  # (K, channels)
    ts: float = 1.0

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.samples, dtype=float))
        if s.shape[0] == 1 and s.shape[1] > 1 and np.asarray(self.samples).ndim == 1:
            s = s.T  # 1-D input is a single-channel signal
        if s.shape[0] < 1:
            raise DimensionError("signal must contain at least one sample")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def channels(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class MarkovSequence:
    """Impulse-response coefficient blocks h_0 .. h_{N-1}."""

    blocks: np.ndarray  # (N, ny, nu)
    ts: float = 1.0
    max_imag: float = 0.0  # diagnostic from complex-model evaluation

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=float)
        if b.ndim == 1:
            b = b.reshape(-1, 1, 1)
        if b.ndim != 3 or b.shape[0] < 1:
            raise DimensionError(f"blocks must be (N, ny, nu) with N >= 1, got {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)

    def __len__(self) -> int:
        return self.blocks.shape[0]

    @property
    def ny(self) -> int:
        return self.blocks.shape[1]

    @property
    def nu(self) -> int:
        return self.blocks.shape[2]


class _ESolver:
    """Pre-factorized solve with E (one factorization, reused everywhere)."""

    def __init__(self, E: Optional[np.ndarray]):
        if E is None:
            self._lu = None
            return
        if np.linalg.cond(E) > _E_COND_LIMIT:
            raise SingularE(f"cond(E) exceeds {_E_COND_LIMIT:g}")
        self._lu = scipy.linalg.lu_factor(E)

    def solve(self, M: np.ndarray) -> np.ndarray:
        if self._lu is None:
            return M
        return scipy.linalg.lu_solve(self._lu, M)


def _realify(x: np.ndarray) -> tuple[np.ndarray, float]:
    """Split a complex response into its real part and the peak imaginary
    magnitude; warn when the leakage is large relative to the response."""
    if not np.iscomplexobj(x):
        return np.asarray(x, dtype=float), 0.0
    max_imag = float(np.max(np.abs(x.imag))) if x.size else 0.0
    scale = float(np.linalg.norm(x.real))
    if scale > 0 and max_imag > _IMAG_WARN_RATIO * scale:
        warnings.warn(
            f"imaginary leakage {max_imag:.3e} exceeds {_IMAG_WARN_RATIO:g} "
            "of the response norm", stacklevel=3,
        )
    return np.ascontiguousarray(x.real), max_imag


def simulate(
    model: DescriptorModel,
    input: SignalSequence,
    x0: Optional[np.ndarray] = None,
) -> SignalSequence:
    """Run the state recursion and return the output sequence.

    The descriptor matrix E, when present, is factorized once and reused for
    every step.  Complex-entry models are simulated in complex arithmetic and
    the real part is returned.
    """
    if not model.is_discrete:
        raise DimensionError("simulate requires a discrete-time model")
    if input.channels != model.nu:
        raise DimensionError(
            f"input has {input.channels} channels, model expects {model.nu}"
        )
    solver = _ESolver(model.E)
    dtype = complex if model.is_complex else float
    K = len(input)
    u = input.samples
    x = np.zeros(model.n, dtype=dtype)
    if x0 is not None:
        x = np.asarray(x0, dtype=dtype).reshape(model.n)
    D = model.d_matrix()
    y = np.empty((K, model.ny), dtype=dtype)
    for k in range(K):
        y[k] = model.C @ x + D @ u[k]
        x = solver.solve(model.A @ x + model.B @ u[k])
    y_real, _ = _realify(y)
    return SignalSequence(y_real, ts=input.ts)


def impulse_response(model: DescriptorModel, N: int) -> MarkovSequence:
    """First N impulse-response coefficient blocks [D, CB, CAB, ...].

    For descriptor models the blocks are those of the equivalent standard
    form, computed through repeated solves with E rather than inversion.
    """
    if not model.is_discrete:
        raise DimensionError("impulse_response requires a discrete-time model")
    if N < 1:
        raise DimensionError("N must be >= 1")
    solver = _ESolver(model.E)
    dtype = complex if model.is_complex else float
    blocks = np.empty((N, model.ny, model.nu), dtype=dtype)
    blocks[0] = model.d_matrix()
    if N > 1:
        X = solver.solve(model.B.astype(dtype))
        blocks[1] = model.C @ X
        for k in range(2, N):
            X = solver.solve(model.A @ X)
            blocks[k] = model.C @ X
    real_blocks, max_imag = _realify(blocks)
    return MarkovSequence(real_blocks, ts=model.ts if model.is_discrete else 1.0,
                          max_imag=max_imag)


def frequency_response(model: DescriptorModel, points: Sequence[complex]) -> np.ndarray:
    """Evaluate H(z) = D + C (zE - A)^{-1} B at each point.

    Returns an array of shape (len(points), ny, nu), complex.
    """
    E = model.E if model.E is not None else np.eye(model.n)
    D = model.d_matrix()
    out = np.empty((len(points), model.ny, model.nu), dtype=complex)
    for i, z in enumerate(points):
        try:
            X = np.linalg.solve(z * E - model.A, model.B)
        except np.linalg.LinAlgError:
            raise PoleHit(z) from None
        out[i] = D + model.C @ X
    return out


def descriptor_to_standard(model: DescriptorModel) -> DescriptorModel:
    """Fold E into A and B, returning the standard-form equivalent."""
    if model.E is None:
        return model
    solver = _ESolver(model.E)
    A = solver.solve(model.A)
    B = solver.solve(model.B)
    return DescriptorModel(A=A, B=B, C=model.C, D=model.D, E=None, ts=model.ts)


def discretize_zoh(model: DescriptorModel, ts: float) -> DescriptorModel:
    """Zero-order-hold discretization of a continuous standard-form model.

    Uses the augmented-matrix exponential
    exp([[A, B], [0, 0]] * ts) = [[A_d, B_d], [0, I]].
    """
    if model.is_discrete:
        raise DimensionError("model is already discrete")
    if model.E is not None:
        model = descriptor_to_standard(model)
    if ts <= 0:
        raise DimensionError("ts must be positive")
    n, nu = model.n, model.nu
    aug = np.zeros((n + nu, n + nu))
    aug[:n, :n] = model.A
    aug[:n, n:] = model.B
    expm = scipy.linalg.expm(aug * ts)
    return DescriptorModel(
        A=expm[:n, :n], B=expm[:n, n:], C=model.C, D=model.D, E=None, ts=ts
    )


def is_stable(model: DescriptorModel) -> tuple[bool, float]:
    """Stability check; returns (stable, spectral radius or abscissa)."""
    solver = _ESolver(model.E)
    A = solver.solve(model.A)
    eig = np.linalg.eigvals(A)
    if model.is_discrete:
        radius = float(np.max(np.abs(eig))) if eig.size else 0.0
        return radius < 1.0, radius
    abscissa = float(np.max(eig.real)) if eig.size else -np.inf
    return abscissa < 0.0, abscissa


# ---------------------------------------------------------------------------
# Model persistence (JSON; complex entries become [re, im] pairs)
# ---------------------------------------------------------------------------

def _encode_matrix(M: Optional[np.ndarray]):
    if M is None:
        return None
    if np.iscomplexobj(M):
        return [[[float(v.real), float(v.imag)] for v in row] for row in M]
    return [[float(v) for v in row] for row in M]


def _decode_matrix(data, name: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"matrix {name} is not numeric: {exc}") from None
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] == 2:
        return arr[:, :, 0] + 1j * arr[:, :, 1]
    raise FormatError(f"matrix {name} has unexpected shape {arr.shape}")


def save_model(model: DescriptorModel, path) -> None:
    doc = {
        "n": model.n,
        "nu": model.nu,
        "ny": model.ny,
        "ts": model.ts,
        "A": _encode_matrix(model.A),
        "B": _encode_matrix(model.B),
        "C": _encode_matrix(model.C),
    }
    if model.D is not None:
        doc["D"] = _encode_matrix(model.D)
    if model.E is not None:
        doc["E"] = _encode_matrix(model.E)
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def load_model(path) -> DescriptorModel:
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: line {exc.lineno}, col {exc.colno}: {exc.msg}")
    for key in ("A", "B", "C"):
        if key not in doc:
            raise FormatError(f"{path}: missing matrix {key!r}")
    A = _decode_matrix(doc["A"], "A")
    B = _decode_matrix(doc["B"], "B")
    C = _decode_matrix(doc["C"], "C")
    D = _decode_matrix(doc["D"], "D") if doc.get("D") is not None else None
    E = _decode_matrix(doc["E"], "E") if doc.get("E") is not None else None
    ts = doc.get("ts", 1.0)
    try:
        model = DescriptorModel(A=A, B=B, C=C, D=D, E=E, ts=ts)
    except DimensionError as exc:
        raise FormatError(f"{path}: {exc}") from None
    for key, expected in (("n", model.n), ("nu", model.nu), ("ny", model.ny)):
        if key in doc and doc[key] != expected:
            raise FormatError(f"{path}: declared {key}={doc[key]} but matrices give {expected}")
    return model


def save_markov(h: MarkovSequence, path) -> None:
    """CSV export of impulse-response blocks: one row per step k."""
    import csv

    header = ["k"]
    for i in range(h.ny):
        for j in range(h.nu):
            header.append(f"h_{i + 1}{j + 1}")
    header.append("ts")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for k in range(len(h)):
            row = [str(k)]
            for i in range(h.ny):
                for j in range(h.nu):
                    row.append(repr(float(h.blocks[k, i, j])))
            row.append(repr(float(h.ts)) if k == 0 else "")
            writer.writerow(row)


def load_markov(path) -> MarkovSequence:
    """Read impulse-response blocks written by :func:`save_markov`.

    Channel dimensions are recovered from the ``h_ij`` column labels.
    """
    import csv

    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        labels = [c for c in header if c.startswith("h_")]
        if not labels or header[0] != "k" or header[-1] != "ts":
            raise FormatError(f"{path}: header must be k,h_11,...,ts")
        ny = max(int(lbl[2:-1]) for lbl in labels)
        nu = max(int(lbl[-1]) for lbl in labels)
        if len(labels) != ny * nu:
            raise FormatError(f"{path}: inconsistent channel labels {labels}")
        rows, ts = [], None
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(
                    f"{path}: line {lineno}: expected {len(header)} columns"
                )
            try:
                rows.append([float(v) for v in row[1:-1]])
                if row[-1]:
                    ts = float(row[-1])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise FormatError(f"{path}: no coefficient rows")
    blocks = np.asarray(rows).reshape(len(rows), ny, nu)
    return MarkovSequence(blocks=blocks, ts=ts if ts is not None else 1.0)
