"""Dataset generation and persistence.

Random-excitation experiments use numpy's PCG64 generator seeded explicitly,
so a dataset is a pure function of (model, N_s, sigma2, seed) and replays
bit-identically across runs.  Datasets persist as CSV plus a ``.meta.json``
sidecar; floats are written with ``repr`` (shortest round-trip decimal), so
save/load is lossless.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DimensionError, FormatError
from .lti import DescriptorModel, SignalSequence, simulate


@dataclass(frozen=True)
class Dataset:
    """An input-output record, optionally with the noise-free output kept."""

    u: SignalSequence
    y: SignalSequence
    y_clean: Optional[SignalSequence] = None
    sigma2_true: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if len(self.u) != len(self.y):
            raise DimensionError(
                f"u has {len(self.u)} samples, y has {len(self.y)}"
            )
        if len(self.u) < 2:
            raise DimensionError("a dataset needs at least 2 samples")
        if self.u.ts != self.y.ts:
            raise DimensionError("u and y sample periods differ")
        if self.y_clean is not None and len(self.y_clean) != len(self.y):
            raise DimensionError("y_clean length differs from y")

    @property
    def ns(self) -> int:
        return len(self.u)

    @property
    def nu(self) -> int:
        return self.u.channels

    @property
    def ny(self) -> int:
        return self.y.channels

    @property
    def ts(self) -> float:
        return self.u.ts


def generate_experiment(
    model: DescriptorModel,
    ns: int,
    sigma2: float = 0.0,
    seed: int = 0,
    input_std: float = 1.0,
) -> Dataset:
    """Simulate the model under i.i.d. Gaussian input and add output noise.

    The input is standard normal per channel (scaled by ``input_std``); the
    noise is i.i.d. N(0, sigma2) on every output channel.  Both streams are
    drawn from a single PCG64 generator seeded with ``seed``, input first.
    """
    if not model.is_discrete:
        raise DimensionError("generate_experiment requires a discrete-time model")
    if sigma2 < 0:
        raise DimensionError("sigma2 must be nonnegative")
    rng = np.random.default_rng(seed)
    u = SignalSequence(input_std * rng.standard_normal((ns, model.nu)), ts=model.ts)
    y_clean = simulate(model, u)
    if sigma2 > 0:
        w = np.sqrt(sigma2) * rng.standard_normal((ns, model.ny))
        y = SignalSequence(y_clean.samples + w, ts=model.ts)
    else:
        y = y_clean
    return Dataset(u=u, y=y, y_clean=y_clean, sigma2_true=sigma2, seed=seed)


# ---------------------------------------------------------------------------
# Persistence: CSV body + JSON sidecar
# ---------------------------------------------------------------------------

def _meta_path(path) -> Path:
    p = Path(path)
    return p.with_suffix(".meta.json")


def save_dataset(dataset: Dataset, path) -> None:
    path = Path(path)
    header = (
        ["k"]
        + [f"u_{i + 1}" for i in range(dataset.nu)]
        + [f"y_{i + 1}" for i in range(dataset.ny)]
    )
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for k in range(dataset.ns):
            row = [str(k)]
            row += [repr(float(v)) for v in dataset.u.samples[k]]
            row += [repr(float(v)) for v in dataset.y.samples[k]]
            writer.writerow(row)
    meta = {
        "ts": dataset.ts,
        "sigma2_true": dataset.sigma2_true,
        "seed": dataset.seed,
        "nu": dataset.nu,
        "ny": dataset.ny,
    }
    with open(_meta_path(path), "w") as f:
        json.dump(meta, f, indent=1)
        f.write("\n")


def load_dataset(path) -> Dataset:
    path = Path(path)
    meta_path = _meta_path(path)
    try:
        with open(meta_path) as f:
            meta = json.load(f)
    except FileNotFoundError:
        meta = {}
    except json.JSONDecodeError as exc:
        raise FormatError(f"{meta_path}: line {exc.lineno}, col {exc.colno}: {exc.msg}")

    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        nu = sum(1 for name in header if name.startswith("u_"))
        ny = sum(1 for name in header if name.startswith("y_"))
        if not header or header[0] != "k" or nu < 1 or ny < 1:
            raise FormatError(f"{path}: header must be k,u_1,...,y_1,...")
        u_rows, y_rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 1 + nu + ny:
                raise FormatError(
                    f"{path}: line {lineno}: expected {1 + nu + ny} columns, got {len(row)}"
                )
            try:
                u_rows.append([float(v) for v in row[1 : 1 + nu]])
                y_rows.append([float(v) for v in row[1 + nu :]])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
    if not u_rows:
        raise FormatError(f"{path}: no data rows")
    ts = float(meta.get("ts", 1.0))
    u = SignalSequence(np.array(u_rows), ts=ts)
    y = SignalSequence(np.array(y_rows), ts=ts)
    try:
        return Dataset(
            u=u,
            y=y,
            sigma2_true=meta.get("sigma2_true"),
            seed=meta.get("seed"),
        )
    except DimensionError as exc:
        raise FormatError(f"{path}: {exc}") from None
