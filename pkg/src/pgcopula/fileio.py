"""Deterministic file formats: dataset CSV, chain CSV, metadata, JSON.

All writers assemble the complete text first and then publish it with an
atomic replace, so a crashed run never leaves a partial file.  Floats
are rendered with repr-faithful %.17g so that write-read round trips are
exact; nothing here emits timestamps or machine identifiers.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from pgcopula.copula import CopulaFamily, CopulaParams, CorrelationMatrix
from pgcopula.errors import ValidationError
from pgcopula.inference import Chain
from pgcopula.joint_model import Dataset, ModelParams
from pgcopula.projected_gamma import HALF_PI, MarginalParams

__all__ = [
    "read_chain",
    "read_dataset",
    "write_chain",
    "write_chain_metadata",
    "write_dataset",
    "write_grid",
    "write_summary",
]

_DEG_TO_RAD = math.pi / 180.0


def _fmt(value):
    return format(float(value), ".17g")


def _atomic_write_text(path, text):
    """Write text to path via a same-directory temp file and an atomic rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        mode="w", dir=target.parent, prefix=f".{target.name}.", suffix=".tmp",
        delete=False, newline="")
    try:
        with handle:
            handle.write(text)
        os.replace(handle.name, target)
    except BaseException:
        try:
            os.unlink(handle.name)
        except OSError:
            pass
        raise


def write_dataset(path, dataset):
    """Write a dataset as CSV with a header row of column names."""
    header = dataset.labels or tuple(
        f"theta_{j + 1}" for j in range(dataset.dimension))
    lines = [",".join(header)]
    for row in dataset.angles:
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_dataset(path, degrees=False):
    """Read a dataset CSV written by ``write_dataset`` or by hand.

    Parameters
    ----------
    path : str or Path
        CSV file with a header row followed by one angle vector per row.
    degrees : bool
        When true, values are converted from degrees to radians at
        ingestion, before any validation.

    Returns
    -------
    Dataset
    """
    path = Path(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row]
    if not rows:
        raise ValidationError(f"{path}: empty dataset file")
    header = [c.strip() for c in rows[0]]
    try:
        [float(c) for c in header]
    except ValueError:
        pass
    else:
        raise ValidationError(f"{path}: missing header row of column names")
    width = len(header)
    if width < 1:
        raise ValidationError(f"{path}: header row is empty")
    values = np.empty((len(rows) - 1, width))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ValidationError(
                f"{path}: line {i} has {len(row)} fields, expected {width}")
        try:
            values[i - 2] = [float(c) for c in row]
        except ValueError as exc:
            raise ValidationError(f"{path}: line {i}: {exc}") from exc
    if values.shape[0] < 1:
        raise ValidationError(f"{path}: no data rows")
    if degrees:
        values = values * _DEG_TO_RAD
    interior = np.isfinite(values) & (values > 0.0) & (values < HALF_PI)
    if not np.all(interior):
        bad = np.flatnonzero(~np.all(interior, axis=1)) + 2
        shown = ", ".join(str(i) for i in bad[:10])
        more = "" if bad.size <= 10 else f" (and {bad.size - 10} more)"
        raise ValidationError(
            f"{path}: angles outside the open arc (0, pi/2) on lines "
            f"{shown}{more}")
    return Dataset(values, labels=header)


def _chain_iterations(chain):
    if chain.config is not None:
        cfg = chain.config
        return [cfg.burn_in + (k + 1) * cfg.lag for k in range(len(chain))]
    return list(range(1, len(chain) + 1))


def write_chain(path, chain):
    """Write chain draws as CSV: iteration column plus canonical parameters."""
    names = chain.parameter_names
    matrix = chain.to_matrix()
    lines = [",".join(["iteration"] + names)]
    for it, row in zip(_chain_iterations(chain), matrix):
        lines.append(",".join([str(it)] + [_fmt(v) for v in row]))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_chain_metadata(path, chain, extra=None):
    """Write the run bookkeeping as deterministic key = value lines."""
    pairs = [("family", chain.family.value), ("stage", chain.stage),
             ("draws", str(len(chain))), ("dimension", str(chain.dimension))]
    if chain.config is not None:
        cfg = chain.config
        pairs.extend([
            ("seed", str(cfg.seed)),
            ("total", str(cfg.total)),
            ("burn_in", str(cfg.burn_in)),
            ("lag", str(cfg.lag)),
            ("step_marginal", _fmt(cfg.step_marginal)),
            ("step_rho", _fmt(cfg.step_rho)),
            ("step_nu", _fmt(cfg.step_nu)),
            ("adapt_window", str(cfg.adapt_window)),
            ("stage2_sweeps", str(cfg.stage2_sweeps)),
            ("stage2_warmup", str(cfg.stage2_warmup)),
        ])
    for name in sorted(chain.acceptance):
        pairs.append((f"acceptance_{name}", _fmt(chain.acceptance[name])))
    if extra:
        for key in extra:
            pairs.append((str(key), str(extra[key])))
    lines = [f"{key} = {value}" for key, value in pairs]
    _atomic_write_text(path, "\n".join(lines) + "\n")


def _parse_chain_header(names, path):
    if not names or names[0] != "iteration":
        raise ValidationError(f"{path}: first chain column must be 'iteration'")
    body = names[1:]
    dim = sum(1 for n in body if n.startswith("beta_"))
    if dim < 2:
        raise ValidationError(f"{path}: chain header shows fewer than two coordinates")
    student = body[-1] == "nu"
    family = CopulaFamily.STUDENT_T if student else CopulaFamily.GAUSSIAN
    expected = []
    for j in range(1, dim + 1):
        expected.extend([f"alpha_{j}_1", f"alpha_{j}_2", f"beta_{j}"])
    for r in range(1, dim + 1):
        for q in range(r + 1, dim + 1):
            expected.append(f"rho_{r}_{q}")
    if student:
        expected.append("nu")
    if body != expected:
        raise ValidationError(
            f"{path}: chain columns {body} do not match the canonical order "
            f"{expected}")
    return dim, family


def read_chain(path):
    """Read a chain CSV back into a Chain.

    The column layout determines the dimension and family.  The returned
    chain has no config attached and empty acceptance bookkeeping; it is
    sufficient for scoring, prediction and summaries.
    """
    path = Path(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row]
    if len(rows) < 2:
        raise ValidationError(f"{path}: chain file needs a header and draws")
    names = [c.strip() for c in rows[0]]
    dim, family = _parse_chain_header(names, path)
    n_rho = dim * (dim - 1) // 2
    draws = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(names):
            raise ValidationError(
                f"{path}: line {i} has {len(row)} fields, expected {len(names)}")
        try:
            vals = [float(c) for c in row[1:]]
        except ValueError as exc:
            raise ValidationError(f"{path}: line {i}: {exc}") from exc
        marginals = tuple(
            MarginalParams(*vals[3 * j:3 * j + 3]) for j in range(dim))
        rho = vals[3 * dim:3 * dim + n_rho]
        correlation = CorrelationMatrix.from_upper(dim, rho)
        if family is CopulaFamily.STUDENT_T:
            cop = CopulaParams(family, correlation, vals[-1])
        else:
            cop = CopulaParams(family, correlation)
        draws.append(ModelParams(marginals=marginals, copula=cop))
    return Chain(draws=tuple(draws), family=family, acceptance={}, config=None,
                 stage="file")


def write_summary(path, summary):
    """Write a summary dict as pretty-printed JSON."""
    _atomic_write_text(path, json.dumps(summary, indent=2) + "\n")


def write_grid(path, grid):
    """Write a predictive grid as CSV rows theta_a, theta_b, density."""
    lines = ["theta_a,theta_b,density"]
    for ta, tb, dens in grid.rows():
        lines.append(f"{_fmt(ta)},{_fmt(tb)},{_fmt(dens)}")
    _atomic_write_text(path, "\n".join(lines) + "\n")
