"""Scattering matrices, wavelength lookup tables and analytic passive devices.

Conventions
-----------
* ``S[i, j]`` maps the wave entering port ``j`` to the wave leaving port ``i``.
* Directional coupler ports: (in1, in2, out1, out2).
* Y-branch ports: (stem, branch1, branch2).
* Two-ports: (left, right).
* A :class:`TMatrix` maps the (forward, backward) field pair on the *left* of a
  two-port to the pair on its *right*, so cascades multiply right-to-left:
  ``T_total = T_last @ ... @ T_first``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConversionError, InvalidInputError, RangeError, SParamParseError

PASSIVE_TOL = 1e-9
LOSSLESS_TOL = 1e-9
RECIPROCAL_TOL = 1e-12


def _db_to_field(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 20.0)


@dataclass(frozen=True, eq=False)
class SMatrix:
    data: np.ndarray

    def __post_init__(self):
        d = np.array(self.data, dtype=np.complex128)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 1:
            raise InvalidInputError(f"S-matrix must be square with n >= 1, got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise InvalidInputError("S-matrix entries must be finite")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, idx):
        return self.data[idx]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.data
        return self.data.astype(dtype)


@dataclass(frozen=True, eq=False)
class TMatrix:
    data: np.ndarray

    def __post_init__(self):
        d = np.array(self.data, dtype=np.complex128)
        if d.shape != (2, 2):
            raise InvalidInputError(f"T-matrix must be 2x2, got shape {d.shape}")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    def __matmul__(self, other: "TMatrix") -> "TMatrix":
        return TMatrix(self.data @ other.data)

    def __pow__(self, k: int) -> "TMatrix":
        return TMatrix(np.linalg.matrix_power(self.data, int(k)))


@dataclass(frozen=True, eq=False)
class SParamTable:
    wavelengths: np.ndarray
    matrices: np.ndarray  # shape (m, n, n)

    def __post_init__(self):
        wl = np.array(self.wavelengths, dtype=np.float64)
        mats = np.array(self.matrices, dtype=np.complex128)
        if wl.ndim != 1 or wl.size < 2:
            raise InvalidInputError("lookup table needs at least two wavelength points")
        if mats.ndim != 3 or mats.shape[0] != wl.size or mats.shape[1] != mats.shape[2]:
            raise InvalidInputError(f"matrices shape {mats.shape} does not match {wl.size} grid points")
        if np.any(wl <= 0) or np.any(np.diff(wl) <= 0):
            raise InvalidInputError("wavelength grid must be positive and strictly ascending")
        if not np.all(np.isfinite(mats)) or not np.all(np.isfinite(wl)):
            raise InvalidInputError("lookup table contains non-finite values")
        wl.setflags(write=False)
        mats.setflags(write=False)
        object.__setattr__(self, "wavelengths", wl)
        object.__setattr__(self, "matrices", mats)

    @property
    def n(self) -> int:
        return self.matrices.shape[1]

    def __len__(self) -> int:
        return self.wavelengths.size


def apply(s: SMatrix, a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != (s.n,):
        raise InvalidInputError(f"wave vector of length {a.shape} does not match {s.n}-port")
    return s.data @ a


def interpolate(t: SParamTable, wavelength: float) -> SMatrix:
    """Entrywise linear interpolation of real and imaginary parts.

    Coarse grids under-resolve fast phase rotation; supply a grid that is fine
    compared to the device's group delay.  No extrapolation.
    """
    wl = t.wavelengths
    if not (wl[0] <= wavelength <= wl[-1]):
        raise RangeError(
            f"wavelength {wavelength:.6g} m outside table grid [{wl[0]:.6g}, {wl[-1]:.6g}] m"
        )
    k = int(np.searchsorted(wl, wavelength))
    if wl[k] == wavelength:
        return SMatrix(t.matrices[k])
    lo, hi = k - 1, k
    w = (wavelength - wl[lo]) / (wl[hi] - wl[lo])
    m0, m1 = t.matrices[lo], t.matrices[hi]
    return SMatrix(m0 + w * (m1 - m0))


# --- file format -----------------------------------------------------------

def _fmt_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}j"


def format_table(t: SParamTable) -> str:
    lines = ["SPARAM v1", f"ports {t.n}", f"points {len(t)}"]
    for wl, mat in zip(t.wavelengths, t.matrices):
        lines.append(f"wl {wl:.17g}")
        for row in mat:
            lines.append(" ".join(_fmt_complex(z) for z in row))
    return "\n".join(lines) + "\n"


def save_table(t: SParamTable, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_table(t))


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _expect(lines, keyword: str, last_line: int) -> tuple[int, str]:
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise SParamParseError(f"unexpected end of file, expected '{keyword}'", last_line + 1) from None
    return lineno, line


def _keyword_int(lines, keyword: str, last_line: int) -> tuple[int, int]:
    lineno, line = _expect(lines, keyword, last_line)
    parts = line.split()
    if len(parts) != 2 or parts[0] != keyword:
        raise SParamParseError(f"expected '{keyword} <int>', got {line!r}", lineno)
    try:
        value = int(parts[1])
    except ValueError:
        raise SParamParseError(f"'{keyword}' needs an integer, got {parts[1]!r}", lineno) from None
    if value < 1:
        raise SParamParseError(f"'{keyword}' must be >= 1", lineno)
    return lineno, value


def parse_table(text: str) -> SParamTable:
    lines = _data_lines(text)
    lineno, header = _expect(lines, "SPARAM v1", 0)
    if header.split() != ["SPARAM", "v1"]:
        raise SParamParseError(f"bad header {header!r}, expected 'SPARAM v1'", lineno)
    lineno, n = _keyword_int(lines, "ports", lineno)
    lineno, m = _keyword_int(lines, "points", lineno)

    wavelengths: list[float] = []
    matrices = np.empty((m, n, n), dtype=np.complex128)
    for k in range(m):
        lineno, line = _expect(lines, "wl", lineno)
        parts = line.split()
        if len(parts) != 2 or parts[0] != "wl":
            raise SParamParseError(f"expected 'wl <wavelength>', got {line!r}", lineno)
        try:
            wl = float(parts[1])
        except ValueError:
            raise SParamParseError(f"bad wavelength {parts[1]!r}", lineno) from None
        if not math.isfinite(wl) or wl <= 0:
            raise SParamParseError(f"wavelength must be positive and finite, got {parts[1]}", lineno)
        if wavelengths and wl <= wavelengths[-1]:
            raise SParamParseError(
                f"wavelength grid not strictly ascending ({wl!r} after {wavelengths[-1]!r})", lineno
            )
        wavelengths.append(wl)
        for i in range(n):
            try:
                lineno, line = next(lines)
            except StopIteration:
                raise SParamParseError(
                    f"row-count mismatch: block {k + 1} has {i} rows, expected {n}", lineno + 1
                ) from None
            entries = line.split()
            if entries[0] == "wl":
                raise SParamParseError(f"row-count mismatch: block {k + 1} has {i} rows, expected {n}", lineno)
            if len(entries) != n:
                raise SParamParseError(f"expected {n} entries per row, got {len(entries)}", lineno)
            try:
                row = [complex(e) for e in entries]
            except ValueError as exc:
                raise SParamParseError(f"bad complex entry: {exc}", lineno) from None
            if not all(math.isfinite(z.real) and math.isfinite(z.imag) for z in row):
                raise SParamParseError("non-finite s-parameter entry", lineno)
            matrices[k, i] = row
    extra = next(lines, None)
    if extra is not None:
        raise SParamParseError(f"trailing data after {m} points: {extra[1]!r}", extra[0])
    if m < 2:
        raise SParamParseError("lookup table needs at least two points", lineno)
    return SParamTable(np.array(wavelengths), matrices)


def load_table(path: str | os.PathLike) -> SParamTable:
    with open(path, encoding="utf-8") as fh:
        return parse_table(fh.read())


# --- analytic generators -----------------------------------------------------

def gen_directional_coupler(kappa: float, excess_loss_db: float = 0.0, imbalance: float = 0.0) -> SMatrix:
    if not 0.0 <= kappa <= 1.0:
        raise InvalidInputError(f"power coupling kappa must be in [0, 1], got {kappa}")
    if excess_loss_db < 0:
        raise InvalidInputError("excess loss must be >= 0 dB")
    k = min(max(kappa + imbalance, 0.0), 1.0)
    g = _db_to_field(excess_loss_db)
    through = g * math.sqrt(1.0 - k)
    cross = 1j * g * math.sqrt(k)
    s = np.zeros((4, 4), dtype=np.complex128)
    s[2, 0] = s[0, 2] = s[3, 1] = s[1, 3] = through
    s[3, 0] = s[0, 3] = s[2, 1] = s[1, 2] = cross
    return SMatrix(s)


def gen_y_branch(excess_loss_db: float = 0.0) -> SMatrix:
    if excess_loss_db < 0:
        raise InvalidInputError("excess loss must be >= 0 dB")
    t = _db_to_field(excess_loss_db) / math.sqrt(2.0)
    s = np.zeros((3, 3), dtype=np.complex128)
    s[1, 0] = s[0, 1] = s[2, 0] = s[0, 2] = t
    return SMatrix(s)


def effective_index(n_eff0: float, ng: float, lambda0: float, wavelength: float) -> float:
    """First-order dispersion: the group index sets the slope of n_eff."""
    return n_eff0 - (ng - n_eff0) * (wavelength - lambda0) / lambda0


def waveguide_transmission(length, n_eff0, ng, lambda0, loss_db_per_cm, wavelength) -> complex:
    if length < 0:
        raise InvalidInputError("waveguide length must be >= 0")
    if wavelength <= 0:
        raise InvalidInputError("wavelength must be > 0")
    neff = effective_index(n_eff0, ng, lambda0, wavelength)
    amp = 10.0 ** (-loss_db_per_cm * (length * 100.0) / 20.0)
    return amp * np.exp(-2j * math.pi * neff * length / wavelength)


def gen_waveguide(length, n_eff0, ng, lambda0, loss_db_per_cm, wavelength) -> SMatrix:
    t = waveguide_transmission(length, n_eff0, ng, lambda0, loss_db_per_cm, wavelength)
    return SMatrix([[0.0, t], [t, 0.0]])


def propagation(n: float, width: float, wavelength: float) -> TMatrix:
    beta = 2.0 * math.pi * n / wavelength
    return TMatrix(np.diag([np.exp(-1j * beta * width), np.exp(1j * beta * width)]))


def interface(n_left: float, n_right: float) -> TMatrix:
    """Index step from ``n_left`` to ``n_right`` with power-normalised fields.

    The reflection seen from the left is ``(n_left - n_right)/(n_left + n_right)``.
    """
    total = n_left + n_right
    rho = (n_right - n_left) / total
    t = 2.0 * math.sqrt(n_left * n_right) / total
    return TMatrix(np.array([[1.0, rho], [rho, 1.0]]) / t)


def gen_bragg_period(n1: float, n2: float, w1: float, w2: float, wavelength: float) -> TMatrix:
    """One grating period: an n1 layer of width w1 followed by an n2 layer of
    width w2, referenced to the n1 medium on both sides."""
    if n1 <= 0 or n2 <= 0:
        raise InvalidInputError("indices must be positive")
    if w1 < 0 or w2 < 0:
        raise InvalidInputError("layer widths must be >= 0")
    return (
        interface(n2, n1)
        @ propagation(n2, w2, wavelength)
        @ interface(n1, n2)
        @ propagation(n1, w1, wavelength)
    )


def gen_bragg_reflector(periods: int, n1: float, n2: float, w1: float, w2: float,
                        wavelength: float, mirror: bool = False) -> SMatrix:
    """Uniform grating of ``periods`` periods.

    ``mirror=True`` returns the same physical grating flipped end-for-end
    (layer order n2, n1), which swaps s11 and s22.
    """
    if int(periods) != periods or periods < 1:
        raise InvalidInputError(f"periods must be a positive integer, got {periods}")
    if mirror:
        # layer order n2, n1 inside the same n1 host medium
        period = (
            propagation(n1, w1, wavelength)
            @ interface(n2, n1)
            @ propagation(n2, w2, wavelength)
            @ interface(n1, n2)
        )
    else:
        period = gen_bragg_period(n1, n2, w1, w2, wavelength)
    return t_to_s(period ** int(periods))


def t_to_s(t: TMatrix) -> SMatrix:
    (t11, t12), (t21, t22) = t.data
    if t22 == 0:
        raise ConversionError("T-matrix has t22 = 0; no scattering representation")
    det = t11 * t22 - t12 * t21
    return SMatrix([[-t21 / t22, 1.0 / t22], [det / t22, t12 / t22]])


def s_to_t(s: SMatrix) -> TMatrix:
    """Inverse of :func:`t_to_s`; needs a nonzero right-to-left transmission s12."""
    if s.n != 2:
        raise InvalidInputError("only two-ports have a transfer matrix")
    (s11, s12), (s21, s22) = s.data
    if s12 == 0:
        raise ConversionError("S-matrix has s12 = 0; no transfer-matrix representation")
    det = s11 * s22 - s12 * s21
    return TMatrix([[-det / s12, s22 / s12], [-s11 / s12, 1.0 / s12]])


# --- validation --------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    max_singular_value: float
    unitarity_error: float
    reciprocity_error: float
    flags: frozenset = field(default_factory=frozenset)

    @property
    def passive(self) -> bool:
        return self.max_singular_value <= 1.0 + PASSIVE_TOL

    @property
    def lossless(self) -> bool:
        return self.unitarity_error <= LOSSLESS_TOL

    @property
    def reciprocal(self) -> bool:
        return self.reciprocity_error <= RECIPROCAL_TOL

    def failures(self) -> list[str]:
        """Names of requested flags that the matrix violates."""
        return [f for f in sorted(self.flags) if not getattr(self, f)]

    @property
    def ok(self) -> bool:
        return not self.failures()


def validate(s: SMatrix, flags=("passive",)) -> ValidationReport:
    flags = frozenset(flags)
    unknown = flags - {"passive", "lossless", "reciprocal"}
    if unknown:
        raise InvalidInputError(f"unknown validation flags {sorted(unknown)}")
    d = s.data
    sv = float(np.linalg.norm(d, 2))
    unitarity = float(np.max(np.abs(d.conj().T @ d - np.eye(s.n))))
    reciprocity = float(np.max(np.abs(d - d.T)))
    return ValidationReport(sv, unitarity, reciprocity, flags)
